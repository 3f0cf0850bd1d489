#include "thermoflux/run_spec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "thermoflux/divergence.hpp"
#include "thermoflux/error.hpp"
#include "thermoflux/process.hpp"

namespace thermoflux {

namespace {

using nlohmann::json;

Rational rational_field(const json& v, const std::string& name) {
  if (v.is_number_integer()) return Rational(Integer(v.dump()));
  if (v.is_number_float()) return rational_from_decimal(v.get<double>());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const Error& e) {
      fail(ErrorKind::InvalidInput, "field '" + name + "': " + e.what());
    }
  }
  fail(ErrorKind::InvalidInput, "field '" + name + "' must be a number or a \"p/q\" string");
}

double real_field(const json& v, const std::string& name) {
  if (v.is_number()) return v.get<double>();
  return to_double(rational_field(v, name));
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

void parse_beta(const json& v, RunSpec& spec) {
  if (v.is_number()) {
    spec.beta = v.get<double>();
  } else if (v.is_string()) {
    const std::string text = v.get<std::string>();
    std::string_view s = strip(text);
    if (s.starts_with("ln(") && s.ends_with(")")) {
      s.remove_prefix(3);
      s.remove_suffix(1);
      const Rational base = parse_rational(s);
      require(base > 1, "beta = ln(r) needs r > 1");
      spec.beta_base = base;
      spec.beta = log_of(base);
    } else {
      spec.beta = to_double(parse_rational(s));
    }
  } else {
    fail(ErrorKind::InvalidInput, "field 'beta' must be a number or \"ln(p/q)\"");
  }
  require(std::isfinite(spec.beta) && spec.beta > 0.0, "beta must be positive");
}

ArithmeticMode parse_mode(const std::string& text) {
  if (text == "exact") return ArithmeticMode::Exact;
  if (text == "float") return ArithmeticMode::Float;
  fail(ErrorKind::InvalidInput, "mode must be 'exact' or 'float', got '" + text + "'");
}

bool representable_exactly(const RunSpec& spec) {
  if (!spec.beta_base) return false;
  for (double e : spec.energies) {
    if (std::nearbyint(e) != e) return false;
  }
  return true;
}

}  // namespace

RunSpec parse_run_spec(const json& doc) {
  require(doc.is_object(), "spec must be a JSON object");
  for (const char* key : {"beta", "energies", "probabilities"}) {
    require(doc.contains(key), std::string("spec is missing '") + key + "'");
  }
  RunSpec spec;
  parse_beta(doc.at("beta"), spec);

  const json& energies = doc.at("energies");
  const json& probs = doc.at("probabilities");
  require(energies.is_array() && probs.is_array(), "'energies' and 'probabilities' must be arrays");
  require(!energies.empty(), "'energies' is empty");
  require(energies.size() == probs.size(), "'energies' and 'probabilities' differ in length");
  for (const json& e : energies) spec.energies.push_back(real_field(e, "energies"));
  for (const json& p : probs) spec.probabilities.push_back(rational_field(p, "probabilities"));

  if (doc.contains("epsilon")) spec.epsilon = rational_field(doc.at("epsilon"), "epsilon");
  if (doc.contains("delta")) spec.delta = rational_field(doc.at("delta"), "delta");
  if (doc.contains("w")) {
    const json& w = doc.at("w");
    require(w.is_number() || w.is_string(), "field 'w' must be a number, \"bound\" or \"deterministic\"");
    spec.w = w.is_string() ? w.get<std::string>() : w.dump();
  }
  if (doc.contains("work_factor")) spec.work_factor = rational_field(doc.at("work_factor"), "work_factor");
  if (doc.contains("degeneracy")) spec.degeneracy = rational_field(doc.at("degeneracy"), "degeneracy");
  if (doc.contains("mode")) {
    require(doc.at("mode").is_string(), "field 'mode' must be a string");
    spec.mode = parse_mode(doc.at("mode").get<std::string>());
  }
  return spec;
}

RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open spec file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, "spec file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_spec(doc);
}

json to_json(const RunSpec& spec) {
  json doc;
  if (spec.beta_base) {
    doc["beta"] = "ln(" + spec.beta_base->get_str() + ")";
  } else {
    doc["beta"] = spec.beta;
  }
  doc["energies"] = json::array();
  for (double e : spec.energies) {
    if (std::nearbyint(e) == e && std::abs(e) < 1e15) {
      doc["energies"].push_back(static_cast<long long>(e));
    } else {
      doc["energies"].push_back(e);
    }
  }
  doc["probabilities"] = json::array();
  for (const Rational& p : spec.probabilities) doc["probabilities"].push_back(p.get_str());
  if (spec.epsilon) doc["epsilon"] = spec.epsilon->get_str();
  if (spec.delta) doc["delta"] = spec.delta->get_str();
  if (spec.w) doc["w"] = *spec.w;
  if (spec.work_factor) doc["work_factor"] = spec.work_factor->get_str();
  if (spec.degeneracy) doc["degeneracy"] = spec.degeneracy->get_str();
  if (spec.mode) doc["mode"] = *spec.mode == ArithmeticMode::Exact ? "exact" : "float";
  return doc;
}

ArithmeticMode resolve_mode(const RunSpec& spec, std::optional<ArithmeticMode> requested) {
  const std::optional<ArithmeticMode> mode = requested ? requested : spec.mode;
  if (mode == ArithmeticMode::Exact) {
    require(representable_exactly(spec), "exact mode needs beta = ln(p/q) and integral energies");
    return ArithmeticMode::Exact;
  }
  if (mode == ArithmeticMode::Float) return ArithmeticMode::Float;
  return representable_exactly(spec) ? ArithmeticMode::Exact : ArithmeticMode::Float;
}

template <Scalar T>
ThermalContext<T> spec_context(const RunSpec& spec) {
  EnergySpectrum spectrum(spec.energies);
  if (spec.beta_base) return make_thermal_context(spectrum, InverseTemperature<T>::from_log_base(*spec.beta_base));
  return make_thermal_context(spectrum, InverseTemperature<T>::from_value(spec.beta));
}

template <Scalar T>
DiagonalState<T> spec_state(const RunSpec& spec) {
  std::vector<T> probs;
  for (const Rational& p : spec.probabilities) probs.push_back(from_rational<T>(p));
  return DiagonalState<T>::from_input_order(EnergySpectrum(spec.energies), probs);
}

template <Scalar T>
std::optional<ResolvedWork<T>> resolve_work(const RunSpec& spec, const std::optional<std::string>& override_w,
                                            const DiagonalState<T>& rho, const ThermalContext<T>& ctx,
                                            const T& epsilon) {
  const std::optional<std::string>& text = override_w ? override_w : spec.w;
  if (!text) {
    if (!spec.work_factor) return std::nullopt;
    return ResolvedWork<T>{Work<T>::from_factor(from_rational<T>(*spec.work_factor), ctx.beta()), false, 0.0};
  }
  const std::string_view s = strip(*text);
  if (s == "bound") {
    Work<T> w = epsilon_work_bound(rho, ctx, epsilon);
    const double v = w.value();
    return ResolvedWork<T>{std::move(w), false, v};
  }
  if (s == "deterministic") {
    Work<T> w = deterministic_work(rho, ctx);
    const double v = w.value();
    return ResolvedWork<T>{std::move(w), false, v};
  }
  const double requested = to_double(parse_rational(s));
  if constexpr (Arithmetic<T>::exact) {
    if (std::nearbyint(requested) == requested) {
      return ResolvedWork<T>{Work<T>::from_value(requested, ctx.beta()), false, requested};
    }
    const Rational factor =
        best_rational_approximation(std::exp(-ctx.beta().value() * requested), kSnapDenominator);
    require(factor > 0, "work " + std::string(s) + " is too large to represent");
    return ResolvedWork<T>{Work<T>::from_factor(factor, ctx.beta()), true, requested};
  } else {
    return ResolvedWork<T>{Work<T>::from_value(requested, ctx.beta()), false, requested};
  }
}

json json_scalar(double v) { return round15(v); }
json json_scalar(const Rational& v) { return v.get_str(); }

template ThermalContext<double> spec_context(const RunSpec&);
template ThermalContext<Rational> spec_context(const RunSpec&);
template DiagonalState<double> spec_state(const RunSpec&);
template DiagonalState<Rational> spec_state(const RunSpec&);
template std::optional<ResolvedWork<double>> resolve_work(const RunSpec&, const std::optional<std::string>&,
                                                          const DiagonalState<double>&, const ThermalContext<double>&,
                                                          const double&);
template std::optional<ResolvedWork<Rational>> resolve_work(const RunSpec&, const std::optional<std::string>&,
                                                            const DiagonalState<Rational>&,
                                                            const ThermalContext<Rational>&, const Rational&);

}  // namespace thermoflux
