#include "thermoflux/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "thermoflux/divergence.hpp"
#include "thermoflux/error.hpp"
#include "thermoflux/majorization.hpp"
#include "thermoflux/oracle.hpp"
#include "thermoflux/process.hpp"
#include "thermoflux/run_spec.hpp"

namespace thermoflux {

namespace {

using nlohmann::json;

enum class EntropyVariant { Fractional, Integral, Both };

struct Options {
  std::string command;
  std::string spec_path;
  std::optional<std::string> epsilon;
  std::optional<std::string> delta;
  std::optional<std::string> w;
  std::optional<std::string> degeneracy;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::vector<std::string> modes;
  std::size_t instances = 100;
  std::uint64_t seed = 7;

  std::optional<ArithmeticMode> arithmetic;
  EntropyVariant variant = EntropyVariant::Both;
};

// A failed run still prints what it computed.
struct Outcome {
  std::string text;
  int code = 0;
};

void sort_modes(Options& o) {
  bool saw_variant = false;
  for (const std::string& m : o.modes) {
    if (m == "exact" || m == "float") {
      o.arithmetic = m == "exact" ? ArithmeticMode::Exact : ArithmeticMode::Float;
    } else if (o.command == "entropy" && (m == "fractional" || m == "integral" || m == "both")) {
      require(!saw_variant, "--mode fractional|integral|both given twice");
      saw_variant = true;
      o.variant = m == "fractional" ? EntropyVariant::Fractional
                  : m == "integral" ? EntropyVariant::Integral
                                    : EntropyVariant::Both;
    } else {
      fail(ErrorKind::InvalidInput, "unknown --mode '" + m + "' for " + o.command);
    }
  }
}

std::string format_or(const Options& o, std::initializer_list<const char*> allowed) {
  const std::string f = o.format.value_or(*allowed.begin());
  for (const char* a : allowed) {
    if (f == a) return f;
  }
  fail(ErrorKind::InvalidInput, "--format " + f + " is not available for " + o.command);
}

template <Scalar T>
T parameter(const std::optional<std::string>& flag, const std::optional<Rational>& from_spec) {
  if (flag) return from_rational<T>(parse_rational(*flag));
  return from_rational<T>(from_spec.value_or(Rational(0)));
}

json scalar(double v) { return json_scalar(v); }
json scalar(const Rational& v) { return json_scalar(v); }

template <Scalar T>
json input_order(const DiagonalState<T>& state) {
  json arr = json::array();
  for (const T& p : state.input_order_probabilities()) arr.push_back(scalar(p));
  return arr;
}

std::size_t input_index(const EnergySpectrum& spectrum, std::size_t level) { return spectrum.original_index(level); }

template <Scalar T>
json work_json(const Work<T>& w) {
  return json{{"value", scalar(w.value())}, {"factor", scalar(w.factor())}};
}

template <Scalar T>
Outcome curve(const Options& o, const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  const std::string format = format_or(o, {"csv", "json", "svg"});
  if (format == "svg") return {staircase_svg(rho, ctx), 0};
  const MajorizationCurve<T> c = majorization_curve(rho, ctx);
  if (format == "csv") {
    std::string text = "x,y\n";
    for (const auto& p : c.points()) text += format_scalar(p.x) + "," + format_scalar(p.y) + "\n";
    return {text, 0};
  }
  json doc;
  doc["points"] = json::array();
  for (const auto& p : c.points()) doc["points"].push_back(json::array({scalar(p.x), scalar(p.y)}));
  doc["order"] = json::array();
  for (std::size_t level : beta_order(rho, ctx).order) doc["order"].push_back(input_index(rho.spectrum(), level));
  doc["partition_function"] = scalar(ctx.partition_function());
  doc["concave"] = c.is_concave();
  return {doc.dump(2) + "\n", 0};
}

template <Scalar T>
Outcome entropy(const Options& o, const RunSpec& spec, const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  format_or(o, {"json"});
  const T eps = parameter<T>(o.epsilon, spec.epsilon);
  json doc;
  doc["mode"] = Arithmetic<T>::name;
  doc["epsilon"] = scalar(eps);
  doc["d0"] = scalar(d0(rho, ctx));
  doc["d0_textbook"] = scalar(d0_textbook(rho, ctx));
  doc["support_fraction"] = scalar(support_fraction(rho, ctx));
  if (o.variant != EntropyVariant::Integral) {
    const SmoothingResult<T> s = smooth(rho, ctx, eps);
    json smoothing;
    smoothing["l"] = s.kept_count;
    smoothing["f"] = scalar(s.fraction);
    smoothing["S"] = scalar(s.support_mass);
    smoothing["boundary_level"] =
        s.boundary_level ? json(input_index(rho.spectrum(), *s.boundary_level)) : json(nullptr);
    smoothing["removed_weight"] = scalar(s.removed_weight);
    smoothing["smoothed_state"] = input_order(s.smoothed_state);
    const T fraction = s.support_mass / ctx.partition_function();
    doc["fractional"] = json{{"d0", scalar(log_of(fraction))},
                             {"support_fraction", scalar(fraction)},
                             {"smoothing", smoothing}};
  }
  if (o.variant != EntropyVariant::Fractional) {
    const LevelRemoval<T> r = optimal_level_removal(rho, ctx, eps);
    const T fraction = r.kept_boltzmann / ctx.partition_function();
    json removed = json::array();
    for (std::size_t level : r.removed_levels) removed.push_back(input_index(rho.spectrum(), level));
    std::sort(removed.begin(), removed.end());
    doc["integral"] = json{{"d0", scalar(log_of(fraction))},
                           {"support_fraction", scalar(fraction)},
                           {"removed_levels", removed},
                           {"removed_mass", scalar(r.removed_mass)}};
  }
  return {doc.dump(2) + "\n", 0};
}

template <Scalar T>
Outcome bound(const Options& o, const RunSpec& spec, const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  format_or(o, {"json"});
  const T eps = parameter<T>(o.epsilon, spec.epsilon);
  const Work<T> w = epsilon_work_bound(rho, ctx, eps);
  json doc;
  doc["mode"] = Arithmetic<T>::name;
  doc["epsilon"] = scalar(eps);
  doc["kT"] = scalar(ctx.beta().kT());
  doc["w_min"] = scalar(w.value());
  doc["w_min_factor"] = scalar(w.factor());
  doc["deterministic_work"] = scalar(deterministic_work(rho, ctx).value());
  doc["d0"] = scalar(d0(rho, ctx));
  doc["d0_textbook"] = scalar(d0_textbook(rho, ctx));
  doc["d0_smooth_fractional"] = scalar(d0_smooth_fractional(rho, ctx, eps));
  doc["d0_smooth_integral"] = scalar(d0_smooth_integral(rho, ctx, eps));
  return {doc.dump(2) + "\n", 0};
}

template <Scalar T>
json resolved_json(const ResolvedWork<T>& r) {
  json doc = work_json(r.work);
  if (r.snapped) {
    doc["snapped"] = true;
    doc["requested"] = scalar(r.requested);
  }
  return doc;
}

template <Scalar T>
Outcome ratio(const Options& o, const RunSpec& spec, const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  format_or(o, {"json"});
  const T eps = parameter<T>(o.epsilon, spec.epsilon);
  const T delta = parameter<T>(o.delta, spec.delta);
  const std::optional<ResolvedWork<T>> w = resolve_work(spec, o.w, rho, ctx, eps);
  require(w.has_value(), "ratio needs a work value (--w, or w / work_factor in the spec)");

  const ReverseProbability<T> rev = reverse_probability(rho, ctx, w->work, eps, delta);
  json doc;
  doc["mode"] = Arithmetic<T>::name;
  doc["epsilon"] = scalar(eps);
  doc["delta"] = scalar(delta);
  doc["w"] = resolved_json(*w);
  doc["w_delta"] = work_json(w_delta(w->work, delta, ctx.beta()));
  doc["ratio"] = scalar(fluctuation_ratio(rho, ctx, w->work, eps, delta));
  doc["forward"] = scalar(forward_probability(eps));
  doc["reverse"] = scalar(rev.value);
  doc["feasible"] = rev.feasible;
  return {doc.dump(2) + "\n", rev.feasible ? 0 : kExitInfeasible};
}

// Least integer m with every row and column target integral at G * m.
Integer integral_scale(const DiagonalState<Rational>& rho, const ThermalContext<Rational>& ctx, const Rational& g,
                       const Rational& w_factor) {
  Integer scale = 1;
  for (std::size_t level : rho.support()) scale = common_denominator(scale, g * ctx.boltzmann(level));
  for (std::size_t level = 0; level < ctx.size(); ++level) {
    scale = common_denominator(scale, g * ctx.boltzmann(level) * w_factor);
  }
  return scale;
}

template <Scalar T>
Outcome simulate(const Options& o, const RunSpec& spec, const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  const std::string format = format_or(o, {"json", "csv"});
  const T eps = parameter<T>(o.epsilon, spec.epsilon);
  const DiagonalState<T> start = eps > 0 ? smooth(rho, ctx, eps).smoothed_state : rho;

  std::optional<ResolvedWork<T>> w = resolve_work(spec, o.w, rho, ctx, eps);
  if (!w) {
    // The smoothed state's shells fill the final shells exactly.
    const T factor = support_fraction(start, ctx);
    w = ResolvedWork<T>{Work<T>::from_factor(factor, ctx.beta()), false, 0.0};
  }

  Rational g = o.degeneracy ? parse_rational(*o.degeneracy) : spec.degeneracy.value_or(Rational(1));
  require(g > 0, "degeneracy must be positive");
  Integer scale = 1;
  if constexpr (Arithmetic<T>::exact) {
    scale = integral_scale(start, ctx, g, w->work.factor());
    g *= scale;
  }
  const BathModel<T> bath(ctx.beta(), from_rational<T>(g));
  const T rows_total = [&] {
    T sum(0);
    for (std::size_t level : start.support()) sum += bath.degeneracy_for_factor(ctx.boltzmann(level));
    return sum;
  }();
  const T cols_total = bath.degeneracy_for_factor(T(ctx.partition_function() * w->work.factor()));
  if (rows_total > cols_total + tolerance<T>() * cols_total || cols_total > rows_total + tolerance<T>() * rows_total) {
    fail(ErrorKind::Infeasible, "w = " + format_scalar(w->work.value()) + " does not balance the bath shells (" +
                                    format_scalar(rows_total) + " initial vs " + format_scalar(cols_total) +
                                    " final microstates); the balancing w is " +
                                    format_scalar(-log_of(support_fraction(start, ctx)) / ctx.beta().value()));
  }

  const TransitionCurrentMatrix<T> k = build_transition_currents(start, ctx, bath, w->work);
  const WorkDistribution<T> dist = forward_distribution(k, start, bath, w->work);

  if (format == "csv") {
    std::string text = "outcome,w,probability\n";
    for (const auto& out : dist.outcomes) {
      text += "success," + format_scalar(out.work.value()) + "," + format_scalar(out.probability) + "\n";
    }
    text += "failure,," + format_scalar(dist.failure) + "\n";
    return {text, 0};
  }

  json doc;
  doc["mode"] = Arithmetic<T>::name;
  doc["epsilon"] = scalar(eps);
  doc["w"] = resolved_json(*w);
  doc["degeneracy"] = scalar(from_rational<T>(g));
  doc["degeneracy_scale"] = scale.get_str();
  doc["outcomes"] = json::array();
  for (const auto& out : dist.outcomes) {
    doc["outcomes"].push_back(json{{"w", scalar(out.work.value())}, {"probability", scalar(out.probability)}});
  }
  doc["failure"] = scalar(dist.failure);
  doc["final_state"] = input_order(dist.final_state);
  json currents;
  currents["rows"] = json::array();
  currents["cols"] = json::array();
  currents["counts"] = json::array();
  for (std::size_t r = 0; r < k.row_count(); ++r) {
    currents["rows"].push_back(input_index(ctx.spectrum(), k.row_level(r)));
    json row = json::array();
    for (std::size_t c = 0; c < k.col_count(); ++c) row.push_back(scalar(k.at(r, c)));
    currents["counts"].push_back(row);
  }
  for (std::size_t c = 0; c < k.col_count(); ++c) currents["cols"].push_back(input_index(ctx.spectrum(), k.col_level(c)));
  doc["currents"] = currents;
  return {doc.dump(2) + "\n", 0};
}

template <Scalar T>
Outcome run_system(const Options& o, const RunSpec& spec) {
  const ThermalContext<T> ctx = spec_context<T>(spec);
  const DiagonalState<T> rho = spec_state<T>(spec);
  if (o.command == "curve") return curve(o, rho, ctx);
  if (o.command == "entropy") return entropy(o, spec, rho, ctx);
  if (o.command == "bound") return bound(o, spec, rho, ctx);
  if (o.command == "ratio") return ratio(o, spec, rho, ctx);
  return simulate(o, spec, rho, ctx);
}

const char* choice_name(WorkChoice c) {
  switch (c) {
    case WorkChoice::Deterministic:
      return "deterministic";
    case WorkChoice::EnergyUnits:
      return "energy_units";
    case WorkChoice::Bound:
      return "bound";
  }
  return "";
}

RunSpec instance_spec(const Instance& inst, const Rational& work_factor, bool exact) {
  RunSpec spec;
  spec.beta_base = inst.base;
  spec.beta = log_of(inst.base);
  spec.energies = inst.energies;
  spec.probabilities = inst.probabilities;
  spec.epsilon = inst.epsilon;
  spec.delta = inst.delta;
  spec.work_factor = work_factor;
  spec.mode = exact ? ArithmeticMode::Exact : ArithmeticMode::Float;
  return spec;
}

Outcome verify(const Options& o) {
  format_or(o, {"json"});
  const bool exact = o.arithmetic.value_or(ArithmeticMode::Exact) == ArithmeticMode::Exact;
  const OracleLimits limits = OracleLimits::from_environment();
  std::mt19937_64 rng(o.seed);
  std::string text;
  bool all_passed = true;
  constexpr std::size_t kMaxRedraws = 10'000;
  std::size_t redraws = 0;
  for (std::size_t index = 0; index < o.instances;) {
    const Instance inst = random_instance(rng);
    std::optional<VerificationReport> report;
    try {
      report = verify_instance(inst, exact, rng, limits);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ResourceLimit) throw;
      if (++redraws > kMaxRedraws) fail(ErrorKind::ResourceLimit, "too many instances exceed the oracle limits");
      continue;
    }
    json line;
    line["index"] = index;
    line["spec"] = to_json(instance_spec(inst, report->work_factor, exact));
    line["work_choice"] = choice_name(report->work_choice);
    line["degeneracy_scale"] = report->degeneracy_scale.get_str();
    line["forward"] = scalar(report->outcome.forward);
    line["reverse"] = scalar(report->outcome.reverse);
    line["ratio"] = scalar(report->outcome.ratio);
    line["closed_form_ratio"] = scalar(report->closed_form_ratio);
    json checks = json::object();
    for (const CheckResult& c : report->checks) {
      checks[c.name] = c.passed;
      if (!c.passed) line["failures"][c.name] = c.detail;
    }
    line["checks"] = checks;
    line["passed"] = report->passed();
    all_passed = all_passed && report->passed();
    text += line.dump() + "\n";
    ++index;
  }
  return {text, all_passed ? 0 : kExitViolation};
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
    case ErrorKind::ResourceLimit:
      return kExitInfeasible;
    case ErrorKind::InvalidInput:
    case ErrorKind::SpectrumMismatch:
      break;
  }
  return kExitMalformed;
}

Outcome dispatch(Options& o) {
  sort_modes(o);
  if (o.command == "verify") return verify(o);
  const RunSpec spec = load_run_spec(o.spec_path);
  if (resolve_mode(spec, o.arithmetic) == ArithmeticMode::Exact) return run_system<Rational>(o, spec);
  return run_system<double>(o, spec);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-shot work extraction: majorization curves, smoothed divergences, fluctuation ratios."};
  app.name("thermoflux");
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--mode", o.modes, "exact|float (entropy also: fractional|integral|both)");
    sub->add_option("--out", o.out, "Write output to FILE instead of stdout");
    sub->add_option("--format", o.format, "json|csv|svg, where supported");
  };
  const auto add_system = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", o.spec_path, "System spec file (JSON)")->required();
    sub->add_option("--epsilon", o.epsilon, "Smoothing epsilon (overrides the spec)");
    sub->add_option("--delta", o.delta, "Reverse smoothing delta (overrides the spec)");
    sub->add_option("--w", o.w, "Work: a number, 'bound' or 'deterministic'");
    sub->add_option("--degeneracy", o.degeneracy, "Bath reference degeneracy G");
    add_common(sub);
    return sub;
  };
  add_system("curve", "Thermo-majorization curve breakpoints");
  add_system("entropy", "Renyi-0 divergence and its smoothed forms");
  add_system("bound", "Epsilon-deterministic work bound");
  add_system("ratio", "Fluctuation ratio, forward and reverse probabilities");
  add_system("simulate", "Explicit transition currents and the work distribution");
  CLI::App* verify_cmd = app.add_subcommand("verify", "Check every identity against the counting oracle");
  verify_cmd->add_option("--instances", o.instances, "Number of random instances")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", o.seed, "Generator seed");
  add_common(verify_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitMalformed;
  }
  o.command = app.get_subcommands().front()->get_name();

  Outcome result;
  try {
    result = dispatch(o);
  } catch (const Error& e) {
    err << "thermoflux " << o.command << ": " << e.what() << "\n";
    return exit_code(e.kind());
  }

  if (o.out) {
    std::ofstream file(*o.out, std::ios::binary);
    if (!file) {
      err << "thermoflux: cannot write '" << *o.out << "'\n";
      return kExitMalformed;
    }
    file << result.text;
  } else {
    out << result.text;
  }
  return result.code;
}

}  // namespace thermoflux
