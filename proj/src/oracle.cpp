#include "thermoflux/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <numeric>

#include "thermoflux/divergence.hpp"
#include "thermoflux/error.hpp"
#include "thermoflux/majorization.hpp"
#include "thermoflux/process.hpp"

namespace thermoflux {

namespace {

Integer integral_count(const Rational& v, const char* what) {
  if (v.get_den() != 1) {
    fail(ErrorKind::InvalidInput, std::string(what) + " " + v.get_str() +
                                      " is not a whole number of microstates; rebuild the model for these parameters");
  }
  return v.get_num();
}

struct Selection {
  std::vector<Shell> groups;  // shells (or parts of one) carrying the work
  std::vector<Rational> eigenvalues;
  Rational mass;
};

// The fewest microstates whose probabilities add up to at least `target`:
// highest per-microstate probability first. The microstate count needed
// from the boundary shell is left fractional when G does not resolve it.
struct BoundaryNeed {
  std::size_t level;
  Rational microstates;
};

std::vector<std::size_t> by_eigenvalue(const DiagonalState<Rational>& rho, std::span<const Rational> shell_size) {
  std::vector<std::size_t> levels;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho.in_support(i)) levels.push_back(i);
  }
  std::stable_sort(levels.begin(), levels.end(), [&](std::size_t a, std::size_t b) {
    return rho.probability(a) * shell_size[b] > rho.probability(b) * shell_size[a];
  });
  return levels;
}

std::optional<BoundaryNeed> boundary_need(const DiagonalState<Rational>& rho, std::span<const Rational> shell_size,
                                          const Rational& target) {
  Rational mass(0);
  for (std::size_t level : by_eigenvalue(rho, shell_size)) {
    if (mass == target) return std::nullopt;
    if (mass + rho.probability(level) <= target) {
      mass += rho.probability(level);
      continue;
    }
    const Rational eigen = rho.probability(level) / shell_size[level];
    return BoundaryNeed{level, Rational((target - mass) / eigen)};
  }
  return std::nullopt;
}

Selection select_microstates(const DiagonalState<Rational>& rho, std::span<const Shell> shells,
                             const Rational& target) {
  std::vector<Rational> sizes(rho.size());
  for (const Shell& s : shells) sizes[s.level] = Rational(s.microstates);
  Selection out;
  out.mass = 0;
  for (std::size_t level : by_eigenvalue(rho, sizes)) {
    if (out.mass == target) break;
    const Rational eigen = rho.probability(level) / sizes[level];
    if (out.mass + rho.probability(level) <= target) {
      out.groups.push_back({level, sizes[level].get_num()});
      out.eigenvalues.push_back(eigen);
      out.mass += rho.probability(level);
    } else {
      const Integer need = integral_count(Rational((target - out.mass) / eigen), "boundary microstate count");
      out.groups.push_back({level, need});
      out.eigenvalues.push_back(eigen);
      out.mass += eigen * Rational(need);
      break;
    }
  }
  return out;
}

// Greedy routing of row groups into column capacities, in list order.
CountMatrix route(std::span<const Shell> rows, std::span<const Shell> cols, const char* what) {
  CountMatrix m;
  for (const Shell& r : rows) m.row_levels.push_back(r.level);
  for (const Shell& c : cols) m.col_levels.push_back(c.level);
  m.counts.assign(rows.size() * cols.size(), Integer(0));
  Integer demand = 0;
  Integer capacity = 0;
  for (const Shell& r : rows) demand += r.microstates;
  for (const Shell& c : cols) capacity += c.microstates;
  if (demand > capacity) {
    fail(ErrorKind::Infeasible, std::string(what) + ": " + demand.get_str() + " microstates cannot fit into " +
                                    capacity.get_str());
  }
  std::size_t c = 0;
  Integer room = cols.empty() ? Integer(0) : cols[0].microstates;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Integer left = rows[r].microstates;
    while (left > 0) {
      while (room == 0) room = cols[++c].microstates;
      const Integer q = left < room ? left : room;
      m.counts[r * cols.size() + c] += q;
      left -= q;
      room -= q;
    }
  }
  return m;
}

}  // namespace

OracleLimits OracleLimits::from_environment() {
  OracleLimits limits;
  if (const char* cap = std::getenv("THERMOFLUX_MAX_MICROSTATES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(cap, &end, 10);
    require(end != cap && *end == '\0' && v > 0, "THERMOFLUX_MAX_MICROSTATES must be a positive integer");
    limits.max_microstates = v;
  }
  return limits;
}

Integer FiniteModel::total_microstates() const {
  Integer total = 0;
  for (const Shell& s : initial_shells) total += s.microstates;
  for (const Shell& s : final_shells) total += s.microstates;
  return total;
}

Integer CountMatrix::row_sum(std::size_t r) const {
  Integer sum = 0;
  for (std::size_t c = 0; c < col_levels.size(); ++c) sum += at(r, c);
  return sum;
}

Integer CountMatrix::col_sum(std::size_t c) const {
  Integer sum = 0;
  for (std::size_t r = 0; r < row_levels.size(); ++r) sum += at(r, c);
  return sum;
}

FiniteModel make_finite_model(const DiagonalState<Rational>& rho, const ThermalContext<Rational>& ctx,
                              const Work<Rational>& w, std::span<const SmoothingParameters> parameters,
                              const Integer& multiplier, const OracleLimits& limits) {
  require_same_spectrum(rho, ctx);
  require(rho.physical(), "finite model needs a normalized state");
  require(multiplier > 0, "degeneracy multiplier must be positive");
  if (rho.size() > limits.max_levels) {
    fail(ErrorKind::ResourceLimit, "oracle handles at most " + std::to_string(limits.max_levels) + " levels");
  }
  const std::size_t n = rho.size();

  // Least G with every shell count integral.
  Integer scale = 1;
  for (std::size_t i = 0; i < n; ++i) {
    scale = common_denominator(scale, ctx.boltzmann(i));
    scale = common_denominator(scale, Rational(ctx.boltzmann(i) * w.factor()));
  }
  for (const SmoothingParameters& p : parameters) {
    require(p.epsilon >= 0 && p.epsilon < 1 && p.delta >= 0 && p.delta < 1, "epsilon and delta must lie in [0, 1)");
    for (std::size_t j = 0; j < n; ++j) {
      scale = common_denominator(scale, Rational(ctx.boltzmann(j) * w.factor() * (1 - p.delta)));
    }
    // Boundary microstates at G = 1; the count scales linearly with G.
    const std::vector<Rational> unit(ctx.boltzmann_weights().begin(), ctx.boltzmann_weights().end());
    if (const auto need = boundary_need(rho, unit, Rational(1 - p.epsilon))) {
      scale = common_denominator(scale, need->microstates);
    }
  }
  scale *= multiplier;

  BathModel<Rational> bath(ctx.beta(), Rational(scale));
  FiniteModel model{rho, ctx, bath, w, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    model.initial_shells.push_back({i, integral_count(bath.degeneracy_for_factor(ctx.boltzmann(i)), "shell size")});
    model.final_shells.push_back(
        {i, integral_count(bath.degeneracy_for_factor(Rational(ctx.boltzmann(i) * w.factor())), "shell size")});
  }
  const Integer total = model.total_microstates();
  if (total > Integer(std::to_string(limits.max_microstates))) {
    fail(ErrorKind::ResourceLimit, "finite model needs " + total.get_str() + " microstates, cap is " +
                                       std::to_string(limits.max_microstates));
  }
  return model;
}

OracleOutcome oracle_forward_reverse(const FiniteModel& model, const Rational& epsilon, const Rational& delta) {
  require(epsilon >= 0 && epsilon < 1 && delta >= 0 && delta < 1, "epsilon and delta must lie in [0, 1)");
  const Rational target = 1 - epsilon;

  const Selection selected = select_microstates(model.rho, model.initial_shells, target);
  OracleOutcome out;
  out.forward_currents = route(selected.groups, model.final_shells, "forward process");

  out.forward = 0;
  out.forward_microstates = 0;
  for (std::size_t r = 0; r < selected.groups.size(); ++r) {
    for (std::size_t c = 0; c < model.final_shells.size(); ++c) {
      out.forward += Rational(out.forward_currents.at(r, c)) * selected.eigenvalues[r];
      out.forward_microstates += out.forward_currents.at(r, c);
    }
  }

  // Reverse process: final shells widened by the delta work content.
  std::vector<Shell> reverse_rows;
  for (std::size_t j = 0; j < model.ctx.size(); ++j) {
    const Rational g = model.bath.degeneracy_for_factor(
        Rational(model.ctx.boltzmann(j) * model.w.factor() * (1 - delta)));
    reverse_rows.push_back({j, integral_count(g, "reverse shell size")});
  }
  out.reverse_currents = route(reverse_rows, model.initial_shells, "reverse process");
  const Rational per_microstate = out.forward / Rational(out.forward_microstates);
  out.reverse = 0;
  out.reverse_microstates = 0;
  for (std::size_t r = 0; r < reverse_rows.size(); ++r) {
    for (std::size_t c = 0; c < model.initial_shells.size(); ++c) {
      out.reverse += Rational(out.reverse_currents.at(r, c)) * per_microstate;
      out.reverse_microstates += out.reverse_currents.at(r, c);
    }
  }
  out.ratio = out.forward / out.reverse;

  // g_i / g_j must equal e^{-beta E_i} / e^{-beta (E_j + w)} wherever
  // microstates flow: the bath absorbs exactly the energy the system and
  // battery give up.
  out.energy_balanced = true;
  const auto& fwd = out.forward_currents;
  for (std::size_t r = 0; r < fwd.row_levels.size(); ++r) {
    for (std::size_t c = 0; c < fwd.col_levels.size(); ++c) {
      if (fwd.at(r, c) == 0) continue;
      const std::size_t i = fwd.row_levels[r];
      const std::size_t j = fwd.col_levels[c];
      const Rational lhs = Rational(model.initial_shells[i].microstates) * model.ctx.boltzmann(j) * model.w.factor();
      const Rational rhs = Rational(model.final_shells[j].microstates) * model.ctx.boltzmann(i);
      if (lhs != rhs) out.energy_balanced = false;
    }
  }
  return out;
}

template <Scalar T>
T oracle_smoothing_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon,
                            const OracleLimits& limits) {
  require_same_spectrum(rho, ctx);
  const std::size_t n = rho.size();
  if (n > limits.max_levels) {
    fail(ErrorKind::ResourceLimit, "subset enumeration handles at most " + std::to_string(limits.max_levels) + " levels");
  }
  require(epsilon >= 0 && epsilon < rho.total(), "epsilon must lie in [0, total mass)");
  bool found = false;
  T best(0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    T removed(0);
    T kept(0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        removed += rho.probability(i);
      } else if (rho.in_support(i)) {
        kept += ctx.boltzmann(i);
      }
    }
    if (removed > epsilon + tolerance<T>() || !(kept > 0)) continue;
    if (!found || kept < best) {
      best = kept;
      found = true;
    }
  }
  return best / ctx.partition_function();
}

template <Scalar T>
double oracle_smoothing(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon,
                        const OracleLimits& limits) {
  return log_of(oracle_smoothing_fraction(rho, ctx, epsilon, limits));
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  require(n > 0, "empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

Instance random_instance(std::mt19937_64& rng, const InstanceOptions& options) {
  require(options.min_levels >= 1 && options.min_levels <= options.max_levels, "bad level range");
  Instance inst;
  inst.base = uniform_below(rng, 2) == 0 ? Rational(2) : Rational(3);
  const std::size_t n = options.min_levels + uniform_below(rng, options.max_levels - options.min_levels + 1);
  for (std::size_t i = 0; i < n; ++i) {
    inst.energies.push_back(static_cast<double>(uniform_below(rng, static_cast<std::uint64_t>(options.max_energy) + 1)));
  }
  // Random composition of the denominator into n parts (zeros allowed).
  std::vector<std::uint64_t> cuts;
  for (std::size_t i = 0; i + 1 < n; ++i) cuts.push_back(uniform_below(rng, options.denominator + 1));
  std::sort(cuts.begin(), cuts.end());
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t next = i + 1 < n ? cuts[i] : options.denominator;
    Rational p(Integer(std::to_string(next - prev)), Integer(options.denominator));
    p.canonicalize();
    inst.probabilities.push_back(p);
    prev = next;
  }
  static const Rational epsilons[] = {Rational(0), Rational(1, 10), Rational(1, 4)};
  static const Rational deltas[] = {Rational(0), Rational(1, 10), Rational(1, 2)};
  inst.epsilon = epsilons[uniform_below(rng, 3)];
  inst.delta = deltas[uniform_below(rng, 3)];
  return inst;
}

template <Scalar T>
ThermalContext<T> instance_context(const Instance& instance) {
  return make_thermal_context(EnergySpectrum(instance.energies), InverseTemperature<T>::from_log_base(instance.base));
}

template <Scalar T>
DiagonalState<T> instance_state(const Instance& instance) {
  std::vector<T> probs;
  for (const Rational& p : instance.probabilities) probs.push_back(from_rational<T>(p));
  return DiagonalState<T>::from_input_order(EnergySpectrum(instance.energies), probs);
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

bool relative_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::string pair_detail(const std::string& got, const std::string& want) { return got + " vs " + want; }

}  // namespace

VerificationReport verify_instance(const Instance& instance, bool exact, std::mt19937_64& rng,
                                   const OracleLimits& limits) {
  const auto ctx = instance_context<Rational>(instance);
  const auto rho = instance_state<Rational>(instance);
  const auto fctx = instance_context<double>(instance);
  const auto frho = instance_state<double>(instance);
  const Rational& eps = instance.epsilon;
  const Rational& delta = instance.delta;
  const double feps = to_double(eps);
  const double fdelta = to_double(delta);
  constexpr double float_tol = 1e-12;

  VerificationReport report;
  report.instance = instance;
  auto check = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  // Deterministic extraction: both probabilities are one at w*.
  {
    const Work<Rational> w_star = deterministic_work(rho, ctx);
    const SmoothingParameters params[] = {{Rational(0), Rational(0)}};
    const FiniteModel model = make_finite_model(rho, ctx, w_star, params, 1, limits);
    const OracleOutcome o = oracle_forward_reverse(model, 0, 0);
    bool closed_ok;
    std::string closed;
    if (exact) {
      const Rational value = support_fraction(rho, ctx) / w_star.factor();
      closed_ok = value == 1;
      closed = value.get_str();
    } else {
      const Work<double> fw = deterministic_work(frho, fctx);
      const double value = std::exp(fctx.beta().value() * fw.value() + d0(frho, fctx));
      closed_ok = relative_close(value, 1.0, float_tol);
      closed = format_scalar(value);
    }
    check("lemma", o.forward == 1 && o.reverse == 1 && o.ratio == 1 && closed_ok,
          "oracle (" + o.forward.get_str() + ", " + o.reverse.get_str() + ", " + o.ratio.get_str() +
              "), exp(beta w + d0) = " + closed);

    const BathModel<Rational>& bath = model.bath;
    const auto currents = build_transition_currents(rho, ctx, bath, w_star);
    const auto reversed = build_transition_currents(rho, ctx, bath, w_star, CornerOrder::Reversed);
    const auto dist = forward_distribution(currents, rho, bath, w_star);
    const auto dist_rev = forward_distribution(reversed, rho, bath, w_star);
    const bool same_total = dist.outcomes[0].probability == dist_rev.outcomes[0].probability;
    check("transition_marginals",
          currents.satisfies_marginals() && reversed.satisfies_marginals() && same_total &&
              dist.outcomes[0].probability == 1 && o.energy_balanced,
          "north-west corner in beta-order and reversed order, P(w*) = " + dist.outcomes[0].probability.get_str());
  }

  // Fluctuation identity at the instance's (epsilon, delta).
  const Rational s = smoothed_support_fraction(rho, ctx, eps);
  std::vector<WorkChoice> choices;
  if (sgn(eps) == 0) choices.push_back(WorkChoice::Deterministic);
  choices.push_back(WorkChoice::Bound);
  choices.push_back(WorkChoice::EnergyUnits);
  WorkChoice choice = choices[uniform_below(rng, choices.size())];
  // Largest whole number of energy units the smoothed state can still pay.
  long max_units = 0;
  while (max_units < 3 && pow_int(instance.base, -(max_units + 1)) >= s) ++max_units;
  const long units = static_cast<long>(uniform_below(rng, static_cast<std::uint64_t>(max_units) + 1));

  auto factor_for = [&](WorkChoice c) -> Rational {
    switch (c) {
      case WorkChoice::Deterministic:
        return support_fraction(rho, ctx);
      case WorkChoice::Bound:
        return Rational(s / (1 - eps));
      case WorkChoice::EnergyUnits:
        break;
    }
    return pow_int(instance.base, -units);
  };

  const SmoothingParameters params[] = {{eps, delta}};
  std::optional<FiniteModel> model;
  try {
    model = make_finite_model(rho, ctx, Work<Rational>::from_factor(factor_for(choice), ctx.beta()), params, 1, limits);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ResourceLimit || choice == WorkChoice::EnergyUnits) throw;
    choice = WorkChoice::EnergyUnits;
    model = make_finite_model(rho, ctx, Work<Rational>::from_factor(factor_for(choice), ctx.beta()), params, 1, limits);
  }
  report.work_choice = choice;
  report.work_factor = model->w.factor();
  report.degeneracy_scale = model->degeneracy_scale();
  report.outcome = oracle_forward_reverse(*model, eps, delta);
  const OracleOutcome& o = report.outcome;

  if (exact) {
    const Rational ratio = fluctuation_ratio(rho, ctx, model->w, eps, delta);
    const auto rev = reverse_probability(rho, ctx, model->w, eps, delta);
    report.closed_form_ratio = to_double(ratio);
    check("theorem", o.ratio == ratio && o.forward == forward_probability(eps) && o.reverse == rev.value,
          "oracle ratio " + pair_detail(o.ratio.get_str(), ratio.get_str()));
  } else {
    Work<double> fw = Work<double>::from_value(static_cast<double>(units), fctx.beta());
    if (choice == WorkChoice::Deterministic) fw = deterministic_work(frho, fctx);
    if (choice == WorkChoice::Bound) fw = epsilon_work_bound(frho, fctx, feps);
    const double ratio = fluctuation_ratio(frho, fctx, fw, feps, fdelta);
    report.closed_form_ratio = ratio;
    check("theorem", relative_close(ratio, to_double(o.ratio), float_tol),
          "oracle ratio " + pair_detail(format_scalar(to_double(o.ratio)), format_scalar(ratio)));
  }

  // The ratio is a property of the physics, not of the bath size.
  {
    bool invariant = true;
    std::string detail;
    for (int m : {2, 3, 10}) {
      OracleLimits scaled = limits;
      scaled.max_microstates *= static_cast<std::uint64_t>(m);
      const FiniteModel bigger = make_finite_model(rho, ctx, model->w, params, m, scaled);
      const Rational r = oracle_forward_reverse(bigger, eps, delta).ratio;
      invariant = invariant && r == o.ratio;
      detail += "G*" + std::to_string(m) + ": " + r.get_str() + " ";
    }
    check("bath_scaling", invariant, detail);
  }

  // Reverse probability saturates at the work bound; one energy unit less
  // overshoots.
  if (exact) {
    const Work<Rational> bound = epsilon_work_bound(rho, ctx, eps);
    const auto at = reverse_probability(rho, ctx, bound, eps, Rational(0));
    const Work<Rational> below = Work<Rational>::from_factor(Rational(bound.factor() * instance.base), ctx.beta());
    const auto under = reverse_probability(rho, ctx, below, eps, Rational(0));
    bool reduces = true;
    if (sgn(eps) == 0) reduces = bound.factor() == deterministic_work(rho, ctx).factor();
    check("corollary", at.value == 1 && at.feasible && under.value > 1 && !under.feasible && reduces,
          "P_rev(bound) = " + at.value.get_str() + ", P_rev(bound - 1) = " + under.value.get_str());
  } else {
    const Work<double> bound = epsilon_work_bound(frho, fctx, feps);
    const auto at = reverse_probability(frho, fctx, bound, feps, 0.0);
    const auto below = Work<double>::from_value(bound.value() - 1.0, fctx.beta());
    const auto under = reverse_probability(frho, fctx, below, feps, 0.0);
    bool reduces = true;
    if (feps == 0.0) reduces = relative_close(bound.value() + 1.0, deterministic_work(frho, fctx).value() + 1.0, float_tol);
    check("corollary",
          relative_close(at.value, 1.0, float_tol) && at.feasible && under.value > 1.0 && !under.feasible && reduces,
          "P_rev(bound) = " + format_scalar(at.value) + ", P_rev(bound - 1) = " + format_scalar(under.value));
  }

  // Whole-level smoothing against exhaustive subset search.
  {
    const Rational half(1, 2);
    bool ok = true;
    std::string detail;
    for (const Rational& e : {eps, half}) {
      if (exact) {
        const Rational a = integral_support_fraction(rho, ctx, e);
        const Rational b = oracle_smoothing_fraction(rho, ctx, e, limits);
        ok = ok && a == b;
        detail += pair_detail(a.get_str(), b.get_str()) + " ";
      } else {
        const double a = d0_smooth_integral(frho, fctx, to_double(e));
        const double b = oracle_smoothing(frho, fctx, to_double(e), limits);
        ok = ok && std::abs(a - b) <= float_tol * (1.0 + std::abs(b));
        detail += pair_detail(format_scalar(a), format_scalar(b)) + " ";
      }
    }
    check("smoothing_optimality", ok, detail);
  }

  // Curve shape and domination of the Gibbs state.
  {
    bool ok;
    if (exact) {
      const auto curve = majorization_curve(rho, ctx);
      ok = curve.is_concave() && curve.points().front().x == 0 && curve.points().front().y == 0 &&
           curve.end().x == ctx.partition_function() && curve.end().y == 1 && thermo_majorizes(rho, ctx.gibbs(), ctx);
    } else {
      const auto curve = majorization_curve(frho, fctx);
      ok = curve.is_concave() && relative_close(curve.end().x, fctx.partition_function(), float_tol) &&
           std::abs(curve.end().y - 1.0) <= float_tol && thermo_majorizes(frho, fctx.gibbs(), fctx);
    }
    check("curve", ok, "concave, spans (0,0) to (Z,1), dominates the Gibbs curve");
  }
  return report;
}

template double oracle_smoothing_fraction(const DiagonalState<double>&, const ThermalContext<double>&, const double&,
                                          const OracleLimits&);
template Rational oracle_smoothing_fraction(const DiagonalState<Rational>&, const ThermalContext<Rational>&,
                                            const Rational&, const OracleLimits&);
template double oracle_smoothing(const DiagonalState<double>&, const ThermalContext<double>&, const double&,
                                 const OracleLimits&);
template double oracle_smoothing(const DiagonalState<Rational>&, const ThermalContext<Rational>&, const Rational&,
                                 const OracleLimits&);
template ThermalContext<double> instance_context(const Instance&);
template ThermalContext<Rational> instance_context(const Instance&);
template DiagonalState<double> instance_state(const Instance&);
template DiagonalState<Rational> instance_state(const Instance&);

}  // namespace thermoflux
