#include "thermoflux/process.hpp"

#include <algorithm>
#include <cmath>

#include "thermoflux/error.hpp"

namespace thermoflux {

namespace {

template <Scalar T>
void require_delta(const T& delta) {
  require(delta >= 0 && delta < 1, "delta must lie in [0, 1)");
}

template <Scalar T>
void require_unit_epsilon(const T& epsilon) {
  require(epsilon >= 0 && epsilon < 1, "epsilon must lie in [0, 1)");
}

template <Scalar T>
bool close(const T& a, const T& b) {
  if constexpr (Arithmetic<T>::exact) {
    return a == b;
  } else {
    return std::abs(a - b) <= tolerance<T>() * std::max({1.0, std::abs(a), std::abs(b)});
  }
}

template <Scalar T>
bool integral(const T& v) {
  if constexpr (Arithmetic<T>::exact) {
    return v.get_den() == 1;
  } else {
    return true;
  }
}

}  // namespace

template <Scalar T>
Work<T> deterministic_work(const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  require(rho.physical(), "deterministic work needs a normalized state");
  return Work<T>::from_factor(support_fraction(rho, ctx), ctx.beta());
}

double w_delta(double w, double delta, double beta) {
  require(delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
  require(beta > 0.0, "inverse temperature must be positive");
  return w - std::log1p(-delta) / beta;
}

template <Scalar T>
Work<T> w_delta(const Work<T>& w, const T& delta, const InverseTemperature<T>& beta) {
  require_delta(delta);
  return Work<T>::from_factor(T(w.factor() * (T(1) - delta)), beta);
}

template <Scalar T>
T fluctuation_ratio(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const Work<T>& w, const T& epsilon,
                    const T& delta) {
  require(rho.physical(), "fluctuation ratio needs a normalized state");
  require_unit_epsilon(epsilon);
  require_delta(delta);
  if constexpr (Arithmetic<T>::exact) {
    const T s = smoothed_support_fraction(rho, ctx, epsilon);
    return s / (w.factor() * (T(1) - delta));
  } else {
    const double beta = ctx.beta().value();
    return std::exp(beta * w_delta(w.value(), delta, beta) + d0_smooth_fractional(rho, ctx, epsilon));
  }
}

template <Scalar T>
T forward_probability(const T& epsilon) {
  require_unit_epsilon(epsilon);
  return T(1) - epsilon;
}

template <Scalar T>
ReverseProbability<T> reverse_probability(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const Work<T>& w,
                                          const T& epsilon, const T& delta) {
  require(rho.physical(), "reverse probability needs a normalized state");
  require_unit_epsilon(epsilon);
  require_delta(delta);
  T value;
  if constexpr (Arithmetic<T>::exact) {
    const T s = smoothed_support_fraction(rho, ctx, epsilon);
    value = (T(1) - epsilon) * w.factor() * (T(1) - delta) / s;
  } else {
    const double beta = ctx.beta().value();
    value = (1.0 - epsilon) * std::exp(-beta * w_delta(w.value(), delta, beta) - d0_smooth_fractional(rho, ctx, epsilon));
  }
  const bool feasible = value <= T(1) + tolerance<T>();
  return {std::move(value), feasible};
}

template <Scalar T>
Work<T> epsilon_work_bound(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  require(rho.physical(), "work bound needs a normalized state");
  require_unit_epsilon(epsilon);
  const T s = smoothed_support_fraction(rho, ctx, epsilon);
  return Work<T>::from_factor(T(s / (T(1) - epsilon)), ctx.beta());
}

template <Scalar T>
Work<T> thermal_work_content(const ThermalContext<T>& ctx, const T& delta) {
  require_delta(delta);
  return Work<T>::from_factor(smoothed_support_fraction(ctx.gibbs(), ctx, delta), ctx.beta());
}

template <Scalar T>
TransitionCurrentMatrix<T>::TransitionCurrentMatrix(std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                                                    std::vector<T> row_targets, std::vector<T> col_targets,
                                                    std::vector<T> entries)
    : rows_(std::move(rows)),
      cols_(std::move(cols)),
      row_targets_(std::move(row_targets)),
      col_targets_(std::move(col_targets)),
      entries_(std::move(entries)) {
  require(rows_.size() == row_targets_.size() && cols_.size() == col_targets_.size(),
          "transition matrix targets do not match its shape");
  require(entries_.size() == rows_.size() * cols_.size(), "transition matrix entry count does not match its shape");
  for (const T& k : entries_) require(k >= 0, "negative transition current");
}

template <Scalar T>
T TransitionCurrentMatrix<T>::row_sum(std::size_t r) const {
  T sum(0);
  for (std::size_t c = 0; c < cols_.size(); ++c) sum += at(r, c);
  return sum;
}

template <Scalar T>
T TransitionCurrentMatrix<T>::col_sum(std::size_t c) const {
  T sum(0);
  for (std::size_t r = 0; r < rows_.size(); ++r) sum += at(r, c);
  return sum;
}

template <Scalar T>
bool TransitionCurrentMatrix<T>::satisfies_marginals() const {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (!close(row_sum(r), row_targets_[r])) return false;
  }
  for (std::size_t c = 0; c < cols_.size(); ++c) {
    if (!close(col_sum(c), col_targets_[c])) return false;
  }
  return true;
}

template <Scalar T>
TransitionCurrentMatrix<T> northwest_corner(std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                                            std::vector<T> row_targets, std::vector<T> col_targets) {
  require(!row_targets.empty() && !col_targets.empty(), "transportation problem needs rows and columns");
  T row_total(0);
  T col_total(0);
  for (const T& t : row_targets) {
    require(t >= 0, "negative row target");
    row_total += t;
  }
  for (const T& t : col_targets) {
    require(t >= 0, "negative column target");
    col_total += t;
  }
  if (!close(row_total, col_total)) {
    fail(ErrorKind::Infeasible, "row total " + format_scalar(row_total) + " differs from column total " +
                                    format_scalar(col_total));
  }

  const std::size_t nr = row_targets.size();
  const std::size_t nc = col_targets.size();
  // Residuals below this are rounding noise in float mode.
  const T slack = tolerance<T>() * row_total;
  std::vector<T> entries(nr * nc, T(0));
  std::size_t r = 0;
  std::size_t c = 0;
  T row_left = row_targets[0];
  T col_left = col_targets[0];
  while (r < nr && c < nc) {
    const T q = std::min(row_left, col_left);
    entries[r * nc + c] += q;
    row_left -= q;
    col_left -= q;
    const bool row_done = row_left <= slack;
    const bool col_done = col_left <= slack;
    if (row_done && ++r < nr) row_left = row_targets[r];
    if (col_done && ++c < nc) col_left = col_targets[c];
  }
  return TransitionCurrentMatrix<T>(std::move(rows), std::move(cols), std::move(row_targets), std::move(col_targets),
                                    std::move(entries));
}

template <Scalar T>
TransitionCurrentMatrix<T> build_transition_currents(const DiagonalState<T>& rho, const ThermalContext<T>& ctx,
                                                     const BathModel<T>& bath, const Work<T>& w, CornerOrder order) {
  require_same_spectrum(rho, ctx);
  std::vector<std::size_t> rows;
  for (std::size_t level : beta_order(rho, ctx).order) {
    if (rho.in_support(level)) rows.push_back(level);
  }
  std::vector<std::size_t> cols = beta_order(ctx.gibbs(), ctx).order;
  if (order == CornerOrder::Reversed) {
    std::reverse(rows.begin(), rows.end());
    std::reverse(cols.begin(), cols.end());
  }

  std::vector<T> row_targets;
  for (std::size_t level : rows) row_targets.push_back(bath.degeneracy_for_factor(ctx.boltzmann(level)));
  std::vector<T> col_targets;
  for (std::size_t level : cols) {
    col_targets.push_back(bath.degeneracy_for_factor(T(ctx.boltzmann(level) * w.factor())));
  }
  for (const T& t : row_targets) {
    require(integral(t), "bath degeneracy " + format_scalar(t) + " is not a whole number of microstates");
  }
  for (const T& t : col_targets) {
    require(integral(t), "bath degeneracy " + format_scalar(t) + " is not a whole number of microstates");
  }
  return northwest_corner(std::move(rows), std::move(cols), std::move(row_targets), std::move(col_targets));
}

template <Scalar T>
T WorkDistribution<T>::total() const {
  T sum = failure;
  for (const auto& o : outcomes) sum += o.probability;
  return sum;
}

template <Scalar T>
WorkDistribution<T> forward_distribution(const TransitionCurrentMatrix<T>& currents, const DiagonalState<T>& rho,
                                         const BathModel<T>& bath, const Work<T>& w) {
  const EnergySpectrum& spectrum = rho.spectrum();
  std::vector<bool> covered(rho.size(), false);
  for (std::size_t r = 0; r < currents.row_count(); ++r) {
    const std::size_t level = currents.row_level(r);
    require(level < rho.size(), "transition matrix row outside the spectrum");
    covered[level] = true;
    if (!close(currents.row_target(r), bath.degeneracy(spectrum.energy(level))) ||
        !close(currents.row_sum(r), currents.row_target(r))) {
      fail(ErrorKind::InvalidInput, "transition currents do not match the bath degeneracy of their initial shell");
    }
  }
  for (std::size_t level : rho.support()) {
    require(covered[level], "transition currents miss a level in the state's support");
  }

  std::vector<T> final_probs(rho.size(), T(0));
  T moved(0);
  for (std::size_t r = 0; r < currents.row_count(); ++r) {
    const std::size_t i = currents.row_level(r);
    const T per_microstate = rho.probability(i) / currents.row_target(r);
    for (std::size_t c = 0; c < currents.col_count(); ++c) {
      const T flow = currents.at(r, c) * per_microstate;
      final_probs[currents.col_level(c)] += flow;
      moved += flow;
    }
  }
  T failure = T(1) - moved;
  if (failure < 0) failure = T(0);
  return WorkDistribution<T>{{WorkOutcome<T>{w, moved}}, std::move(failure),
                             DiagonalState<T>(spectrum, std::move(final_probs))};
}

#define THERMOFLUX_INSTANTIATE(T)                                                                                  \
  template Work<T> deterministic_work(const DiagonalState<T>&, const ThermalContext<T>&);                        \
  template Work<T> w_delta(const Work<T>&, const T&, const InverseTemperature<T>&);                              \
  template T fluctuation_ratio(const DiagonalState<T>&, const ThermalContext<T>&, const Work<T>&, const T&,      \
                               const T&);                                                                        \
  template T forward_probability(const T&);                                                                      \
  template ReverseProbability<T> reverse_probability(const DiagonalState<T>&, const ThermalContext<T>&,          \
                                                     const Work<T>&, const T&, const T&);                        \
  template Work<T> epsilon_work_bound(const DiagonalState<T>&, const ThermalContext<T>&, const T&);              \
  template Work<T> thermal_work_content(const ThermalContext<T>&, const T&);                                     \
  template class TransitionCurrentMatrix<T>;                                                                     \
  template TransitionCurrentMatrix<T> northwest_corner(std::vector<std::size_t>, std::vector<std::size_t>,       \
                                                       std::vector<T>, std::vector<T>);                          \
  template TransitionCurrentMatrix<T> build_transition_currents(const DiagonalState<T>&, const ThermalContext<T>&, \
                                                                const BathModel<T>&, const Work<T>&, CornerOrder); \
  template struct WorkDistribution<T>;                                                                           \
  template WorkDistribution<T> forward_distribution(const TransitionCurrentMatrix<T>&, const DiagonalState<T>&,  \
                                                    const BathModel<T>&, const Work<T>&);

THERMOFLUX_INSTANTIATE(double)
THERMOFLUX_INSTANTIATE(Rational)
#undef THERMOFLUX_INSTANTIATE

}  // namespace thermoflux
