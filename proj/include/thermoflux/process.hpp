// Work extraction: deterministic and epsilon-deterministic work, the
// delta-corrected reverse work, the fluctuation ratio
//
//   P(w, forward_eps) / P(-w, reverse_delta) = exp(beta W^delta + D0^eps),
//   W^delta = w - ln(1 - delta) / beta,
//
// and explicit transition currents between bath-dressed energy shells.
//
// Closed forms work on Boltzmann factors: with s = S/Z from smoothing and
// b = e^{-beta w}, the ratio is s / (b (1 - delta)). Float mode evaluates
// the same quantities through logarithms.
#pragma once

#include <cstddef>
#include <vector>

#include "thermoflux/core.hpp"
#include "thermoflux/divergence.hpp"

namespace thermoflux {

/// w* = -d0 / beta >= 0: the work extracted with certainty, the unique w at
/// which the deterministic ratio exp(beta w + d0) equals one.
template <Scalar T>
Work<T> deterministic_work(const DiagonalState<T>& rho, const ThermalContext<T>& ctx);

/// W^delta = w - ln(1 - delta) / beta.
double w_delta(double w, double delta, double beta);

template <Scalar T>
Work<T> w_delta(const Work<T>& w, const T& delta, const InverseTemperature<T>& beta);

template <Scalar T>
T fluctuation_ratio(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const Work<T>& w, const T& epsilon,
                    const T& delta);

/// 1 - epsilon.
template <Scalar T>
T forward_probability(const T& epsilon);

template <Scalar T>
struct ReverseProbability {
  T value;
  /// value <= 1; otherwise the requested w cannot be paid back.
  bool feasible;
};

/// (1 - epsilon) exp(-beta W^delta - D0^eps).
template <Scalar T>
ReverseProbability<T> reverse_probability(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const Work<T>& w,
                                          const T& epsilon, const T& delta);

/// kT (ln(1 - eps) - D0^eps): the work at which the reverse probability
/// saturates at one.
template <Scalar T>
Work<T> epsilon_work_bound(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

/// Work content of the Gibbs state under delta-smoothing: beta-order the
/// thermal state, strip delta from its tail, read off -d0 / beta. Equals
/// -kT ln(1 - delta).
template <Scalar T>
Work<T> thermal_work_content(const ThermalContext<T>& ctx, const T& delta);

/// Integer (exact mode) counts k[i -> j] of microstates moving from
/// initial shell i to final shell j.
template <Scalar T>
class TransitionCurrentMatrix {
 public:
  TransitionCurrentMatrix(std::vector<std::size_t> rows, std::vector<std::size_t> cols, std::vector<T> row_targets,
                          std::vector<T> col_targets, std::vector<T> entries);

  std::size_t row_count() const { return rows_.size(); }
  std::size_t col_count() const { return cols_.size(); }
  /// Sorted-level index of row r / column c.
  std::size_t row_level(std::size_t r) const { return rows_[r]; }
  std::size_t col_level(std::size_t c) const { return cols_[c]; }
  const T& row_target(std::size_t r) const { return row_targets_[r]; }
  const T& col_target(std::size_t c) const { return col_targets_[c]; }
  const T& at(std::size_t r, std::size_t c) const { return entries_[r * cols_.size() + c]; }

  T row_sum(std::size_t r) const;
  T col_sum(std::size_t c) const;
  /// Both marginal constraints hold (exactly, or within tolerance).
  bool satisfies_marginals() const;

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
  std::vector<T> row_targets_;
  std::vector<T> col_targets_;
  std::vector<T> entries_;
};

/// Northwest-corner rule: a vertex of the transportation polytope with the
/// given marginals. Totals must agree.
template <Scalar T>
TransitionCurrentMatrix<T> northwest_corner(std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                                            std::vector<T> row_targets, std::vector<T> col_targets);

enum class CornerOrder {
  BetaOrder,  // rows and columns in beta-order
  Reversed,   // both reversed, giving a second feasible matrix
};

/// Rows: support of rho with targets g(E - E_i). Columns: every level (the
/// support of the Gibbs state) with targets g(E - E_j - w). Requires equal
/// totals; exact mode further requires integral targets.
template <Scalar T>
TransitionCurrentMatrix<T> build_transition_currents(const DiagonalState<T>& rho, const ThermalContext<T>& ctx,
                                                     const BathModel<T>& bath, const Work<T>& w,
                                                     CornerOrder order = CornerOrder::BetaOrder);

template <Scalar T>
struct WorkOutcome {
  Work<T> work;
  T probability;
};

template <Scalar T>
struct WorkDistribution {
  std::vector<WorkOutcome<T>> outcomes;
  /// Mass that does not lift the battery to any recorded outcome.
  T failure;
  /// P(E_j) = sum_i k[i -> j] P(E_i) / g(E - E_i).
  DiagonalState<T> final_state;

  T total() const;
};

/// Microstates of shell i each carry P(E_i) / g(E - E_i); every one of them
/// that moves stores w in the battery.
template <Scalar T>
WorkDistribution<T> forward_distribution(const TransitionCurrentMatrix<T>& currents, const DiagonalState<T>& rho,
                                         const BathModel<T>& bath, const Work<T>& w);

}  // namespace thermoflux
