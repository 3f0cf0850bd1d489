// Renyi-0 relative entropy against the Gibbs state, and its smoothed forms.
//
// Sign convention: `d0` is ln(sum_{i in supp rho} e^{-beta E_i}) - ln Z,
// which is <= 0. This is the sign under which the work identities read
// P(w)/P(-w) = exp(beta w + d0). The non-negative -ln Tr[rho^0 tau] is
// `d0_textbook`.
//
// Each log-valued function has a companion returning the exponentiated
// quantity in the scalar type, so exact mode never leaves the rationals.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "thermoflux/core.hpp"
#include "thermoflux/majorization.hpp"

namespace thermoflux {

/// sum_{supp rho} e^{-beta E_i} / Z, i.e. exp(d0).
template <Scalar T>
T support_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx);

template <Scalar T>
double d0(const DiagonalState<T>& rho, const ThermalContext<T>& ctx);

template <Scalar T>
double d0_textbook(const DiagonalState<T>& rho, const ThermalContext<T>& ctx);

/// Removal of an epsilon weight from the low-weight end of the beta-ordered
/// support. Whole levels are dropped while the kept mass stays >= total-eps;
/// the boundary level keeps the fraction needed to land exactly on it.
template <Scalar T>
struct SmoothingResult {
  BetaOrdering<T> ordering;
  /// Number of support levels (in beta-order) kept whole.
  std::size_t kept_count = 0;
  /// Retained fraction of the boundary level, in [0, 1).
  T fraction;
  /// Sorted-level index of the boundary level, when fraction > 0.
  std::optional<std::size_t> boundary_level;
  T removed_weight;
  /// S = sum of kept e^{-beta E} + fraction * boundary e^{-beta E}.
  T support_mass;
  DiagonalState<T> smoothed_state;
};

template <Scalar T>
SmoothingResult<T> smooth(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

/// S / Z with S from `smooth`.
template <Scalar T>
T smoothed_support_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

/// ln(S / Z): the smoothed divergence that enters the fluctuation ratio.
template <Scalar T>
double d0_smooth_fractional(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

/// Best whole-level removal: the set of support levels of largest total
/// Boltzmann weight whose probability mass fits in epsilon.
template <Scalar T>
struct LevelRemoval {
  std::vector<std::size_t> removed_levels;  // ascending sorted-level indices
  T removed_mass;
  T kept_boltzmann;  // sum of e^{-beta E} over the kept support
};

/// Exact 0/1 knapsack by depth-first branch and bound; the bound at each
/// node is the fractional (LP) removal, which is the beta-order greedy.
template <Scalar T>
LevelRemoval<T> optimal_level_removal(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

/// kept_boltzmann / Z of the optimal whole-level removal.
template <Scalar T>
T integral_support_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

/// Extremum of the divergence over states reachable by zeroing whole levels
/// with removed mass <= epsilon, reported in the d0 sign convention.
template <Scalar T>
double d0_smooth_integral(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon);

}  // namespace thermoflux
