// Beta-ordering and thermo-majorization curves.
//
// Levels are ranked by their Gibbs-rescaled weight P(E_i) e^{beta E_i},
// largest first. The curve accumulates Boltzmann weight on the x axis and
// probability on the y axis in that order; state a can be turned into b by
// thermal operations iff a's curve lies nowhere below b's.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "thermoflux/core.hpp"

namespace thermoflux {

template <Scalar T>
struct BetaOrdering {
  /// Sorted-level indices, highest rescaled weight first.
  std::vector<std::size_t> order;
  /// P(E_i) e^{beta E_i} along `order`; non-increasing.
  std::vector<T> rescaled;
};

/// Ties (equal rescaled weight) go to the lower energy, then the lower
/// input index. In float mode, neighbours within the mode tolerance
/// (relative) count as tied.
template <Scalar T>
BetaOrdering<T> beta_order(const DiagonalState<T>& state, const ThermalContext<T>& ctx);

template <Scalar T>
struct CurvePoint {
  T x;
  T y;
};

template <Scalar T>
class MajorizationCurve {
 public:
  explicit MajorizationCurve(std::vector<CurvePoint<T>> points);

  /// Starts at (0, 0); one point per level.
  const std::vector<CurvePoint<T>>& points() const { return points_; }
  const CurvePoint<T>& end() const { return points_.back(); }

  /// Piecewise-linear interpolation; flat past the last breakpoint.
  T value_at(const T& x) const;

  /// Slopes non-increasing (within the mode tolerance).
  bool is_concave() const;

 private:
  std::vector<CurvePoint<T>> points_;
};

template <Scalar T>
MajorizationCurve<T> majorization_curve(const DiagonalState<T>& state, const ThermalContext<T>& ctx);

/// True iff curve(a) >= curve(b) - tol everywhere on [0, Z]. Checking the
/// union of both breakpoint sets suffices for piecewise-linear curves.
template <Scalar T>
bool thermo_majorizes(const DiagonalState<T>& a, const DiagonalState<T>& b, const ThermalContext<T>& ctx);

/// Staircase picture: one rectangle per level in beta-order, width
/// e^{-beta E_i} and height P(E_i) e^{beta E_i}, with the curve on top.
template <Scalar T>
std::string staircase_svg(const DiagonalState<T>& state, const ThermalContext<T>& ctx);

}  // namespace thermoflux
