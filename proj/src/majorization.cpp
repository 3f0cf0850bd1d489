#include "thermoflux/majorization.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "thermoflux/error.hpp"

namespace thermoflux {

namespace {

template <Scalar T>
bool near_tie(const T& a, const T& b) {
  if constexpr (Arithmetic<T>::exact) {
    return a == b;
  } else {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tolerance<T>() * scale;
  }
}

}  // namespace

template <Scalar T>
BetaOrdering<T> beta_order(const DiagonalState<T>& state, const ThermalContext<T>& ctx) {
  require_same_spectrum(state, ctx);
  const std::size_t n = state.size();
  std::vector<T> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = state.probability(i) / ctx.boltzmann(i);

  // Sorted levels are already in (energy, input index) order, so the level
  // index itself is the tie-break key.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weight[a] != weight[b]) return weight[a] > weight[b];
    return a < b;
  });
  if constexpr (!Arithmetic<T>::exact) {
    std::size_t start = 0;
    while (start < n) {
      std::size_t stop = start + 1;
      while (stop < n && near_tie(weight[order[stop - 1]], weight[order[stop]])) ++stop;
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
      start = stop;
    }
  }

  BetaOrdering<T> out;
  out.order = std::move(order);
  out.rescaled.reserve(n);
  for (std::size_t level : out.order) out.rescaled.push_back(weight[level]);
  return out;
}

template <Scalar T>
MajorizationCurve<T>::MajorizationCurve(std::vector<CurvePoint<T>> points) : points_(std::move(points)) {
  require(!points_.empty(), "curve needs at least the origin");
  for (std::size_t k = 1; k < points_.size(); ++k) {
    require(points_[k].x > points_[k - 1].x, "curve abscissae must increase strictly");
  }
}

template <Scalar T>
T MajorizationCurve<T>::value_at(const T& x) const {
  if (x <= points_.front().x) return points_.front().y;
  if (x >= points_.back().x) return points_.back().y;
  const auto upper = std::upper_bound(points_.begin(), points_.end(), x,
                                      [](const T& v, const CurvePoint<T>& p) { return v < p.x; });
  const CurvePoint<T>& hi = *upper;
  const CurvePoint<T>& lo = *(upper - 1);
  return T(lo.y + (hi.y - lo.y) * (x - lo.x) / (hi.x - lo.x));
}

template <Scalar T>
bool MajorizationCurve<T>::is_concave() const {
  for (std::size_t k = 2; k < points_.size(); ++k) {
    const T left = (points_[k - 1].y - points_[k - 2].y) / (points_[k - 1].x - points_[k - 2].x);
    const T right = (points_[k].y - points_[k - 1].y) / (points_[k].x - points_[k - 1].x);
    if (right > left + tolerance<T>() * (T(1) + left)) return false;
  }
  return true;
}

template <Scalar T>
MajorizationCurve<T> majorization_curve(const DiagonalState<T>& state, const ThermalContext<T>& ctx) {
  const BetaOrdering<T> ordering = beta_order(state, ctx);
  std::vector<CurvePoint<T>> points;
  points.reserve(state.size() + 1);
  points.push_back({T(0), T(0)});
  for (std::size_t level : ordering.order) {
    const CurvePoint<T>& last = points.back();
    points.push_back({T(last.x + ctx.boltzmann(level)), T(last.y + state.probability(level))});
  }
  return MajorizationCurve<T>(std::move(points));
}

template <Scalar T>
bool thermo_majorizes(const DiagonalState<T>& a, const DiagonalState<T>& b, const ThermalContext<T>& ctx) {
  require(a.physical() && b.physical(), "thermo-majorization compares normalized states only");
  const MajorizationCurve<T> ca = majorization_curve(a, ctx);
  const MajorizationCurve<T> cb = majorization_curve(b, ctx);
  std::vector<T> xs;
  for (const auto& p : ca.points()) xs.push_back(p.x);
  for (const auto& p : cb.points()) xs.push_back(p.x);
  return std::all_of(xs.begin(), xs.end(),
                     [&](const T& x) { return ca.value_at(x) >= cb.value_at(x) - tolerance<T>(); });
}

template <Scalar T>
std::string staircase_svg(const DiagonalState<T>& state, const ThermalContext<T>& ctx) {
  const BetaOrdering<T> ordering = beta_order(state, ctx);
  const MajorizationCurve<T> curve = majorization_curve(state, ctx);
  constexpr double width = 640.0;
  constexpr double height = 400.0;
  constexpr double margin = 40.0;
  const double z = to_double(ctx.partition_function());
  double top = 0.0;
  for (const T& r : ordering.rescaled) top = std::max(top, to_double(r));
  if (top <= 0.0) top = 1.0;
  const double sx = (width - 2 * margin) / z;
  const double sy = (height - 2 * margin) / top;

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")" << height << R"(">)"
      << '\n';
  svg << R"(<rect x="0" y="0" width=")" << width << R"(" height=")" << height << R"(" fill="white"/>)" << '\n';
  double x = 0.0;
  for (std::size_t k = 0; k < ordering.order.size(); ++k) {
    const std::size_t level = ordering.order[k];
    const double w = to_double(ctx.boltzmann(level));
    const double h = to_double(ordering.rescaled[k]);
    svg << R"(<rect x=")" << format_scalar(margin + x * sx) << R"(" y=")"
        << format_scalar(height - margin - h * sy) << R"(" width=")" << format_scalar(w * sx) << R"(" height=")"
        << format_scalar(h * sy) << R"(" fill="#9ecae1" stroke="#3182bd"><title>E=)"
        << format_scalar(state.spectrum().energy(level)) << "</title></rect>\n";
    x += w;
  }
  // Curve drawn against its own unit y axis.
  const double cy = height - 2 * margin;
  svg << R"(<polyline fill="none" stroke="#e6550d" stroke-width="2" points=")";
  for (const auto& p : curve.points()) {
    svg << format_scalar(margin + to_double(p.x) * sx) << ',' << format_scalar(height - margin - to_double(p.y) * cy)
        << ' ';
  }
  svg << "\"/>\n";
  svg << R"(<line x1=")" << margin << R"(" y1=")" << height - margin << R"(" x2=")" << width - margin << R"(" y2=")"
      << height - margin << R"(" stroke="black"/>)" << '\n';
  svg << "</svg>\n";
  return svg.str();
}

#define THERMOFLUX_INSTANTIATE(T)                                                                   \
  template BetaOrdering<T> beta_order(const DiagonalState<T>&, const ThermalContext<T>&);          \
  template class MajorizationCurve<T>;                                                              \
  template MajorizationCurve<T> majorization_curve(const DiagonalState<T>&, const ThermalContext<T>&); \
  template bool thermo_majorizes(const DiagonalState<T>&, const DiagonalState<T>&, const ThermalContext<T>&); \
  template std::string staircase_svg(const DiagonalState<T>&, const ThermalContext<T>&);

THERMOFLUX_INSTANTIATE(double)
THERMOFLUX_INSTANTIATE(Rational)
#undef THERMOFLUX_INSTANTIATE

}  // namespace thermoflux
