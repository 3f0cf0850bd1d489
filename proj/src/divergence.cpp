#include "thermoflux/divergence.hpp"

#include <algorithm>

#include "thermoflux/error.hpp"

namespace thermoflux {

namespace {

template <Scalar T>
void require_epsilon(const DiagonalState<T>& rho, const T& epsilon) {
  require(epsilon >= 0, "epsilon must be non-negative");
  require(epsilon < rho.total(), "epsilon must be smaller than the state's total mass");
}

template <Scalar T>
T support_boltzmann(const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  T sum(0);
  for (std::size_t level : rho.support()) sum += ctx.boltzmann(level);
  return sum;
}

// Depth-first branch and bound over items sorted by Boltzmann weight per
// unit mass (descending). Maximizes removed Boltzmann weight.
template <Scalar T>
class KnapsackSearch {
 public:
  KnapsackSearch(std::vector<std::size_t> levels, std::vector<T> mass, std::vector<T> value, T capacity)
      : levels_(std::move(levels)), mass_(std::move(mass)), value_(std::move(value)), capacity_(std::move(capacity)) {}

  void run() {
    std::vector<bool> taken(levels_.size(), false);
    best_value_ = T(0);
    best_mass_ = T(0);
    best_.assign(levels_.size(), false);
    visit(0, T(0), T(0), taken);
  }

  std::vector<std::size_t> removed_levels() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      if (best_[k]) out.push_back(levels_[k]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  const T& removed_mass() const { return best_mass_; }

 private:
  T fractional_bound(std::size_t k, const T& mass, const T& value) const {
    T room = capacity_ - mass;
    T bound = value;
    for (; k < levels_.size(); ++k) {
      if (mass_[k] <= room) {
        room -= mass_[k];
        bound += value_[k];
      } else {
        bound += value_[k] * room / mass_[k];
        break;
      }
    }
    return bound;
  }

  void visit(std::size_t k, const T& mass, const T& value, std::vector<bool>& taken) {
    if (value > best_value_) {
      best_value_ = value;
      best_mass_ = mass;
      best_ = taken;
    }
    if (k == levels_.size()) return;
    if (!(fractional_bound(k, mass, value) > best_value_)) return;
    if (mass + mass_[k] <= capacity_) {
      taken[k] = true;
      visit(k + 1, T(mass + mass_[k]), T(value + value_[k]), taken);
      taken[k] = false;
    }
    visit(k + 1, mass, value, taken);
  }

  std::vector<std::size_t> levels_;
  std::vector<T> mass_;
  std::vector<T> value_;
  T capacity_;
  T best_value_;
  T best_mass_;
  std::vector<bool> best_;
};

}  // namespace

template <Scalar T>
T support_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  require_same_spectrum(rho, ctx);
  const T kept = support_boltzmann(rho, ctx);
  require(kept > 0, "state has empty support");
  return kept / ctx.partition_function();
}

template <Scalar T>
double d0(const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  return log_of(support_fraction(rho, ctx));
}

template <Scalar T>
double d0_textbook(const DiagonalState<T>& rho, const ThermalContext<T>& ctx) {
  return -d0(rho, ctx);
}

template <Scalar T>
SmoothingResult<T> smooth(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  require_same_spectrum(rho, ctx);
  require_epsilon(rho, epsilon);
  const T tol = tolerance<T>();
  const T target = rho.total() - epsilon;

  BetaOrdering<T> ordering = beta_order(rho, ctx);
  std::vector<T> kept(rho.size(), T(0));
  T mass(0);
  T support_mass(0);
  std::size_t kept_count = 0;
  std::optional<std::size_t> next;
  for (std::size_t level : ordering.order) {
    if (!rho.in_support(level)) continue;
    if (mass + rho.probability(level) <= target + tol) {
      mass += rho.probability(level);
      support_mass += ctx.boltzmann(level);
      kept[level] = rho.probability(level);
      ++kept_count;
    } else {
      next = level;
      break;
    }
  }

  T fraction(0);
  std::optional<std::size_t> boundary;
  // A cut landing exactly on a cumulative boundary keeps nothing of the
  // next level.
  if (next && target - mass > tol) {
    fraction = (target - mass) / rho.probability(*next);
    boundary = next;
    kept[*next] = T(target - mass);
    support_mass += fraction * ctx.boltzmann(*next);
  }

  DiagonalState<T> smoothed(rho.spectrum(), std::move(kept));
  const T removed = rho.total() - smoothed.total();
  return SmoothingResult<T>{std::move(ordering), kept_count,      std::move(fraction),    boundary,
                            removed,             std::move(support_mass), std::move(smoothed)};
}

template <Scalar T>
T smoothed_support_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  const SmoothingResult<T> result = smooth(rho, ctx, epsilon);
  return result.support_mass / ctx.partition_function();
}

template <Scalar T>
double d0_smooth_fractional(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  return log_of(smoothed_support_fraction(rho, ctx, epsilon));
}

template <Scalar T>
LevelRemoval<T> optimal_level_removal(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  require_same_spectrum(rho, ctx);
  require_epsilon(rho, epsilon);

  // Reverse beta-order: most Boltzmann weight per unit of probability first.
  const BetaOrdering<T> ordering = beta_order(rho, ctx);
  std::vector<std::size_t> levels;
  std::vector<T> mass;
  std::vector<T> value;
  for (auto it = ordering.order.rbegin(); it != ordering.order.rend(); ++it) {
    if (!rho.in_support(*it)) continue;
    levels.push_back(*it);
    mass.push_back(rho.probability(*it));
    value.push_back(ctx.boltzmann(*it));
  }
  KnapsackSearch<T> search(std::move(levels), std::move(mass), std::move(value), T(epsilon + tolerance<T>()));
  search.run();

  LevelRemoval<T> out;
  out.removed_levels = search.removed_levels();
  out.removed_mass = search.removed_mass();
  out.kept_boltzmann = T(0);
  for (std::size_t level : rho.support()) {
    if (!std::binary_search(out.removed_levels.begin(), out.removed_levels.end(), level)) {
      out.kept_boltzmann += ctx.boltzmann(level);
    }
  }
  return out;
}

template <Scalar T>
T integral_support_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  return optimal_level_removal(rho, ctx, epsilon).kept_boltzmann / ctx.partition_function();
}

template <Scalar T>
double d0_smooth_integral(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon) {
  return log_of(integral_support_fraction(rho, ctx, epsilon));
}

#define THERMOFLUX_INSTANTIATE(T)                                                                          \
  template T support_fraction(const DiagonalState<T>&, const ThermalContext<T>&);                         \
  template double d0(const DiagonalState<T>&, const ThermalContext<T>&);                                  \
  template double d0_textbook(const DiagonalState<T>&, const ThermalContext<T>&);                         \
  template SmoothingResult<T> smooth(const DiagonalState<T>&, const ThermalContext<T>&, const T&);        \
  template T smoothed_support_fraction(const DiagonalState<T>&, const ThermalContext<T>&, const T&);      \
  template double d0_smooth_fractional(const DiagonalState<T>&, const ThermalContext<T>&, const T&);      \
  template LevelRemoval<T> optimal_level_removal(const DiagonalState<T>&, const ThermalContext<T>&, const T&); \
  template T integral_support_fraction(const DiagonalState<T>&, const ThermalContext<T>&, const T&);      \
  template double d0_smooth_integral(const DiagonalState<T>&, const ThermalContext<T>&, const T&);

THERMOFLUX_INSTANTIATE(double)
THERMOFLUX_INSTANTIATE(Rational)
#undef THERMOFLUX_INSTANTIATE

}  // namespace thermoflux
