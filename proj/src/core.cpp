#include "thermoflux/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoflux/error.hpp"

namespace thermoflux {

EnergySpectrum::EnergySpectrum(std::vector<double> energies) {
  require(!energies.empty(), "energy spectrum is empty");
  for (double e : energies) require(std::isfinite(e), "energy spectrum contains a non-finite level");
  original_.resize(energies.size());
  std::iota(original_.begin(), original_.end(), std::size_t{0});
  std::stable_sort(original_.begin(), original_.end(),
                   [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
  energies_.reserve(energies.size());
  for (std::size_t i : original_) energies_.push_back(energies[i]);
}

template <Scalar T>
DiagonalState<T>::DiagonalState(EnergySpectrum spectrum, std::vector<T> probabilities)
    : spectrum_(std::move(spectrum)), probs_(std::move(probabilities)) {
  require(probs_.size() == spectrum_.size(), "probability count " + std::to_string(probs_.size()) +
                                                 " does not match " + std::to_string(spectrum_.size()) + " levels");
  for (const T& p : probs_) require(p >= 0, "negative probability");
  require(total() <= T(1) + tolerance<T>(), "probabilities sum to more than one");
}

template <Scalar T>
DiagonalState<T> DiagonalState<T>::from_input_order(EnergySpectrum spectrum, std::span<const T> probabilities) {
  require(probabilities.size() == spectrum.size(), "probability count does not match the spectrum");
  std::vector<T> sorted;
  sorted.reserve(probabilities.size());
  for (std::size_t level = 0; level < spectrum.size(); ++level) {
    sorted.push_back(probabilities[spectrum.original_index(level)]);
  }
  return DiagonalState(std::move(spectrum), std::move(sorted));
}

template <Scalar T>
std::vector<T> DiagonalState<T>::input_order_probabilities() const {
  std::vector<T> out(probs_.size());
  for (std::size_t level = 0; level < probs_.size(); ++level) out[spectrum_.original_index(level)] = probs_[level];
  return out;
}

template <Scalar T>
T DiagonalState<T>::total() const {
  T sum(0);
  for (const T& p : probs_) sum += p;
  return sum;
}

template <Scalar T>
bool DiagonalState<T>::physical() const {
  const T deviation = total() - T(1);
  return deviation <= tolerance<T>() && -deviation <= tolerance<T>();
}

template <Scalar T>
std::vector<std::size_t> DiagonalState<T>::support() const {
  std::vector<std::size_t> out;
  for (std::size_t level = 0; level < probs_.size(); ++level) {
    if (in_support(level)) out.push_back(level);
  }
  return out;
}

template <Scalar T>
InverseTemperature<T> InverseTemperature<T>::from_value(double beta) {
  require(std::isfinite(beta) && beta > 0.0, "inverse temperature must be positive");
  if constexpr (Arithmetic<T>::exact) {
    fail(ErrorKind::InvalidInput, "exact mode needs beta = ln(p/q), not a bare number");
  } else {
    return InverseTemperature(beta, std::nullopt);
  }
}

template <Scalar T>
InverseTemperature<T> InverseTemperature<T>::from_log_base(const Rational& base) {
  require(base > 1, "beta = ln(r) needs r > 1 for a positive inverse temperature");
  return InverseTemperature(log_of(base), base);
}

template <Scalar T>
T InverseTemperature<T>::boltzmann(double energy) const {
  if constexpr (Arithmetic<T>::exact) {
    require(std::nearbyint(energy) == energy && std::abs(energy) < 1e9,
            "exact mode requires integral energies, got " + format_scalar(energy));
    return pow_int(*base_, -static_cast<long>(energy));
  } else {
    return std::exp(-beta_ * energy);
  }
}

template <Scalar T>
ThermalContext<T>::ThermalContext(EnergySpectrum spectrum, InverseTemperature<T> beta)
    : spectrum_(std::move(spectrum)),
      beta_(std::move(beta)),
      weights_([&] {
        std::vector<T> w;
        w.reserve(spectrum_.size());
        for (double e : spectrum_.energies()) w.push_back(beta_.boltzmann(e));
        return w;
      }()),
      z_([&] {
        T z(0);
        for (const T& w : weights_) z += w;
        return z;
      }()),
      gibbs_([&] {
        require(z_ > 0, "partition function underflowed to zero");
        std::vector<T> p;
        p.reserve(weights_.size());
        for (const T& w : weights_) p.push_back(T(w / z_));
        return DiagonalState<T>(spectrum_, std::move(p));
      }()) {}

template <Scalar T>
void require_same_spectrum(const DiagonalState<T>& state, const ThermalContext<T>& ctx) {
  if (!(state.spectrum() == ctx.spectrum())) {
    fail(ErrorKind::SpectrumMismatch, "state and thermal context use different spectra");
  }
}

template <Scalar T>
Work<T> Work<T>::from_factor(const T& factor, const InverseTemperature<T>& beta) {
  require(factor > 0, "work Boltzmann factor must be positive");
  return Work(factor, -log_of(factor) / beta.value());
}

template <Scalar T>
Work<T> Work<T>::from_value(double w, const InverseTemperature<T>& beta) {
  require(std::isfinite(w), "work must be finite");
  return Work(beta.boltzmann(w), w);
}

template <Scalar T>
BathModel<T>::BathModel(InverseTemperature<T> beta, T reference_degeneracy)
    : beta_(std::move(beta)), g_(std::move(reference_degeneracy)) {
  require(g_ > 0, "reference degeneracy must be positive");
}

template <Scalar T>
Battery<T>::Battery(Work<T> gap, T epsilon) : gap_(std::move(gap)), epsilon_(std::move(epsilon)) {
  require(epsilon_ >= 0 && epsilon_ < 1, "battery failure probability must lie in [0, 1)");
  require(gap_.value() >= -1e-12, "battery gap must be non-negative");
}

template class DiagonalState<double>;
template class DiagonalState<Rational>;
template class InverseTemperature<double>;
template class InverseTemperature<Rational>;
template class ThermalContext<double>;
template class ThermalContext<Rational>;
template class Work<double>;
template class Work<Rational>;
template class BathModel<double>;
template class BathModel<Rational>;
template class Battery<double>;
template class Battery<Rational>;
template void require_same_spectrum(const DiagonalState<double>&, const ThermalContext<double>&);
template void require_same_spectrum(const DiagonalState<Rational>&, const ThermalContext<Rational>&);

}  // namespace thermoflux
