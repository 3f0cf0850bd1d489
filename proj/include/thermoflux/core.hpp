// Domain types: spectra, diagonal states, thermal contexts, the exponential
// bath model, work values and the battery.
//
// Units: k_B = 1, so kT = 1/beta. In exact mode the inverse temperature is
// beta = ln(r) for a rational r > 1 and energies are integers; every
// Boltzmann factor e^{-beta E} = r^{-E} is then rational.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "thermoflux/numeric.hpp"

namespace thermoflux {

/// Non-degenerate system levels in ascending energy order. Construction
/// sorts stably, so equal energies keep their input order and each level
/// remembers the index it had in the input.
class EnergySpectrum {
 public:
  explicit EnergySpectrum(std::vector<double> energies);

  std::size_t size() const { return energies_.size(); }
  double energy(std::size_t level) const { return energies_[level]; }
  std::span<const double> energies() const { return energies_; }
  std::size_t original_index(std::size_t level) const { return original_[level]; }
  std::span<const std::size_t> original_indices() const { return original_; }

  bool operator==(const EnergySpectrum&) const = default;

 private:
  std::vector<double> energies_;
  std::vector<std::size_t> original_;
};

/// Occupation probabilities over a spectrum, indexed by sorted level.
/// Subnormalized states are allowed (smoothing produces them).
template <Scalar T>
class DiagonalState {
 public:
  DiagonalState(EnergySpectrum spectrum, std::vector<T> probabilities);

  /// Probabilities given in the spectrum's input order.
  static DiagonalState from_input_order(EnergySpectrum spectrum, std::span<const T> probabilities);

  const EnergySpectrum& spectrum() const { return spectrum_; }
  std::size_t size() const { return probs_.size(); }
  const T& probability(std::size_t level) const { return probs_[level]; }
  std::span<const T> probabilities() const { return probs_; }
  /// Probabilities permuted back to the spectrum's input order.
  std::vector<T> input_order_probabilities() const;

  T total() const;
  /// |total - 1| within the mode tolerance.
  bool physical() const;
  bool in_support(std::size_t level) const { return probs_[level] > 0; }
  std::vector<std::size_t> support() const;

 private:
  EnergySpectrum spectrum_;
  std::vector<T> probs_;
};

/// beta together with its exact representation. Float mode keeps only the
/// real value; exact mode keeps the base r of beta = ln(r).
template <Scalar T>
class InverseTemperature {
 public:
  /// Float mode only.
  static InverseTemperature from_value(double beta);
  /// beta = ln(base), base > 1.
  static InverseTemperature from_log_base(const Rational& base);

  double value() const { return beta_; }
  double kT() const { return 1.0 / beta_; }
  const std::optional<Rational>& log_base() const { return base_; }

  /// e^{-beta * energy}. Exact mode requires an integral energy.
  T boltzmann(double energy) const;

 private:
  InverseTemperature(double beta, std::optional<Rational> base) : beta_(beta), base_(std::move(base)) {}
  double beta_;
  std::optional<Rational> base_;
};

template <Scalar T>
class ThermalContext {
 public:
  ThermalContext(EnergySpectrum spectrum, InverseTemperature<T> beta);

  const EnergySpectrum& spectrum() const { return spectrum_; }
  const InverseTemperature<T>& beta() const { return beta_; }
  std::size_t size() const { return spectrum_.size(); }
  /// e^{-beta E_i} by sorted level.
  const T& boltzmann(std::size_t level) const { return weights_[level]; }
  std::span<const T> boltzmann_weights() const { return weights_; }
  const T& partition_function() const { return z_; }
  const DiagonalState<T>& gibbs() const { return gibbs_; }

 private:
  EnergySpectrum spectrum_;
  InverseTemperature<T> beta_;
  std::vector<T> weights_;
  T z_;
  DiagonalState<T> gibbs_;
};

template <Scalar T>
ThermalContext<T> make_thermal_context(const EnergySpectrum& spectrum, const InverseTemperature<T>& beta) {
  return ThermalContext<T>(spectrum, beta);
}

/// Throws SpectrumMismatch unless the state lives on the context's spectrum.
template <Scalar T>
void require_same_spectrum(const DiagonalState<T>& state, const ThermalContext<T>& ctx);

/// A work value w. Stored through its Boltzmann factor e^{-beta w}, which
/// is what the exact identities consume; `value()` is the real work.
template <Scalar T>
class Work {
 public:
  static Work from_factor(const T& factor, const InverseTemperature<T>& beta);
  /// Exact mode requires an integral w (factor r^{-w}).
  static Work from_value(double w, const InverseTemperature<T>& beta);

  const T& factor() const { return factor_; }
  double value() const { return value_; }

 private:
  Work(T factor, double value) : factor_(std::move(factor)), value_(value) {}
  T factor_;
  double value_;
};

/// Bath whose degeneracies follow g(E - dE) = G e^{-beta dE} exactly: the
/// first-order expansion of the bath entropy with higher orders dropped.
template <Scalar T>
class BathModel {
 public:
  BathModel(InverseTemperature<T> beta, T reference_degeneracy);

  const InverseTemperature<T>& beta() const { return beta_; }
  const T& reference_degeneracy() const { return g_; }

  /// Degeneracy of the bath shell a system offset of `delta_energy` away.
  T degeneracy(double delta_energy) const { return g_ * beta_.boltzmann(delta_energy); }
  /// Same, for an offset given by its Boltzmann factor e^{-beta dE}.
  T degeneracy_for_factor(const T& factor) const { return g_ * factor; }

  BathModel scaled(const T& multiplier) const { return BathModel(beta_, g_ * multiplier); }

 private:
  InverseTemperature<T> beta_;
  T g_;
};

template <Scalar T>
T bath_degeneracy(const BathModel<T>& bath, double delta_energy) {
  return bath.degeneracy(delta_energy);
}

/// Final battery state: weight 1-epsilon on |w>, epsilon on the orthogonal
/// remainder.
template <Scalar T>
class Battery {
 public:
  Battery(Work<T> gap, T epsilon);

  const Work<T>& gap() const { return gap_; }
  const T& epsilon() const { return epsilon_; }
  T success_weight() const { return T(1) - epsilon_; }
  const T& failure_weight() const { return epsilon_; }

 private:
  Work<T> gap_;
  T epsilon_;
};

}  // namespace thermoflux
