// Brute-force ground truth.
//
// The oracle never touches the closed forms in process.hpp. It scales the
// bath so every shell holds a whole number of microstates, picks the
// minimal set of highest-probability microstates carrying 1 - epsilon,
// routes them through explicit current matrices and counts. Smoothing
// optimality is checked by enumerating every subset of levels.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "thermoflux/core.hpp"

namespace thermoflux {

struct OracleLimits {
  std::uint64_t max_microstates = 10'000'000;
  std::size_t max_levels = 12;

  /// Defaults, with THERMOFLUX_MAX_MICROSTATES overriding the microstate cap.
  static OracleLimits from_environment();
};

struct SmoothingParameters {
  Rational epsilon;
  Rational delta;
};

struct Shell {
  std::size_t level;
  Integer microstates;
};

/// A bath-dressed system small enough to count. Shell sizes are
/// g(E - E_i) = G e^{-beta E_i} (initial) and g(E - E_j - w) (final), with
/// G the least scale making every count used by `parameters` integral,
/// times `multiplier`.
struct FiniteModel {
  DiagonalState<Rational> rho;
  ThermalContext<Rational> ctx;
  BathModel<Rational> bath;
  Work<Rational> w;
  std::vector<Shell> initial_shells;
  std::vector<Shell> final_shells;

  Integer degeneracy_scale() const { return bath.reference_degeneracy().get_num(); }
  Integer total_microstates() const;
};

FiniteModel make_finite_model(const DiagonalState<Rational>& rho, const ThermalContext<Rational>& ctx,
                              const Work<Rational>& w, std::span<const SmoothingParameters> parameters,
                              const Integer& multiplier = 1, const OracleLimits& limits = {});

/// Row-major integer counts between two lists of shells.
struct CountMatrix {
  std::vector<std::size_t> row_levels;
  std::vector<std::size_t> col_levels;
  std::vector<Integer> counts;

  const Integer& at(std::size_t r, std::size_t c) const { return counts[r * col_levels.size() + c]; }
  Integer row_sum(std::size_t r) const;
  Integer col_sum(std::size_t c) const;
};

struct OracleOutcome {
  Rational forward;
  Rational reverse;
  Rational ratio;
  /// Microstates carrying the extracted work, and microstates of the
  /// reverse process.
  Integer forward_microstates;
  Integer reverse_microstates;
  CountMatrix forward_currents;
  CountMatrix reverse_currents;
  /// Every occupied cell trades bath entropy for system-plus-battery energy
  /// at the bath's temperature.
  bool energy_balanced = false;
};

/// pForward sums k[i -> j] P(E_i) / g(E - E_i) over the selected
/// microstates. The reverse process starts from the D microstates of the
/// final shells g(E - E_j - W^delta), each weighted like a work-carrying
/// forward microstate; pReverse sums k_rev[j -> i] times that weight.
OracleOutcome oracle_forward_reverse(const FiniteModel& model, const Rational& epsilon, const Rational& delta);

/// Exhaustive minimum of the kept support weight over all level subsets
/// whose removed mass is <= epsilon, as a fraction of Z.
template <Scalar T>
T oracle_smoothing_fraction(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon,
                            const OracleLimits& limits = {});

/// ln of the above: the smoothed divergence in the d0 sign convention.
template <Scalar T>
double oracle_smoothing(const DiagonalState<T>& rho, const ThermalContext<T>& ctx, const T& epsilon,
                        const OracleLimits& limits = {});

// Random instances --------------------------------------------------------

struct InstanceOptions {
  std::size_t min_levels = 1;
  std::size_t max_levels = 6;
  int max_energy = 6;
  unsigned denominator = 64;
};

/// beta = ln(base), integer energies, probabilities k_i / denominator.
struct Instance {
  Rational base;
  std::vector<double> energies;
  std::vector<Rational> probabilities;  // input order
  Rational epsilon;
  Rational delta;
};

/// Uniform integer in [0, n) from the raw engine output, independent of the
/// standard library's distribution implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// base in {2, 3}; epsilon in {0, 1/10, 1/4}; delta in {0, 1/10, 1/2};
/// some probabilities may be zero.
Instance random_instance(std::mt19937_64& rng, const InstanceOptions& options = {});

template <Scalar T>
ThermalContext<T> instance_context(const Instance& instance);
template <Scalar T>
DiagonalState<T> instance_state(const Instance& instance);

enum class WorkChoice { Deterministic, EnergyUnits, Bound };

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  Instance instance;
  Rational work_factor;  // e^{-beta w} used for the fluctuation identity
  WorkChoice work_choice = WorkChoice::EnergyUnits;
  Integer degeneracy_scale;
  OracleOutcome outcome;
  double closed_form_ratio = 0.0;
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// Runs every identity on one instance; `exact == false` evaluates the
/// closed forms in float mode against the exact oracle. Throws
/// ResourceLimit when the instance needs more microstates than allowed.
VerificationReport verify_instance(const Instance& instance, bool exact, std::mt19937_64& rng,
                                   const OracleLimits& limits = {});

}  // namespace thermoflux
