// Fixtures shared by the unit tests.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "thermoflux/core.hpp"

namespace thermoflux::fixture {

inline Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

// k / 64, the grid random instances live on.
inline Rational sixty_fourths(std::uint64_t k) {
  Rational r(Integer(std::to_string(k)), Integer(64));
  r.canonicalize();
  return r;
}

template <Scalar T>
T as(long p, long d = 1) {
  return from_rational<T>(q(p, d));
}

template <Scalar T>
ThermalContext<T> context(std::vector<double> energies, long base = 2) {
  return make_thermal_context(EnergySpectrum(std::move(energies)), InverseTemperature<T>::from_log_base(q(base)));
}

template <Scalar T>
DiagonalState<T> state(std::vector<double> energies, std::vector<Rational> probs) {
  std::vector<T> p;
  for (const Rational& r : probs) p.push_back(from_rational<T>(r));
  return DiagonalState<T>::from_input_order(EnergySpectrum(std::move(energies)), p);
}

// E = (0, 1, 2), beta = ln 2, P = (1/2, 3/10, 1/5).
template <Scalar T>
DiagonalState<T> three_level() {
  return state<T>({0, 1, 2}, {q(1, 2), q(3, 10), q(1, 5)});
}

// Pure ground state on E = (0, 1).
template <Scalar T>
DiagonalState<T> pure_ground() {
  return state<T>({0, 1}, {q(1), q(0)});
}

}  // namespace thermoflux::fixture
