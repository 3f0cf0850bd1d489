// Arithmetic modes.
//
// Every quantity in the library is computed in one of two scalar types:
// `Rational` (GMP rationals, exact mode) or `double` (float mode). The
// templates in the other headers are explicitly instantiated for both.
#pragma once

#include <gmpxx.h>

#include <concepts>
#include <string>
#include <string_view>

namespace thermoflux {

using Rational = mpq_class;
using Integer = mpz_class;

template <class T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

template <Scalar T>
struct Arithmetic;

template <>
struct Arithmetic<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";
  static double tolerance() { return 1e-12; }
};

template <>
struct Arithmetic<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";
  static Rational tolerance() { return Rational(0); }
};

template <Scalar T>
T tolerance() {
  return Arithmetic<T>::tolerance();
}

inline double to_double(double v) { return v; }
double to_double(const Rational& v);

/// Natural logarithm; arguments must be positive. Rationals with huge
/// numerators or denominators are handled without overflowing a double.
double log_of(double v);
double log_of(const Rational& v);

template <Scalar T>
T from_rational(const Rational& r) {
  if constexpr (std::same_as<T, double>) {
    return to_double(r);
  } else {
    return r;
  }
}

/// Parses "p/q", an integer, or a plain decimal ("0.125", "1e-3") exactly.
Rational parse_rational(std::string_view text);

/// Exact rational value of a finite double via its shortest round-trip
/// decimal form, so 0.3 becomes 3/10 rather than the binary expansion.
Rational rational_from_decimal(double value);

/// r^e for integer e (negative allowed).
Rational pow_int(const Rational& base, long exponent);

/// Smallest positive integer m with m*r integral for every r in the list.
Integer common_denominator(const Integer& acc, const Rational& r);

/// Best rational approximation with denominator at most `max_denominator`
/// (continued fractions).
Rational best_rational_approximation(double value, unsigned long max_denominator);

/// Float: 15 significant digits. Exact: "p/q" or "p" for integers.
std::string format_scalar(double v);
std::string format_scalar(const Rational& v);

/// Rounds to 15 significant digits so that shortest-form printers emit at
/// most that many.
double round15(double v);

}  // namespace thermoflux
