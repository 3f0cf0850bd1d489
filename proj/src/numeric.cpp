#include "thermoflux/numeric.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "thermoflux/error.hpp"

namespace thermoflux {

namespace {

double log_of_positive_integer(const Integer& z) {
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, z.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Rational parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string digits;
  long scale = 0;
  bool seen_point = false;
  bool any_digit = false;
  std::size_t i = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  require(any_digit, "not a number: '" + std::string(s) + "'");
  if (i < s.size()) {
    require(s[i] == 'e' || s[i] == 'E', "not a number: '" + std::string(s) + "'");
    long exponent = 0;
    std::string_view rest = s.substr(i + 1);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
    require(ec == std::errc() && ptr == rest.data() + rest.size() && !rest.empty(),
            "bad exponent in '" + std::string(s) + "'");
    scale += exponent;
  }
  Rational value(Integer(digits, 10));
  value *= pow_int(Rational(10), scale);
  if (negative) value = -value;
  value.canonicalize();
  return value;
}

}  // namespace

double to_double(const Rational& v) {
  if (sgn(v) == 0) return 0.0;
  // mpq_get_d truncates; go through logs only when the parts overflow.
  const double direct = v.get_d();
  if (std::isfinite(direct) && direct != 0.0) return direct;
  const double magnitude = std::exp(log_of(Rational(abs(v))));
  return sgn(v) < 0 ? -magnitude : magnitude;
}

double log_of(double v) {
  require(v > 0.0, "logarithm of a non-positive value");
  return std::log(v);
}

double log_of(const Rational& v) {
  require(sgn(v) > 0, "logarithm of a non-positive value");
  const double direct = v.get_d();
  if (std::isnormal(direct)) return std::log(direct);
  return log_of_positive_integer(v.get_num()) - log_of_positive_integer(v.get_den());
}

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  require(!s.empty(), "empty number");
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  const Rational num = parse_decimal(trim(s.substr(0, slash)));
  const Rational den = parse_decimal(trim(s.substr(slash + 1)));
  require(sgn(den) != 0, "zero denominator in '" + std::string(s) + "'");
  Rational out = num / den;
  out.canonicalize();
  return out;
}

Rational rational_from_decimal(double value) {
  require(std::isfinite(value), "non-finite number");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  require(ec == std::errc(), "cannot format number");
  return parse_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

Rational pow_int(const Rational& base, long exponent) {
  if (exponent == 0) return Rational(1);
  require(sgn(base) != 0 || exponent > 0, "zero to a negative power");
  const unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  Integer num;
  Integer den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational out = exponent > 0 ? Rational(num, den) : Rational(den, num);
  out.canonicalize();
  return out;
}

Integer common_denominator(const Integer& acc, const Rational& r) {
  Integer out;
  mpz_lcm(out.get_mpz_t(), acc.get_mpz_t(), r.get_den_mpz_t());
  return out;
}

Rational best_rational_approximation(double value, unsigned long max_denominator) {
  require(std::isfinite(value), "non-finite number");
  require(max_denominator >= 1, "denominator bound must be positive");
  const Rational x(value);
  // Convergents h/k of the continued fraction of x.
  Integer h_prev = 0, h = 1, k_prev = 1, k = 0;
  Rational rest = x;
  const Integer bound(max_denominator);
  for (int iter = 0; iter < 128; ++iter) {
    Integer a;
    mpz_fdiv_q(a.get_mpz_t(), rest.get_num_mpz_t(), rest.get_den_mpz_t());
    const Integer h_next = a * h + h_prev;
    const Integer k_next = a * k + k_prev;
    if (iter > 0 && k_next > bound) {
      // Largest admissible semiconvergent competes with the last convergent.
      const Integer t = (bound - k_prev) / k;
      const Rational semi(Integer(t * h + h_prev), Integer(t * k + k_prev));
      const Rational conv(h, k);
      Rational out = abs(Rational(semi - x)) < abs(Rational(conv - x)) ? semi : conv;
      out.canonicalize();
      return out;
    }
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    const Rational frac = rest - Rational(a);
    if (sgn(frac) == 0) break;
    rest = 1 / frac;
  }
  Rational out(h, k);
  out.canonicalize();
  return out;
}

std::string format_scalar(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string format_scalar(const Rational& v) { return v.get_str(); }

double round15(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_scalar(v).c_str(), nullptr);
}

}  // namespace thermoflux
