#pragma once

#include <cmath>
#include <concepts>
#include <string>

#include <boost/multiprecision/gmp.hpp>

namespace qh {

/// Arbitrary precision rational backed by GMP.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr double tolerance = 1e-12;
  static bool is_zero(double x) { return std::abs(x) <= tolerance; }
  static double to_double(double x) { return x; }
  static double from_ratio(long p, long q) { return static_cast<double>(p) / static_cast<double>(q); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& x) { return x == 0; }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational from_ratio(long p, long q) { return Rational(p, q); }
};

/// A field with exact or tolerance-based zero tests: double or Rational.
template <class S>
concept Scalar = requires(S a, S b) {
  { a + b } -> std::convertible_to<S>;
  { a - b } -> std::convertible_to<S>;
  { a * b } -> std::convertible_to<S>;
  { a / b } -> std::convertible_to<S>;
  { a < b } -> std::convertible_to<bool>;
  { ScalarTraits<S>::is_zero(a) } -> std::convertible_to<bool>;
};

template <Scalar S>
bool is_zero(const S& x) {
  return ScalarTraits<S>::is_zero(x);
}

template <Scalar S>
int sign_of(const S& x) {
  if (is_zero(x)) return 0;
  return x > S(0) ? 1 : -1;
}

template <Scalar S>
bool is_positive(const S& x) {
  return sign_of(x) > 0;
}

template <Scalar S>
bool nearly_equal(const S& a, const S& b) {
  return is_zero(S(a - b));
}

template <Scalar S>
double to_double(const S& x) {
  return ScalarTraits<S>::to_double(x);
}

template <Scalar S>
S ratio(long p, long q = 1) {
  return ScalarTraits<S>::from_ratio(p, q);
}

template <Scalar S>
S square(const S& x) {
  return x * x;
}

}  // namespace qh
