#pragma once

#include "qh/core/error.hpp"
#include "qh/core/scalar.hpp"

namespace qh {

/// Column vector in the projective time plane, e.g. t_ = (t, 1).
template <Scalar S>
struct Vec2 {
  S x{0};
  S y{0};

  friend Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(const S& k, const Vec2& a) { return {k * a.x, k * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

template <Scalar S>
S dot(const Vec2<S>& a, const Vec2<S>& b) {
  return a.x * b.x + a.y * b.y;
}

template <Scalar S>
Vec2<S> time_vec(const S& t) {
  return {t, S(1)};
}

/// Row-major 2x2 matrix [[a, b], [c, d]].
template <Scalar S>
struct Mat2 {
  S a{0};
  S b{0};
  S c{0};
  S d{0};

  static Mat2 identity() { return {S(1), S(0), S(0), S(1)}; }
  /// J = [[0, 1], [-1, 0]]; J^2 = -I, J^T = -J.
  static Mat2 j() { return {S(0), S(1), S(-1), S(0)}; }

  S det() const { return a * d - b * c; }
  S trace() const { return a + d; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 adjugate() const { return {d, -b, -c, a}; }

  Mat2 inverse() const {
    const S dt = det();
    if (is_zero(dt)) raise(ErrorCode::SingularMap, "matrix determinant is zero");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  friend Mat2 operator+(const Mat2& p, const Mat2& q) {
    return {p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d};
  }
  friend Mat2 operator-(const Mat2& p, const Mat2& q) {
    return {p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d};
  }
  friend Mat2 operator*(const S& k, const Mat2& p) { return {k * p.a, k * p.b, k * p.c, k * p.d}; }
  friend Mat2 operator*(const Mat2& p, const Mat2& q) {
    return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d,
            p.c * q.a + p.d * q.c, p.c * q.b + p.d * q.d};
  }
  friend Vec2<S> operator*(const Mat2& p, const Vec2<S>& v) {
    return {p.a * v.x + p.b * v.y, p.c * v.x + p.d * v.y};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

template <Scalar S>
Mat2<S> outer(const Vec2<S>& u, const Vec2<S>& v) {
  return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
}

/// <u, M v>
template <Scalar S>
S bilinear(const Vec2<S>& u, const Mat2<S>& m, const Vec2<S>& v) {
  return dot(u, m * v);
}

template <Scalar S>
bool nearly_equal(const Mat2<S>& p, const Mat2<S>& q) {
  return nearly_equal(p.a, q.a) && nearly_equal(p.b, q.b) && nearly_equal(p.c, q.c) &&
         nearly_equal(p.d, q.d);
}

template <Scalar S>
bool nearly_equal(const Vec2<S>& p, const Vec2<S>& q) {
  return nearly_equal(p.x, q.x) && nearly_equal(p.y, q.y);
}

}  // namespace qh
