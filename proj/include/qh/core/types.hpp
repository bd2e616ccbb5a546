#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "qh/core/linalg2.hpp"

namespace qh {

/// Parameters (eta, theta; sigma, tau; gamma) of a standardized quadratic
/// harness: mean zero, covariance min(s, t), conditional variance
/// F_{t,s,u} K(Delta, Delta~).
template <Scalar S>
struct QHParams {
  S eta{0};
  S theta{0};
  S sigma{0};
  S tau{0};
  S gamma{1};
  /// Asserts the (0, inf) regime: sigma, tau >= 0 and gamma <= 1 + 2 sqrt(sigma tau).
  bool standard_infinite_horizon = false;

  /// Throws InvalidParams when gamma < -1 or the infinite-horizon constraints fail.
  void validate() const {
    const S shifted = gamma + S(1);
    if (shifted < S(0) && !is_zero(shifted)) raise(ErrorCode::InvalidParams, "gamma < -1");
    if (standard_infinite_horizon && !satisfies_infinite_horizon()) {
      raise(ErrorCode::InvalidParams, "infinite-horizon constraints violated");
    }
  }

  bool satisfies_infinite_horizon() const {
    if (sigma < S(0) && !is_zero(sigma)) return false;
    if (tau < S(0) && !is_zero(tau)) return false;
    const S g1 = gamma - S(1);
    if (g1 <= S(0)) return true;
    // gamma - 1 <= 2 sqrt(sigma tau)  <=>  (gamma - 1)^2 <= 4 sigma tau
    const S excess = g1 * g1 - S(4) * sigma * tau;
    return excess <= S(0) || is_zero(excess);
  }

  friend bool operator==(const QHParams& p, const QHParams& q) {
    return p.eta == q.eta && p.theta == q.theta && p.sigma == q.sigma && p.tau == q.tau &&
           p.gamma == q.gamma;
  }
};

template <Scalar S>
bool nearly_equal(const QHParams<S>& p, const QHParams<S>& q) {
  return nearly_equal(p.eta, q.eta) && nearly_equal(p.theta, q.theta) &&
         nearly_equal(p.sigma, q.sigma) && nearly_equal(p.tau, q.tau) &&
         nearly_equal(p.gamma, q.gamma);
}

/// (Delta, Delta~) = ((x_u - x_s)/(u - s), (u x_s - s x_u)/(u - s)).
template <Scalar S>
struct DeltaPair {
  S slope{0};
  S pivot{0};

  static DeltaPair from_values(const S& s, const S& u, const S& x_s, const S& x_u) {
    const S span = u - s;
    if (is_zero(span)) raise(ErrorCode::ZeroDenominator, "Delta needs s != u");
    return {(x_u - x_s) / span, (u * x_s - s * x_u) / span};
  }

  Vec2<S> vec() const { return {slope, pivot}; }
};

/// E(X_t) = slope * t + intercept; as a vector mu_ = (slope, intercept).
template <Scalar S>
struct MeanLine {
  S slope{0};
  S intercept{0};

  Vec2<S> vec() const { return {slope, intercept}; }
  static MeanLine from_vec(const Vec2<S>& v) { return {v.x, v.y}; }
  S at(const S& t) const { return slope * t + intercept; }
  friend bool operator==(const MeanLine&, const MeanLine&) = default;
};

/// Cov(X_s, X_t) = <s_, Sigma t_> for s <= t with Sigma = [[c0, c1], [c2, c3]].
template <Scalar S>
struct CovMatrix {
  S c0{0};
  S c1{1};
  S c2{0};
  S c3{0};

  /// (eps s + delta)(phi t + psi), s <= t.
  static CovMatrix from_product(const S& eps, const S& delta, const S& phi, const S& psi) {
    return {eps * phi, eps * psi, delta * phi, delta * psi};
  }
  static CovMatrix from_matrix(const Mat2<S>& m) { return {m.a, m.b, m.c, m.d}; }

  Mat2<S> matrix() const { return {c0, c1, c2, c3}; }
  bool nondegenerate() const { return c1 > c2 && !is_zero(S(c1 - c2)); }

  S at(const S& s, const S& t) const {
    const S& lo = s < t ? s : t;
    const S& hi = s < t ? t : s;
    return c0 * lo * hi + c1 * lo + c2 * hi + c3;
  }
  friend bool operator==(const CovMatrix&, const CovMatrix&) = default;
};

/// K(Delta_) = chi + <lin, Delta_> + <Delta_, quad Delta_> with lin = (theta, eta)
/// paired with (Delta, Delta~) and quad = [[tau, g12], [g21, sigma]].
template <Scalar S>
struct VarianceForm {
  S chi{1};
  Vec2<S> lin{};
  Mat2<S> quad{};

  /// Full coefficient of Delta * Delta~.
  S rho() const { return quad.b + quad.c; }
  S theta() const { return lin.x; }
  S eta() const { return lin.y; }
  S tau() const { return quad.a; }
  S sigma() const { return quad.d; }

  S eval(const Vec2<S>& x) const { return chi + dot(lin, x) + bilinear(x, quad, x); }
  S eval(const DeltaPair<S>& d) const { return eval(d.vec()); }

  friend bool operator==(const VarianceForm&, const VarianceForm&) = default;
};

/// Interval endpoint on the extended real line.
template <Scalar S>
struct Endpoint {
  S value{0};
  int infinite = 0;  // -1: -inf, +1: +inf, 0: finite

  static Endpoint finite(const S& v) { return {v, 0}; }
  static Endpoint pos_inf() { return {S(0), 1}; }
  static Endpoint neg_inf() { return {S(0), -1}; }
  bool is_finite() const { return infinite == 0; }

  friend bool operator==(const Endpoint& p, const Endpoint& q) {
    if (p.infinite != q.infinite) return false;
    return p.infinite != 0 || p.value == q.value;
  }
};

template <Scalar S>
bool nearly_equal(const Endpoint<S>& p, const Endpoint<S>& q) {
  if (p.infinite != q.infinite) return false;
  return p.infinite != 0 || nearly_equal(p.value, q.value);
}

/// Open interval (lo, hi).
template <Scalar S>
struct Interval {
  Endpoint<S> lo = Endpoint<S>::finite(S(0));
  Endpoint<S> hi = Endpoint<S>::pos_inf();

  static Interval positive_half_line() { return {}; }
  static Interval finite(const S& a, const S& b) {
    return {Endpoint<S>::finite(a), Endpoint<S>::finite(b)};
  }

  /// Strict interior membership.
  bool contains(const S& x) const {
    const bool above = lo.infinite == -1 || (lo.is_finite() && lo.value < x && !nearly_equal(lo.value, x));
    const bool below = hi.infinite == 1 || (hi.is_finite() && x < hi.value && !nearly_equal(hi.value, x));
    return above && below;
  }

  /// Some point strictly inside.
  S interior_point() const {
    if (lo.is_finite() && hi.is_finite()) return (lo.value + hi.value) / S(2);
    if (lo.is_finite()) return lo.value + S(1);
    if (hi.is_finite()) return hi.value - S(1);
    return S(0);
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

template <Scalar S>
bool nearly_equal(const Interval<S>& p, const Interval<S>& q) {
  return nearly_equal(p.lo, q.lo) && nearly_equal(p.hi, q.hi);
}

/// Mean line, covariance, conditional-variance form and time interval of a
/// harness with quadratic conditional variance.
template <Scalar S>
struct HarnessSpec {
  MeanLine<S> mean{};
  CovMatrix<S> cov{};
  VarianceForm<S> var_form{};
  Interval<S> interval{};

  /// chi + <theta_, mu_> + <mu_, Gamma mu_> + tr(Gamma Sigma^T); zero when normalized.
  S consistency_residual() const {
    const Vec2<S> mu = mean.vec();
    const Mat2<S>& g = var_form.quad;
    const Mat2<S> sig = cov.matrix();
    const S trace_term = g.a * sig.a + g.b * sig.b + g.c * sig.c + g.d * sig.d;
    return var_form.chi + dot(var_form.lin, mu) + bilinear(mu, g, mu) + trace_term;
  }
  bool normalized() const { return is_zero(consistency_residual()); }

  /// <s_, J^T Gamma J u_>
  S variance_denominator(const S& s, const S& u) const {
    const Mat2<S> j = Mat2<S>::j();
    return bilinear(time_vec(s), j.transpose() * var_form.quad * j, time_vec(u));
  }

  friend bool operator==(const HarnessSpec&, const HarnessSpec&) = default;
};

template <Scalar S>
bool nearly_equal(const HarnessSpec<S>& p, const HarnessSpec<S>& q) {
  return nearly_equal(p.mean.vec(), q.mean.vec()) && nearly_equal(p.cov.matrix(), q.cov.matrix()) &&
         nearly_equal(p.var_form.chi, q.var_form.chi) && nearly_equal(p.var_form.lin, q.var_form.lin) &&
         nearly_equal(p.var_form.quad, q.var_form.quad) && nearly_equal(p.interval, q.interval);
}

/// f(x, y) = [x, y] A + [m1, m2] with A = [[a, b], [c, d]]; acts on processes by
/// X^f_t = (c t + d) X_{phi(t)} + m1 t + m2 with phi(t) = (a t + b)/(c t + d).
template <Scalar S>
struct AffineMap {
  S a{1};
  S b{0};
  S c{0};
  S d{1};
  S m1{0};
  S m2{0};

  static AffineMap identity() { return {}; }
  static AffineMap from(const Mat2<S>& m, const Vec2<S>& shift) {
    return {m.a, m.b, m.c, m.d, shift.x, shift.y};
  }

  Mat2<S> matrix() const { return {a, b, c, d}; }
  Vec2<S> shift() const { return {m1, m2}; }
  S det() const { return a * d - b * c; }

  S mobius(const S& t) const {
    const S den = c * t + d;
    if (is_zero(den)) raise(ErrorCode::ZeroDenominator, "Mobius pole");
    return (a * t + b) / den;
  }
  S space_scale(const S& t) const { return c * t + d; }
  S apply(const S& t, const S& x_at_mobius) const { return (c * t + d) * x_at_mobius + m1 * t + m2; }

  /// The map g o f: (X^f)^g = X^{g o f}. Matrix A_f A_g, shift A_g^T m_f + m_g.
  static AffineMap compose(const AffineMap& first, const AffineMap& second) {
    const Mat2<S> m = first.matrix() * second.matrix();
    const Vec2<S> sh = second.matrix().transpose() * first.shift() + second.shift();
    return from(m, sh);
  }

  AffineMap inverse() const {
    const Mat2<S> inv = matrix().inverse();
    return from(inv, -(inv.transpose() * shift()));
  }

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

template <Scalar S>
bool nearly_equal(const AffineMap<S>& p, const AffineMap<S>& q) {
  return nearly_equal(p.matrix(), q.matrix()) && nearly_equal(p.shift(), q.shift());
}

/// Endpoint data of a two-sided conditioning on (R, V).
template <Scalar S>
struct BridgeData {
  S R{0};
  S V{1};
  S z_R{0};
  S z_V{0};
  S slope{0};  // Delta_RV
  S pivot{0};  // Delta~_RV
  S denom{1};  // V(1 + R sigma) + tau - R gamma
  S K{1};      // K(Delta_RV, Delta~_RV)
  S M_sq{1};   // K / denom

  double M() const { return std::sqrt(to_double(M_sq)); }
};

/// Radical-free description of conditioned parameters: sigma, tau, gamma
/// exactly, and theta, eta through their squares, product and signs.
template <Scalar S>
struct SquaredQH {
  S sigma{0};
  S tau{0};
  S gamma{1};
  S theta_sq{0};
  S eta_sq{0};
  S theta_eta{0};
  int theta_sign = 0;
  int eta_sign = 0;

  static SquaredQH from_params(const QHParams<S>& p) {
    return {p.sigma, p.tau, p.gamma, p.theta * p.theta, p.eta * p.eta, p.theta * p.eta,
            sign_of(p.theta), sign_of(p.eta)};
  }

  /// Float resolution of the square roots.
  QHParams<double> resolve() const {
    QHParams<double> p;
    p.sigma = to_double(sigma);
    p.tau = to_double(tau);
    p.gamma = to_double(gamma);
    p.theta = theta_sign * std::sqrt(std::max(0.0, to_double(theta_sq)));
    p.eta = eta_sign * std::sqrt(std::max(0.0, to_double(eta_sq)));
    return p;
  }

  friend bool operator==(const SquaredQH&, const SquaredQH&) = default;
};

template <Scalar S>
bool nearly_equal(const SquaredQH<S>& p, const SquaredQH<S>& q) {
  return nearly_equal(p.sigma, q.sigma) && nearly_equal(p.tau, q.tau) &&
         nearly_equal(p.gamma, q.gamma) && nearly_equal(p.theta_sq, q.theta_sq) &&
         nearly_equal(p.eta_sq, q.eta_sq) && nearly_equal(p.theta_eta, q.theta_eta) &&
         p.theta_sign == q.theta_sign && p.eta_sign == q.eta_sign;
}

enum class GlueCase { Wiener, BiPoisson, UpperBoundary, Infeasible };

const char* glue_case_name(GlueCase c) noexcept;

template <Scalar S>
struct GlueVerdict {
  GlueCase tag = GlueCase::Infeasible;
  std::optional<S> v_squared;  // gluing time squared, when determined
  std::optional<S> v;          // gluing time, when representable in S
  int boundary_sign = 0;       // sign(theta^2 - 4 tau) in the upper-boundary case
};

}  // namespace qh
