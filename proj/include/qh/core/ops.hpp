#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qh/core/types.hpp"

// Parameter calculus of quadratic harnesses. Everything here is a pure
// function, generic over Scalar (double with 1e-12 tolerance, or Rational).
// Operations whose outputs involve square roots return SquaredQH so they stay
// exact over the rationals.

namespace qh {

namespace detail {

template <Scalar S>
void require_ordered(const S& s, const S& t, const S& u) {
  if (!(s < t) || !(t < u)) raise(ErrorCode::DomainViolation, "times must satisfy s < t < u");
}

}  // namespace detail

template <Scalar S>
S eval_K(const QHParams<S>& p, const DeltaPair<S>& d) {
  return S(1) + p.theta * d.slope + p.eta * d.pivot + p.tau * d.slope * d.slope +
         p.sigma * d.pivot * d.pivot - (S(1) - p.gamma) * d.slope * d.pivot;
}

/// Gamma = [[tau, -1], [gamma, sigma]], the normalized split for a standardized QH.
template <Scalar S>
Mat2<S> standard_gamma(const QHParams<S>& p) {
  return {p.tau, S(-1), p.gamma, p.sigma};
}

/// Mean zero, covariance min(s, t), K as in eval_K, interval (0, inf).
template <Scalar S>
HarnessSpec<S> standard_spec(const QHParams<S>& p) {
  HarnessSpec<S> h;
  h.mean = {S(0), S(0)};
  h.cov = {S(0), S(1), S(0), S(0)};
  h.var_form.chi = S(1);
  h.var_form.lin = {p.theta, p.eta};
  h.var_form.quad = standard_gamma(p);
  h.interval = Interval<S>::positive_half_line();
  return h;
}

/// Reads (eta, theta; sigma, tau; gamma) off a spec whose variance form is
/// rescaled to chi = 1.
template <Scalar S>
QHParams<S> params_of(const HarnessSpec<S>& h) {
  const VarianceForm<S>& v = h.var_form;
  if (is_zero(v.chi)) raise(ErrorCode::NonpositiveChiTilde, "chi is zero");
  QHParams<S> p;
  p.theta = v.theta() / v.chi;
  p.eta = v.eta() / v.chi;
  p.tau = v.tau() / v.chi;
  p.sigma = v.sigma() / v.chi;
  p.gamma = S(1) + v.rho() / v.chi;
  return p;
}

template <Scalar S>
S eval_F(const QHParams<S>& p, const S& s, const S& t, const S& u) {
  detail::require_ordered(s, t, u);
  const S den = u * (S(1) + s * p.sigma) + p.tau - s * p.gamma;
  if (is_zero(den)) raise(ErrorCode::ZeroDenominator, "u(1+s sigma)+tau-s gamma = 0");
  return (u - t) * (t - s) / den;
}

/// <t_, J u_><s_, J t_> / <s_, J^T Gamma J u_> for an arbitrary Gamma.
template <Scalar S>
S eval_F_matrix(const Mat2<S>& gamma, const S& s, const S& t, const S& u) {
  const Mat2<S> j = Mat2<S>::j();
  const S den = bilinear(time_vec(s), j.transpose() * gamma * j, time_vec(u));
  if (is_zero(den)) raise(ErrorCode::ZeroDenominator, "<s, J^T Gamma J u> = 0");
  return bilinear(time_vec(t), j, time_vec(u)) * bilinear(time_vec(s), j, time_vec(t)) / den;
}

/// Cov(X_t1, X_t2 | F_{s,u}) for s < t1 <= t2 < u.
template <Scalar S>
S cond_cov_factor(const QHParams<S>& p, const S& s, const S& t1, const S& t2, const S& u,
                  const DeltaPair<S>& d) {
  if (!(s < t1) || t2 < t1 || !(t2 < u)) {
    raise(ErrorCode::DomainViolation, "times must satisfy s < t1 <= t2 < u");
  }
  const Mat2<S> j = Mat2<S>::j();
  const S den = bilinear(time_vec(s), j.transpose() * standard_gamma(p) * j, time_vec(u));
  if (is_zero(den)) raise(ErrorCode::ZeroDenominator, "<s, J^T Gamma J u> = 0");
  return bilinear(time_vec(t2), j, time_vec(u)) * bilinear(time_vec(s), j, time_vec(t1)) / den *
         eval_K(p, d);
}

/// Z_t = a X_{t/a^2}.
template <Scalar S>
QHParams<S> scale_transform(const QHParams<S>& p, const S& a) {
  if (is_zero(a)) raise(ErrorCode::ZeroScale);
  QHParams<S> q = p;
  q.eta = p.eta / a;
  q.theta = a * p.theta;
  q.sigma = p.sigma / (a * a);
  q.tau = a * a * p.tau;
  return q;
}

/// Y_t = t X_{1/t}.
template <Scalar S>
QHParams<S> time_inversion(const QHParams<S>& p) {
  QHParams<S> q = p;
  q.eta = p.theta;
  q.theta = p.eta;
  q.sigma = p.tau;
  q.tau = p.sigma;
  return q;
}

/// scale_transform on radical-free parameters: only a^2 is needed, plus sign(a).
template <Scalar S>
SquaredQH<S> scale_transform(const SquaredQH<S>& p, const S& a_sq, int a_sign) {
  if (is_zero(a_sq) || a_sign == 0) raise(ErrorCode::ZeroScale);
  SquaredQH<S> q = p;
  q.eta_sq = p.eta_sq / a_sq;
  q.theta_sq = a_sq * p.theta_sq;
  q.sigma = p.sigma / a_sq;
  q.tau = a_sq * p.tau;
  q.eta_sign = p.eta_sign * a_sign;
  q.theta_sign = p.theta_sign * a_sign;
  return q;
}

// ---------------------------------------------------------------------------
// Space-time transformations of general harness specs.

namespace detail {

/// Image of an endpoint under phi^{-1}(x) = (d x - b)/(a - c x), approached
/// from inside the interval (dir = +1 for the lower end, -1 for the upper).
template <Scalar S>
Endpoint<S> inverse_mobius_endpoint(const AffineMap<S>& f, const Endpoint<S>& e, int dir) {
  if (e.is_finite()) {
    const S den = f.a - f.c * e.value;
    const S num = f.d * e.value - f.b;
    if (!is_zero(den)) return Endpoint<S>::finite(num / den);
    // Pole at the endpoint: near e + eps*dir the denominator has sign -sign(c)*dir.
    const int s = sign_of(num) * (-sign_of(f.c) * dir);
    return s > 0 ? Endpoint<S>::pos_inf() : Endpoint<S>::neg_inf();
  }
  if (!is_zero(f.c)) return Endpoint<S>::finite(-f.d / f.c);
  const int s = sign_of(f.d) * sign_of(f.a) * e.infinite;
  return s > 0 ? Endpoint<S>::pos_inf() : Endpoint<S>::neg_inf();
}

}  // namespace detail

/// The time domain phi^{-1}(T) of X^f. Throws PoleInInterval when phi^{-1}
/// has its pole a/c strictly inside T.
template <Scalar S>
Interval<S> preimage_interval(const Interval<S>& t, const AffineMap<S>& f) {
  const S dt = f.det();
  if (is_zero(dt)) raise(ErrorCode::SingularMap);
  if (!is_zero(f.c) && t.contains(S(f.a / f.c))) {
    raise(ErrorCode::PoleInInterval, "Mobius time change has a pole inside the interval");
  }
  const Endpoint<S> lo = detail::inverse_mobius_endpoint(f, t.lo, +1);
  const Endpoint<S> hi = detail::inverse_mobius_endpoint(f, t.hi, -1);
  if (dt > S(0)) return {lo, hi};
  return {hi, lo};
}

/// Parameters of X^f given those of X. Sigma, Gamma and the shift follow the
/// increasing (det > 0) or decreasing (det < 0) branch.
template <Scalar S>
HarnessSpec<S> affine_transform_spec(const HarnessSpec<S>& h, const AffineMap<S>& f) {
  const Mat2<S> A = f.matrix();
  const S dt = A.det();
  if (is_zero(dt)) raise(ErrorCode::SingularMap);
  const Mat2<S> Ai = A.inverse();
  const Mat2<S> At = A.transpose();
  const Vec2<S> m = f.shift();
  const Mat2<S> sigma = h.cov.matrix();
  const Mat2<S>& gamma = h.var_form.quad;
  const bool increasing = dt > S(0);

  HarnessSpec<S> out;
  out.interval = preimage_interval(h.interval, f);
  out.mean = MeanLine<S>::from_vec(At * h.mean.vec() + m);
  out.cov = CovMatrix<S>::from_matrix(increasing ? At * sigma * A : At * sigma.transpose() * A);
  const Mat2<S> g = increasing ? Ai * gamma * Ai.transpose() : Ai * gamma.transpose() * Ai.transpose();
  const Vec2<S> lin = Ai * h.var_form.lin - (g + g.transpose()) * m;
  out.var_form.quad = g;
  out.var_form.lin = lin;
  out.var_form.chi = h.var_form.chi - dot(lin, m) - bilinear(m, g, m);
  return out;
}

/// Re-splits the off-diagonal of Gamma (keeping g12 + g21) so that the
/// consistency residual vanishes.
template <Scalar S>
HarnessSpec<S> normalize_gamma(const HarnessSpec<S>& h) {
  const S gap = h.cov.c1 - h.cov.c2;
  if (is_zero(gap)) raise(ErrorCode::DegenerateCovariance, "c1 = c2");
  const Vec2<S> mu = h.mean.vec();
  const VarianceForm<S>& v = h.var_form;
  const S rho = v.rho();
  const S fixed = v.chi + dot(v.lin, mu) + v.tau() * mu.x * mu.x + rho * mu.x * mu.y +
                  v.sigma() * mu.y * mu.y + v.tau() * h.cov.c0 + rho * h.cov.c2 +
                  v.sigma() * h.cov.c3;
  HarnessSpec<S> out = h;
  out.var_form.quad.b = -fixed / gap;
  out.var_form.quad.c = rho - out.var_form.quad.b;
  return out;
}

/// Coefficients (a, b, c, d) of the product covariance (a s + b)(c t + d), s <= t.
template <Scalar S>
struct ProductFactors {
  S a{1};
  S b{0};
  S c{0};
  S d{1};

  S det() const { return a * d - b * c; }
  CovMatrix<S> cov() const { return CovMatrix<S>::from_product(a, b, c, d); }
};

/// Pairwise products of (a, b, c, d) and the sign of the first nonzero factor;
/// determines everything the standardizing transform needs without the
/// factors themselves.
template <Scalar S>
struct FactorGram {
  S aa{1}, ab{0}, ac{0}, ad{1}, bb{0}, bc{0}, bd{0}, cc{0}, cd{0}, dd{1};
  int lead_sign = 1;

  static FactorGram from_factors(const ProductFactors<S>& f) {
    FactorGram g{f.a * f.a, f.a * f.b, f.a * f.c, f.a * f.d, f.b * f.b,
                 f.b * f.c, f.b * f.d, f.c * f.c, f.c * f.d, f.d * f.d, 1};
    for (const S* x : {&f.a, &f.b, &f.c, &f.d}) {
      if (!is_zero(*x)) {
        g.lead_sign = sign_of(*x);
        break;
      }
    }
    return g;
  }

  S det() const { return ad - bc; }

  /// sign of factor k in {0:a, 1:b, 2:c, 3:d}.
  int sign(int k) const {
    const S diag[4] = {aa, bb, cc, dd};
    const S prods[4][4] = {{aa, ab, ac, ad}, {ab, bb, bc, bd}, {ac, bc, cc, cd}, {ad, bd, cd, dd}};
    int lead = 0;
    while (lead < 4 && is_zero(diag[lead])) ++lead;
    if (lead == 4) return 0;
    return lead_sign * sign_of(prods[lead][k]);
  }
};

template <Scalar S>
struct StandardizeResult {
  QHParams<S> params;
  AffineMap<S> map;       // Y = X^map
  Interval<S> interval;   // domain of Y
  S chi_tilde{1};
};

namespace detail {

template <Scalar S>
void check_product_sign(const ProductFactors<S>& f, const Interval<S>& t) {
  // (a t + b)(c t + d) > 0 on the interval: neither factor vanishes inside and
  // the product is positive at one interior point.
  if (!is_zero(f.a) && t.contains(S(-f.b / f.a))) raise(ErrorCode::SignViolation, "a t + b changes sign");
  if (!is_zero(f.c) && t.contains(S(-f.d / f.c))) raise(ErrorCode::SignViolation, "c t + d changes sign");
  const S x = t.interior_point();
  if (!is_positive(S((f.a * x + f.b) * (f.c * x + f.d)))) {
    raise(ErrorCode::SignViolation, "(a t + b)(c t + d) <= 0");
  }
}

template <Scalar S>
S chi_tilde_of(const MeanLine<S>& mean, const VarianceForm<S>& vf) {
  // K evaluated at mu_ = (beta, alpha), with rho the full cross coefficient.
  const S alpha = mean.intercept;
  const S beta = mean.slope;
  return vf.chi + alpha * vf.eta() + vf.theta() * beta + vf.sigma() * alpha * alpha +
         vf.tau() * beta * beta + vf.rho() * alpha * beta;
}

}  // namespace detail

/// Standardizes a harness with mean alpha + beta t, covariance
/// (a s + b)(c t + d) and variance form vf into a quadratic harness via
/// Y_t = ((a - c t)/(ad - bc)) (X_{psi(t)} - alpha - beta psi(t)),
/// psi(t) = (d t - b)/(a - c t).
template <Scalar S>
StandardizeResult<S> harness_to_qh(const MeanLine<S>& mean, const ProductFactors<S>& f,
                                   const VarianceForm<S>& vf,
                                   const Interval<S>& interval = Interval<S>::positive_half_line()) {
  const S dt = f.det();
  if (!is_positive(dt)) raise(ErrorCode::WrongOrientation, "ad - bc <= 0");
  detail::check_product_sign(f, interval);
  const S chi_t = detail::chi_tilde_of(mean, vf);
  if (!is_positive(chi_t)) raise(ErrorCode::NonpositiveChiTilde);

  const S alpha = mean.intercept;
  const S beta = mean.slope;
  const S rho = vf.rho();
  const S e = vf.eta() + beta * rho + S(2) * alpha * vf.sigma();
  const S th = vf.theta() + alpha * rho + S(2) * beta * vf.tau();

  StandardizeResult<S> r;
  r.chi_tilde = chi_t;
  r.params.eta = (f.d * e + f.c * th) / chi_t;
  r.params.theta = (f.b * e + f.a * th) / chi_t;
  r.params.sigma = (vf.tau() * f.c * f.c + f.d * rho * f.c + f.d * f.d * vf.sigma()) / chi_t;
  r.params.tau = (vf.tau() * f.a * f.a + f.b * rho * f.a + f.b * f.b * vf.sigma()) / chi_t;
  r.params.gamma = S(1) + (f.b * f.c * rho + f.a * f.d * rho + S(2) * f.b * f.d * vf.sigma() +
                           S(2) * f.a * f.c * vf.tau()) / chi_t;
  r.map = {f.d / dt, -f.b / dt, -f.c / dt, f.a / dt, (f.c * alpha - f.d * beta) / dt,
           (f.b * beta - f.a * alpha) / dt};
  r.interval = preimage_interval(interval, r.map);
  return r;
}

template <Scalar S>
struct SquaredStandardizeResult {
  SquaredQH<S> params;
  S chi_tilde{1};
};

/// harness_to_qh when only the pairwise products of (a, b, c, d) are
/// rational: returns sigma', tau', gamma' and theta'^2, eta'^2, theta' eta'.
template <Scalar S>
SquaredStandardizeResult<S> harness_to_qh_squared(const MeanLine<S>& mean, const FactorGram<S>& g,
                                                  const VarianceForm<S>& vf) {
  if (!is_positive(g.det())) raise(ErrorCode::WrongOrientation, "ad - bc <= 0");
  const S chi_t = detail::chi_tilde_of(mean, vf);
  if (!is_positive(chi_t)) raise(ErrorCode::NonpositiveChiTilde);
  const S alpha = mean.intercept;
  const S beta = mean.slope;
  const S rho = vf.rho();
  const S e = vf.eta() + beta * rho + S(2) * alpha * vf.sigma();
  const S th = vf.theta() + alpha * rho + S(2) * beta * vf.tau();
  const S chi2 = chi_t * chi_t;

  SquaredStandardizeResult<S> r;
  r.chi_tilde = chi_t;
  SquaredQH<S>& q = r.params;
  q.sigma = (vf.tau() * g.cc + rho * g.cd + vf.sigma() * g.dd) / chi_t;
  q.tau = (vf.tau() * g.aa + rho * g.ab + vf.sigma() * g.bb) / chi_t;
  q.gamma = S(1) + (rho * (g.bc + g.ad) + S(2) * vf.sigma() * g.bd + S(2) * vf.tau() * g.ac) / chi_t;
  // eta' = (d e + c th)/chi~, theta' = (b e + a th)/chi~
  q.eta_sq = (g.dd * e * e + S(2) * g.cd * e * th + g.cc * th * th) / chi2;
  q.theta_sq = (g.bb * e * e + S(2) * g.ab * e * th + g.aa * th * th) / chi2;
  q.theta_eta = (g.bd * e * e + (g.bc + g.ad) * e * th + g.ac * th * th) / chi2;
  // sign(x e + y th) = sign(x) sign(x^2 e + x y th) when x != 0.
  auto linear_sign = [&](int first, const S& ff, const S& fs, int second, const S& ss) {
    if (!is_zero(ff)) return g.sign(first) * sign_of(S(ff * e + fs * th));
    if (!is_zero(ss)) return g.sign(second) * sign_of(S(fs * e + ss * th));
    return 0;
  };
  q.theta_sign = linear_sign(1, g.bb, g.ab, 0, g.aa);
  q.eta_sign = linear_sign(3, g.dd, g.cd, 2, g.cc);
  return r;
}

/// X_t = (c t + d) Y_{(a t + b)/(c t + d)} + alpha + beta t: the inverse of
/// the map returned by harness_to_qh.
template <Scalar S>
AffineMap<S> qh_inverse_representation(const ProductFactors<S>& f, const MeanLine<S>& mean) {
  if (is_zero(f.det())) raise(ErrorCode::SingularMap);
  return {f.a, f.b, f.c, f.d, mean.slope, mean.intercept};
}

// ---------------------------------------------------------------------------
// Conditioning.

template <Scalar S>
struct BridgeResult {
  SquaredQH<S> params;
  BridgeData<S> data;
};

/// Parameters of the harness obtained by conditioning on X_R = z_R, X_V = z_V
/// and re-straightening to (0, inf).
template <Scalar S>
BridgeResult<S> bridge_params(const QHParams<S>& p, const S& R, const S& V, const S& z_R, const S& z_V) {
  if (!(R < V) || !is_positive(V)) raise(ErrorCode::DomainViolation, "need 0 < V and R < V");
  BridgeData<S> bd;
  bd.R = R;
  bd.V = V;
  bd.z_R = z_R;
  bd.z_V = z_V;
  const DeltaPair<S> dp = DeltaPair<S>::from_values(R, V, z_R, z_V);
  bd.slope = dp.slope;
  bd.pivot = dp.pivot;
  bd.denom = V * (S(1) + R * p.sigma) + p.tau - R * p.gamma;
  if (!is_positive(bd.denom)) raise(ErrorCode::NonpositiveDenominator, "V(1+R sigma)+tau-R gamma <= 0");
  bd.K = eval_K(p, dp);
  if (!is_positive(bd.K)) raise(ErrorCode::NonpositiveK);
  bd.M_sq = bd.K / bd.denom;

  const S one_minus_g = S(1) - p.gamma;
  const S& dl = dp.slope;
  const S& dv = dp.pivot;
  const S n_eta = -p.theta + V * p.eta - S(2) * p.tau * dl + S(2) * p.sigma * V * dv -
                  one_minus_g * (V * dl - dv);
  const S n_theta = p.theta - R * p.eta + S(2) * p.tau * dl - S(2) * R * p.sigma * dv -
                    one_minus_g * (dv - R * dl);

  SquaredQH<S> q;
  q.sigma = (p.sigma * V * V + one_minus_g * V + p.tau) / (V * bd.denom);
  q.tau = V * (p.sigma * R * R + one_minus_g * R + p.tau) / bd.denom;
  q.gamma = (V * p.gamma - R * (V * p.sigma + S(1)) - p.tau) / bd.denom;
  const S kd = bd.K * bd.denom;
  q.theta_sq = V * n_theta * n_theta / kd;
  q.eta_sq = n_eta * n_eta / (V * kd);
  q.theta_eta = n_theta * n_eta / kd;
  q.theta_sign = sign_of(n_theta);
  q.eta_sign = sign_of(n_eta);
  return {q, bd};
}

template <Scalar S>
struct OneSidedResult {
  SquaredQH<S> params;
  S kappa_sq{1};
  S scale_sq{1};  // square of the space factor multiplying the transformed path
};

/// Conditioning on X_V = z_V (process on (0, V)).
template <Scalar S>
OneSidedResult<S> condition_on_future(const QHParams<S>& p, const S& V, const S& z_V) {
  if (!is_positive(V)) raise(ErrorCode::DomainViolation, "V must be positive");
  const S r = z_V / V;
  const S lead = S(1) + p.tau / V;
  OneSidedResult<S> out;
  out.kappa_sq = lead * (S(1) + p.theta * r + p.tau * r * r);
  if (!is_positive(out.kappa_sq)) raise(ErrorCode::NonpositiveKappaSq);
  const S n_theta = p.theta + S(2) * p.tau * r;
  const S n_eta = -p.theta + V * p.eta - S(2) * p.tau * r - (S(1) - p.gamma) * z_V;
  SquaredQH<S>& q = out.params;
  q.theta_sq = n_theta * n_theta / out.kappa_sq;
  q.eta_sq = n_eta * n_eta / (V * V * out.kappa_sq);
  q.theta_eta = n_theta * n_eta / (V * out.kappa_sq);
  q.theta_sign = sign_of(n_theta);
  q.eta_sign = sign_of(n_eta);
  q.tau = V * p.tau / (V + p.tau);
  q.sigma = (p.sigma * V * V + (S(1) - p.gamma) * V + p.tau) / (V * (V + p.tau));
  q.gamma = (V * p.gamma - p.tau) / (V + p.tau);
  out.scale_sq = lead * lead / out.kappa_sq;
  return out;
}

/// Conditioning on X_R = z_R (process on (R, inf)).
template <Scalar S>
OneSidedResult<S> condition_on_past(const QHParams<S>& p, const S& R, const S& z_R) {
  if (R < S(0)) raise(ErrorCode::DomainViolation, "R must be nonnegative");
  const S lead = S(1) + R * p.sigma;
  OneSidedResult<S> out;
  out.kappa_sq = lead * (S(1) + p.eta * z_R + p.sigma * z_R * z_R);
  if (!is_positive(out.kappa_sq)) raise(ErrorCode::NonpositiveKappaSq);
  const S n_theta = p.theta - R * p.eta - S(2) * R * p.sigma * z_R - (S(1) - p.gamma) * z_R;
  const S n_eta = p.eta + S(2) * p.sigma * z_R;
  SquaredQH<S>& q = out.params;
  q.theta_sq = n_theta * n_theta / out.kappa_sq;
  q.eta_sq = n_eta * n_eta / out.kappa_sq;
  q.theta_eta = n_theta * n_eta / out.kappa_sq;
  q.theta_sign = sign_of(n_theta);
  q.eta_sign = sign_of(n_eta);
  q.tau = (p.sigma * R * R + (S(1) - p.gamma) * R + p.tau) / lead;
  q.sigma = p.sigma / lead;
  q.gamma = (p.gamma - R * p.sigma) / lead;
  out.scale_sq = lead * lead / out.kappa_sq;
  return out;
}

/// Bridge of a Meixner process QH(0, theta; 0, tau; 1) on [R, V] with endpoint
/// slope Delta_RV, rescaled to sigma_Y = tau_Y.
template <Scalar S>
SquaredQH<S> meixner_bridge(const S& theta, const S& tau, const S& R, const S& V, const S& slope) {
  if (tau < S(0) && !is_zero(tau)) raise(ErrorCode::InvalidParams, "tau < 0");
  if (!(R < V)) raise(ErrorCode::DomainViolation, "need R < V");
  const S k = S(1) + theta * slope + tau * slope * slope;
  if (!is_positive(k)) raise(ErrorCode::NonpositiveK);
  const S span = V - R + tau;
  const S num = theta + S(2) * tau * slope;
  SquaredQH<S> q;
  q.gamma = (V - R - tau) / span;
  q.tau = tau / span;
  q.sigma = q.tau;
  q.theta_sq = num * num / (span * k);
  q.eta_sq = q.theta_sq;
  q.theta_eta = -q.theta_sq;
  q.theta_sign = sign_of(num);
  q.eta_sign = -q.theta_sign;
  return q;
}

/// ((1 - gamma)^2 - 4 sigma tau)/(1 + gamma)^2, undefined at gamma = -1.
template <Scalar S>
std::optional<S> bridge_invariant(const S& sigma, const S& tau, const S& gamma) {
  const S g1 = S(1) + gamma;
  if (is_zero(g1)) return std::nullopt;
  const S omg = S(1) - gamma;
  return (omg * omg - S(4) * sigma * tau) / (g1 * g1);
}

template <Scalar S>
std::optional<S> bridge_invariant(const QHParams<S>& p) {
  return bridge_invariant(p.sigma, p.tau, p.gamma);
}

template <Scalar S>
std::optional<S> bridge_invariant(const SquaredQH<S>& p) {
  return bridge_invariant(p.sigma, p.tau, p.gamma);
}

/// Which gluing of a conditioned q-Meixner process can produce p.
template <Scalar S>
GlueVerdict<S> glue_classify(const QHParams<S>& p) {
  QHParams<S> checked = p;
  checked.standard_infinite_horizon = true;
  checked.validate();

  GlueVerdict<S> v;
  const S g1 = p.gamma - S(1);
  if (is_zero(g1) && is_zero(p.sigma) && is_zero(p.tau)) {
    if (is_zero(p.eta) && is_zero(p.theta)) {
      v.tag = GlueCase::Wiener;
      return v;
    }
    if (sign_of(p.eta) * sign_of(p.theta) > 0) {
      v.tag = GlueCase::BiPoisson;
      const S t = p.theta / p.eta;
      v.v = t;
      v.v_squared = t * t;
      return v;
    }
    return v;
  }
  if (is_positive(g1) && is_positive(p.sigma) && is_positive(p.tau) &&
      nearly_equal(S(g1 * g1), S(S(4) * p.sigma * p.tau))) {
    // eta sqrt(tau) = theta sqrt(sigma)
    if (nearly_equal(S(p.eta * p.eta * p.tau), S(p.theta * p.theta * p.sigma)) &&
        sign_of(p.eta) == sign_of(p.theta)) {
      v.tag = GlueCase::UpperBoundary;
      v.v_squared = p.tau / p.sigma;
      if constexpr (!ScalarTraits<S>::exact) v.v = std::sqrt(p.tau / p.sigma);
      v.boundary_sign = sign_of(S(p.theta * p.theta - S(4) * p.tau));
    }
  }
  return v;
}

/// Data constructing a harness with sigma, tau > 0, sigma tau < 1,
/// gamma = 1 - 2 sqrt(sigma tau) and sqrt(tau) eta + sqrt(sigma) theta = 0 as
/// a rescaled Meixner bridge.
struct T1IConstruction {
  double meixner_theta = 0;
  double meixner_tau = 1;
  double span = 1;   // V - R
  double slope = 0;  // Delta_RV
  double scale = 1;  // a in Z_t = a X_{t/a^2}

  QHParams<double> forward() const;
};

T1IConstruction solve_t1i(double eta, double theta, double sigma, double tau);

// ---------------------------------------------------------------------------
// Population identities.

template <Scalar S>
struct PopulationMoments {
  Mat2<S> cov_delta;  // Cov of (Delta_{s,u}, Delta~_{s,u})
  S e_var{0};         // E Var(X_t | F_{s,u})
  S e_K{0};           // E K(Delta_{s,u})
};

template <Scalar S>
PopulationMoments<S> population_identities(const CovMatrix<S>& cov, const VarianceForm<S>& vf,
                                           const MeanLine<S>& mean, const S& s, const S& t,
                                           const S& u) {
  detail::require_ordered(s, t, u);
  const Mat2<S> j = Mat2<S>::j();
  const Mat2<S> sigma = cov.matrix();
  const S gap = cov.c1 - cov.c2;
  const S span = u - s;
  PopulationMoments<S> out;
  out.cov_delta = (gap / span) * outer(j * time_vec(u), j * time_vec(s)) + sigma.transpose();
  out.e_var = (t - s) * (u - t) * gap / span;
  const Mat2<S>& g = vf.quad;
  const S trace = g.a * sigma.a + g.b * sigma.b + g.c * sigma.c + g.d * sigma.d;
  out.e_K = trace + vf.eval(mean.vec()) +
            gap * bilinear(time_vec(s), j.transpose() * g * j, time_vec(u)) / span;
  return out;
}

/// Gram determinant of c(s_i, s_j) over s_0 = 0 < s_1 < ... < s_n.
/// closed_form is the product (c1-c2)^n (s_n-s_{n-1})...(s_2-s_1) s_1
/// (c3(c1-c2) + (c0 c3 - c2^2) s_n). Expanding the determinant shows the
/// power of (c1-c2) is n-1, not n; corrected_closed_form uses n-1.
template <Scalar S>
struct DeterminantCheck {
  S closed_form{0};
  S corrected_closed_form{0};
  S brute_force{0};
};

namespace detail {

template <Scalar S>
S laplace_det(const std::vector<std::vector<S>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  S total(0);
  for (std::size_t col = 0; col < n; ++col) {
    if (is_zero(m[0][col])) continue;
    std::vector<std::vector<S>> minor;
    minor.reserve(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<S> row;
      row.reserve(n - 1);
      for (std::size_t c = 0; c < n; ++c) {
        if (c != col) row.push_back(m[r][c]);
      }
      minor.push_back(std::move(row));
    }
    const S term = m[0][col] * laplace_det(minor);
    total = (col % 2 == 0) ? S(total + term) : S(total - term);
  }
  return total;
}

}  // namespace detail

/// Gram determinant of the covariance kernel on {0} + times, by cofactor
/// expansion and by the closed product form.
template <Scalar S>
DeterminantCheck<S> cov_psd_check(const CovMatrix<S>& cov, std::span<const S> times) {
  const std::size_t n = times.size();
  if (n == 0) raise(ErrorCode::DomainViolation, "need at least one time");
  if (n > 8) raise(ErrorCode::TooLarge, "brute-force determinant limited to n <= 8");
  if (!(S(0) < times[0])) raise(ErrorCode::DomainViolation, "times must be positive");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(times[i - 1] < times[i])) raise(ErrorCode::DomainViolation, "times must increase");
  }
  std::vector<S> pts{S(0)};
  pts.insert(pts.end(), times.begin(), times.end());
  std::vector<std::vector<S>> gram(n + 1, std::vector<S>(n + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = 0; k <= n; ++k) gram[i][k] = cov.at(pts[i], pts[k]);
  }
  DeterminantCheck<S> out;
  out.brute_force = detail::laplace_det(gram);
  const S gap = cov.c1 - cov.c2;
  S prod(1);
  for (std::size_t i = 1; i < n; ++i) prod = prod * gap * (times[i] - times[i - 1]);
  prod = prod * times[0];
  out.corrected_closed_form = prod * (cov.c3 * gap + (cov.c0 * cov.c3 - cov.c2 * cov.c2) * times[n - 1]);
  out.closed_form = gap * out.corrected_closed_form;
  return out;
}

}  // namespace qh
