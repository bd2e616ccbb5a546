#include "qh/core/ops.hpp"

#include <cmath>

namespace qh {

const char* glue_case_name(GlueCase c) noexcept {
  switch (c) {
    case GlueCase::Wiener: return "wiener";
    case GlueCase::BiPoisson: return "bi_poisson";
    case GlueCase::UpperBoundary: return "upper_boundary";
    case GlueCase::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

// Bridge slope used by the construction. Any Delta in (0, 1) works; a nonzero
// value is needed so that both signs of theta are reachable.
constexpr double kSlope = 0.5;

}  // namespace

QHParams<double> T1IConstruction::forward() const {
  const SquaredQH<double> bridged = meixner_bridge(meixner_theta, meixner_tau, 0.0, span, slope);
  return scale_transform(bridged.resolve(), scale);
}

T1IConstruction solve_t1i(double eta, double theta, double sigma, double tau) {
  if (!(sigma > 0.0) || !(tau > 0.0)) raise(ErrorCode::InfeasibleTarget, "need sigma, tau > 0");
  const double q = std::sqrt(sigma * tau);
  if (!(q < 1.0)) raise(ErrorCode::InfeasibleTarget, "need sigma tau < 1");
  const double tie = std::sqrt(tau) * eta + std::sqrt(sigma) * theta;
  if (std::abs(tie) > 1e-12 * (1.0 + std::abs(eta) + std::abs(theta))) {
    raise(ErrorCode::InfeasibleTarget, "need sqrt(tau) eta + sqrt(sigma) theta = 0");
  }

  T1IConstruction out;
  out.scale = std::pow(tau / sigma, 0.25);
  out.span = (1.0 - q) / q;
  out.slope = kSlope;
  out.meixner_tau = 1.0;

  // theta_Y = w must equal (theta_Z + 2 Delta) / sqrt(D K) with D = 1/q, i.e.
  // x = theta_Z + 2 Delta solves q x^2 - w^2 Delta x - w^2 (1 - Delta^2) = 0
  // with sign(x) = sign(w). The roots have opposite signs.
  const double w = theta / out.scale;
  const double w2 = w * w;
  const double c = 1.0 - kSlope * kSlope;
  double x = 0.0;
  if (w2 > 0.0) {
    const double r_pos = (w2 * kSlope + std::abs(w) * std::sqrt(w2 * kSlope * kSlope + 4.0 * q * c)) / (2.0 * q);
    const double r_neg = -w2 * c / (q * r_pos);
    x = w > 0.0 ? r_pos : r_neg;
  }
  out.meixner_theta = x - 2.0 * kSlope;
  return out;
}

}  // namespace qh
