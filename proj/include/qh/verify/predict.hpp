#pragma once

#include <array>

#include "qh/core/types.hpp"

namespace qh::verify {

/// Expected coefficients of the two regressions at (s, t, u):
/// linear on {1, X_s, X_u} and squared residual on {1, D, D~, D^2, D~^2, D D~}.
struct Prediction {
  std::array<double, 3> linear{};
  std::array<double, 6> variance{};
};

/// Standardized harness: variance = F_{t,s,u} (1, theta, eta, tau, sigma, gamma - 1).
Prediction predict(const QHParams<double>& p, double s, double t, double u);

/// General harness: F from the harness Gamma times (chi, theta_, Gamma11, Gamma22, Gamma12 + Gamma21).
Prediction predict(const HarnessSpec<double>& h, double s, double t, double u);

}  // namespace qh::verify
