#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qh/core/io.hpp"
#include "qh/verify/predict.hpp"
#include "qh/verify/regression.hpp"

namespace qh::verify {

struct CoefficientBlock {
  std::vector<std::string> basis;
  std::vector<double> fitted;
  std::vector<double> se;
  std::vector<bool> identifiable;
  std::vector<double> predicted;  // projected onto the identifiable coefficients
  std::vector<double> z;
  std::vector<bool> pass;
  bool compared = false;

  bool all_pass() const;
  std::vector<std::string> failing() const;
};

struct FitReport {
  std::array<double, 3> triple{};
  bool exact = false;  // regression on an exact law
  CoefficientBlock linear;
  CoefficientBlock variance;
  bool has_variance = false;
  // alias data needed to project predictions
  Regression linear_reg;
  Regression variance_reg;

  bool passed() const;
  std::string verdict() const { return passed() ? "PASS" : "FAIL"; }
};

constexpr double kExactTolerance = 1e-12;

/// OLS of X_t on {1, X_s, X_u}. `weights` turns the rows into an exact law.
FitReport check_harness(const sim::PathEnsemble& e, double s, double t, double u, std::span<const double> weights = {},
                        Exec exec = Exec::Parallel);

/// check_harness plus the regression of (X_t - interpolation)^2 on the fixed basis.
FitReport fit_conditional_variance(const sim::PathEnsemble& e, double s, double t, double u,
                                   std::span<const double> weights = {}, Exec exec = Exec::Parallel);

/// Fills predicted/z/pass. A coefficient passes when |fitted - predicted| is
/// within tol_sigmas SE or within 1e-12. Throws MismatchedTriples.
void compare_to_prediction(FitReport& fit, const Prediction& pred, const std::array<double, 3>& triple,
                           double tol_sigmas);

json fit_report_json(const FitReport& fit);

}  // namespace qh::verify
