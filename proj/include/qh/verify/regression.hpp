#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qh/verify/reduce.hpp"

namespace qh::verify {

/// Fills the p regressors of row i into x and returns the response.
using DesignRow = std::function<double(std::size_t i, double* x)>;

/// Least squares by normal equations. Columns are admitted greedily in order
/// and dropped when their residual norm after projection on the admitted ones
/// is below 1e-9 of their own norm; each admitted coefficient then estimates
/// beta_j + sum_d alias[j][d] beta_d over the dropped columns d.
struct Regression {
  std::size_t n = 0;
  std::size_t p = 0;
  bool weighted = false;            // population fit against an exact law
  std::vector<bool> kept;           // size p
  std::vector<double> coef;         // size p, 0 for dropped columns
  std::vector<double> se;           // HC1 sandwich SEs; 0 for dropped columns and in weighted mode
  std::vector<std::vector<double>> alias;  // p x p, nonzero only for (kept, dropped)
  double mean_sq_residual = 0;

  std::vector<std::size_t> dropped() const;
  /// Value the admitted coefficients take when the model holds with `beta`.
  std::vector<double> project(std::span<const double> beta) const;
};

/// With `weights` (probabilities of an exact law, one per row) the fit is the
/// population projection and standard errors are zero. Throws SingularDesign
/// when no column can be admitted and EmptyEnsemble for n < p + 1 unweighted.
Regression least_squares(std::size_t n, std::size_t p, const DesignRow& row, std::span<const double> weights = {},
                         Exec exec = Exec::Parallel);

}  // namespace qh::verify
