#pragma once

#include <vector>

#include "qh/verify/reduce.hpp"

namespace qh::verify {

/// Sample means and covariances over the grid with plug-in standard errors:
/// SE(mean) = s/sqrt(n), SE(cov) from the fourth-moment plug-in.
struct MeanCovEstimate {
  std::vector<double> times;
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> mean_se;
  std::vector<double> cov;  // n_times x n_times, row-major, divisor n - 1
  std::vector<double> cov_se;

  double cov_at(std::size_t i, std::size_t j) const { return cov[i * times.size() + j]; }
  double cov_se_at(std::size_t i, std::size_t j) const { return cov_se[i * times.size() + j]; }
};

/// Throws EmptyEnsemble for fewer than two paths.
MeanCovEstimate estimate_mean_cov(const sim::PathEnsemble& e, Exec exec = Exec::Parallel);

}  // namespace qh::verify
