#include "qh/verify/moments.hpp"

#include <cmath>

namespace qh::verify {

MeanCovEstimate estimate_mean_cov(const sim::PathEnsemble& e, Exec exec) {
  if (e.n_paths < 2) raise(ErrorCode::EmptyEnsemble, "need at least two paths");
  const std::size_t m = e.n_times();
  const std::size_t n = e.n_paths;
  const double dn = static_cast<double>(n);
  MeanCovEstimate out;
  out.times = e.times;
  out.n = n;

  const auto sums = pairwise_sums(n, m, [&](std::size_t i, double* o) {
    for (std::size_t k = 0; k < m; ++k) o[k] = e.at(i, k);
  }, exec);
  out.mean.resize(m);
  for (std::size_t k = 0; k < m; ++k) out.mean[k] = sums[k] / dn;

  // centered products and their squares over the upper triangle
  const std::size_t pairs = m * (m + 1) / 2;
  const auto prods = pairwise_sums(n, 2 * pairs, [&](std::size_t i, double* o) {
    std::size_t q = 0;
    for (std::size_t a = 0; a < m; ++a) {
      const double da = e.at(i, a) - out.mean[a];
      for (std::size_t b = a; b < m; ++b, ++q) {
        const double p = da * (e.at(i, b) - out.mean[b]);
        o[q] = p;
        o[pairs + q] = p * p;
      }
    }
  }, exec);

  out.cov.assign(m * m, 0.0);
  out.cov_se.assign(m * m, 0.0);
  out.mean_se.resize(m);
  std::size_t q = 0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b, ++q) {
      const double pop = prods[q] / dn;
      const double fourth = prods[pairs + q] / dn;
      const double cov = prods[q] / (dn - 1);
      const double se = std::sqrt(std::max(0.0, fourth - pop * pop) / dn);
      out.cov[a * m + b] = out.cov[b * m + a] = cov;
      out.cov_se[a * m + b] = out.cov_se[b * m + a] = se;
      if (a == b) out.mean_se[a] = std::sqrt(cov / dn);
    }
  }
  return out;
}

}  // namespace qh::verify
