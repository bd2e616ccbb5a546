#include "qh/verify/reduce.hpp"

namespace qh::verify {

namespace {

constexpr std::size_t kLeaf = 64;
constexpr std::size_t kTaskCutoff = 8192;

void sum_range(std::size_t lo, std::size_t hi, std::size_t k, const RowTerms& terms, double* out, bool spawn) {
  if (hi - lo <= kLeaf) {
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      terms(i, row.data());
      for (std::size_t j = 0; j < k; ++j) out[j] += row[j];
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  std::vector<double> right(k);
  if (spawn && hi - lo > kTaskCutoff) {
#pragma omp task shared(right, terms)
    sum_range(mid, hi, k, terms, right.data(), spawn);
    sum_range(lo, mid, k, terms, out, spawn);
#pragma omp taskwait
  } else {
    sum_range(lo, mid, k, terms, out, spawn);
    sum_range(mid, hi, k, terms, right.data(), spawn);
  }
  for (std::size_t j = 0; j < k; ++j) out[j] += right[j];
}

}  // namespace

std::vector<double> pairwise_sums(std::size_t n, std::size_t k, const RowTerms& terms, Exec exec) {
  std::vector<double> out(k, 0.0);
  if (n == 0) return out;
  if (exec == Exec::Parallel && n > kTaskCutoff) {
#pragma omp parallel
#pragma omp single
    sum_range(0, n, k, terms, out.data(), true);
  } else {
    sum_range(0, n, k, terms, out.data(), false);
  }
  return out;
}

double pairwise_sum(std::span<const double> x, Exec exec) {
  return pairwise_sums(x.size(), 1, [&](std::size_t i, double* o) { o[0] = x[i]; }, exec)[0];
}

}  // namespace qh::verify
