#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qh/sim/sampler.hpp"

namespace qh::verify {

using sim::Exec;

/// Writes the k per-row terms of row i into `out` (length k).
using RowTerms = std::function<void(std::size_t i, double* out)>;

/// Column sums of an n x k matrix of row terms over a fixed pairwise tree
/// (halves split at n/2, leaves of at most 64 rows summed in order). The tree
/// does not depend on the thread count, so the result is bit-identical for
/// serial and parallel execution.
std::vector<double> pairwise_sums(std::size_t n, std::size_t k, const RowTerms& terms, Exec exec = Exec::Parallel);

double pairwise_sum(std::span<const double> x, Exec exec = Exec::Serial);

}  // namespace qh::verify
