#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qh {

struct IdentityResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  std::string first_failure;

  bool passed() const { return trials > 0 && failures == 0; }
};

enum class ScalarMode { Float, Rational };

/// Randomized property checks of the parameter calculus. Each identity is
/// evaluated on `trials` seeded random instances (invalid draws are redrawn).
/// In Rational mode every comparison is exact equality.
std::vector<IdentityResult> run_identity_suite(int trials, std::uint64_t seed, ScalarMode mode);

/// Closed-form versus cofactor-expansion Gram determinants on random
/// rational covariance kernels with 1..max_n time points. With
/// `corrected` the closed form carries (c1-c2)^(n-1) instead of (c1-c2)^n.
IdentityResult run_determinant_check(int trials, std::uint64_t seed, int max_n, bool corrected);

}  // namespace qh
