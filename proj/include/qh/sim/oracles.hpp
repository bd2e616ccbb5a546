#pragma once

#include <utility>
#include <vector>

#include "qh/core/scalar.hpp"
#include "qh/sim/sampler.hpp"

namespace qh::sim {

/// Exact joint law of a binomial bridge b(N, t/V) on a finite grid.
class BinomialBridgeLaw {
 public:
  struct Atom {
    std::vector<int> path;  // values at the grid times
    Rational prob;
  };

  int N() const { return n_; }
  const Rational& V() const { return v_; }
  const std::vector<Rational>& times() const { return times_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// P(X_{t_k} = x).
  Rational marginal(std::size_t k, int x) const;
  /// P(X_{t_j} = x_j, X_{t_l} = x_l).
  Rational pair_prob(std::size_t j, int xj, std::size_t l, int xl) const;
  /// E and Var of X_{t_k} given X_{t_j} = x_j, X_{t_l} = x_l. Throws DomainViolation
  /// on a null conditioning event.
  std::pair<Rational, Rational> conditional(std::size_t k, std::size_t j, int xj, std::size_t l, int xl) const;

  friend BinomialBridgeLaw enumerate_binomial_bridge(int N, const Rational& V, const std::vector<Rational>& times);

 private:
  int n_ = 0;
  Rational v_;
  std::vector<Rational> times_;
  std::vector<Atom> atoms_;
};

/// Enumerates all paths through products of the transition kernels
/// b(N - x_s, (t - s)/(V - s)). Throws TooLarge for N > 6 or more than 5 times,
/// DomainViolation unless 0 < t_1 < ... <= V.
BinomialBridgeLaw enumerate_binomial_bridge(int N, const Rational& V, const std::vector<Rational>& times);

/// The atoms of `law` as ensemble rows (grid converted to double) with their
/// probabilities in `weights`, for regressions against the exact law.
PathEnsemble law_as_ensemble(const BinomialBridgeLaw& law, std::vector<double>& weights);

/// Closed-form conditional mean and variance of the Dirichlet bridge at t given
/// X_s = x_s, X_u = x_u.
std::pair<double, double> exact_beta_conditionals(double c, double V, double s, double t, double u, double x_s,
                                                  double x_u);

}  // namespace qh::sim
