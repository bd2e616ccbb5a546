#include "qh/sim/oracles.hpp"

#include "qh/core/error.hpp"

namespace qh::sim {

namespace {

Rational binom_coeff(int n, int k) {
  Rational c(1);
  for (int i = 1; i <= k; ++i) c = c * Rational(n - k + i) / Rational(i);
  return c;
}

Rational binom_pmf(int n, int k, const Rational& p) {
  Rational pk(1), qk(1);
  for (int i = 0; i < k; ++i) pk *= p;
  for (int i = 0; i < n - k; ++i) qk *= Rational(1) - p;
  return binom_coeff(n, k) * pk * qk;
}

void extend(const Rational& V, int N, const std::vector<Rational>& times, std::size_t k, const Rational& prev_t,
            std::vector<int>& path, const Rational& prob, std::vector<BinomialBridgeLaw::Atom>& out) {
  if (k == times.size()) {
    out.push_back({path, prob});
    return;
  }
  const int x = k == 0 ? 0 : path[k - 1];
  const Rational p = times[k] == V ? Rational(1) : (times[k] - prev_t) / (V - prev_t);
  const int n = N - x;
  for (int j = 0; j <= n; ++j) {
    const Rational w = binom_pmf(n, j, p);
    if (w == 0) continue;
    path[k] = x + j;
    extend(V, N, times, k + 1, times[k], path, prob * w, out);
  }
}

}  // namespace

BinomialBridgeLaw enumerate_binomial_bridge(int N, const Rational& V, const std::vector<Rational>& times) {
  if (N > 6 || times.size() > 5) raise(ErrorCode::TooLarge, "enumeration limited to N <= 6 and 5 grid points");
  if (N < 1 || !(V > 0) || times.empty()) raise(ErrorCode::DomainViolation, "need N >= 1, V > 0, nonempty grid");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0) || times[k] > V || (k > 0 && !(times[k - 1] < times[k]))) {
      raise(ErrorCode::DomainViolation, "grid must satisfy 0 < t_1 < ... <= V");
    }
  }
  BinomialBridgeLaw law;
  law.n_ = N;
  law.v_ = V;
  law.times_ = times;
  std::vector<int> path(times.size(), 0);
  extend(V, N, times, 0, Rational(0), path, Rational(1), law.atoms_);
  return law;
}

Rational BinomialBridgeLaw::marginal(std::size_t k, int x) const {
  Rational p(0);
  for (const auto& a : atoms_) {
    if (a.path.at(k) == x) p += a.prob;
  }
  return p;
}

Rational BinomialBridgeLaw::pair_prob(std::size_t j, int xj, std::size_t l, int xl) const {
  Rational p(0);
  for (const auto& a : atoms_) {
    if (a.path.at(j) == xj && a.path.at(l) == xl) p += a.prob;
  }
  return p;
}

std::pair<Rational, Rational> BinomialBridgeLaw::conditional(std::size_t k, std::size_t j, int xj, std::size_t l,
                                                             int xl) const {
  Rational mass(0), m1(0), m2(0);
  for (const auto& a : atoms_) {
    if (a.path.at(j) != xj || a.path.at(l) != xl) continue;
    const Rational x(a.path.at(k));
    mass += a.prob;
    m1 += a.prob * x;
    m2 += a.prob * x * x;
  }
  if (mass == 0) raise(ErrorCode::DomainViolation, "conditioning event has probability zero");
  const Rational mean = m1 / mass;
  return {mean, m2 / mass - mean * mean};
}

PathEnsemble law_as_ensemble(const BinomialBridgeLaw& law, std::vector<double>& weights) {
  PathEnsemble e;
  for (const auto& t : law.times()) e.times.push_back(to_double(t));
  e.n_paths = law.atoms().size();
  e.descriptor.process = BinomialBridge{law.N(), to_double(law.V())};
  weights.clear();
  for (const auto& a : law.atoms()) {
    for (int x : a.path) e.values.push_back(x);
    weights.push_back(to_double(a.prob));
  }
  return e;
}

std::pair<double, double> exact_beta_conditionals(double c, double V, double s, double t, double u, double x_s,
                                                  double x_u) {
  if (!(c > 0) || !(0 <= s && s < t && t < u && u <= V)) {
    raise(ErrorCode::DomainViolation, "need c > 0 and 0 <= s < t < u <= V");
  }
  if (!(0 <= x_s && x_s <= x_u && x_u <= 1)) raise(ErrorCode::DomainViolation, "need 0 <= x_s <= x_u <= 1");
  const double span = u - s;
  const double inc = x_u - x_s;
  const double mean = x_s + inc * (t - s) / span;
  const double var = inc * inc * (t - s) * (u - t) / (span * span * (c * span + 1));
  return {mean, var};
}

}  // namespace qh::sim
