#include "qh/core/identities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "qh/core/ops.hpp"

namespace qh {

namespace {

constexpr int kMaxRedraws = 10000;

template <Scalar S>
std::string str(const S& x) {
  if constexpr (ScalarTraits<S>::exact) {
    return boost::multiprecision::numerator(x).str() + "/" + boost::multiprecision::denominator(x).str();
  } else {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  }
}

// Comparison used by the suite: exact equality for rationals; for doubles a
// tolerance of 1e-12 relative to the magnitude of the compared values, since
// the random instances routinely produce entries in the hundreds.
template <Scalar S>
bool agree(const S& a, const S& b) {
  if constexpr (ScalarTraits<S>::exact) {
    return a == b;
  } else {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  }
}

template <Scalar S>
bool negligible(const S& x, const S& scale) {
  if constexpr (ScalarTraits<S>::exact) {
    return x == 0;
  } else {
    return std::abs(x) <= 1e-12 * std::max(1.0, std::abs(scale));
  }
}

template <Scalar S>
bool agree(const Vec2<S>& a, const Vec2<S>& b) {
  return agree(a.x, b.x) && agree(a.y, b.y);
}

template <Scalar S>
bool agree(const Mat2<S>& a, const Mat2<S>& b) {
  return agree(a.a, b.a) && agree(a.b, b.b) && agree(a.c, b.c) && agree(a.d, b.d);
}

template <Scalar S>
bool agree(const Endpoint<S>& a, const Endpoint<S>& b) {
  return a.infinite == b.infinite && (a.infinite != 0 || agree(a.value, b.value));
}

template <Scalar S>
bool agree(const HarnessSpec<S>& a, const HarnessSpec<S>& b) {
  return agree(a.mean.vec(), b.mean.vec()) && agree(a.cov.matrix(), b.cov.matrix()) &&
         agree(a.var_form.chi, b.var_form.chi) && agree(a.var_form.lin, b.var_form.lin) &&
         agree(a.var_form.quad, b.var_form.quad) && agree(a.interval.lo, b.interval.lo) &&
         agree(a.interval.hi, b.interval.hi);
}

template <Scalar S>
bool agree(const AffineMap<S>& a, const AffineMap<S>& b) {
  return agree(a.matrix(), b.matrix()) && agree(a.shift(), b.shift());
}

template <Scalar S>
bool agree(const SquaredQH<S>& a, const SquaredQH<S>& b) {
  return agree(a.sigma, b.sigma) && agree(a.tau, b.tau) && agree(a.gamma, b.gamma) &&
         agree(a.theta_sq, b.theta_sq) && agree(a.eta_sq, b.eta_sq) && agree(a.theta_eta, b.theta_eta) &&
         a.theta_sign == b.theta_sign && a.eta_sign == b.eta_sign;
}

template <Scalar S>
S magnitude(const HarnessSpec<S>& h) {
  S m(1);
  const S vals[] = {h.mean.slope, h.mean.intercept, h.cov.c0, h.cov.c1, h.cov.c2, h.cov.c3,
                    h.var_form.chi, h.var_form.lin.x, h.var_form.lin.y, h.var_form.quad.a,
                    h.var_form.quad.b, h.var_form.quad.c, h.var_form.quad.d};
  for (const S& v : vals) m = std::max(m, S(v < S(0) ? S(-v) : v));
  return S(m * m * m);
}

template <Scalar S>
class Suite {
 public:
  Suite(std::uint64_t seed, int trials) : rng_(seed), trials_(trials) {}

  std::vector<IdentityResult> run() {
    std::vector<IdentityResult> out;
    out.push_back(check("composition_law", [&](int i) { return composition(i); }));
    out.push_back(check("map_group_inverse", [&](int) { return map_inverse(); }));
    out.push_back(check("consistency_after_normalize", [&](int) { return consistency(); }));
    out.push_back(check("bridge_invariant", [&](int i) { return bridge_invariant_preserved(i); }));
    out.push_back(check("standardize_bridge_coherence", [&](int) { return coherence(); }));
    out.push_back(check("standardize_round_trip", [&](int) { return round_trip(); }));
    out.push_back(check("scale_inversion_coherence", [&](int) { return scale_inversion(); }));
    out.push_back(check("meixner_sign_identity", [&](int) { return sign_identity(); }));
    out.push_back(check("past_limit_R_to_0", [&](int) { return limit_r_zero(); }));
    out.push_back(check("future_limit_V_to_inf", [&](int) { return limit_v_inf(); }));
    out.push_back(check("meixner_bridge_vs_bridge", [&](int) { return meixner_vs_bridge(); }));
    out.push_back(check("population_variance_identity", [&](int) { return population(); }));
    out.push_back(check("gram_determinant", [&](int) { return determinant(6, true); }));
    return out;
  }

  IdentityResult determinant_check(int max_n, bool corrected) {
    return check(corrected ? "gram_determinant" : "gram_determinant_closed_form",
                 [&](int) { return determinant(max_n, corrected); });
  }

 private:
  std::mt19937_64 rng_;
  int trials_;

  /// Returns an empty string on success, a description otherwise.
  std::string determinant(int max_n, bool corrected) {
    return redraw([&]() -> std::optional<std::string> {
      const int n = std::uniform_int_distribution<int>(1, max_n)(rng_);
      CovMatrix<S> cov{rat(), rat(), rat(), rat()};
      if (!(cov.c2 < cov.c1)) std::swap(cov.c1, cov.c2);
      if (is_zero(S(cov.c1 - cov.c2))) return std::nullopt;
      std::vector<S> times;
      S t(0);
      for (int k = 0; k < n; ++k) {
        t = t + pos_rat();
        times.push_back(t);
      }
      const DeterminantCheck<S> d = cov_psd_check(cov, std::span<const S>(times));
      const S& closed = corrected ? d.corrected_closed_form : d.closed_form;
      // Hadamard bound of the Gram matrix: the scale of cofactor-expansion roundoff.
      double bound = 1;
      std::vector<S> pts{S(0)};
      pts.insert(pts.end(), times.begin(), times.end());
      for (const S& a : pts) {
        double row = 0;
        for (const S& b : pts) row += square(to_double(cov.at(a, b)));
        bound *= std::max(1.0, std::sqrt(row));
      }
      if (!negligible(S(closed - d.brute_force), S(bound))) {
        return "n=" + std::to_string(n) + " closed " + str(closed) + " brute " + str(d.brute_force) +
               (agree(d.corrected_closed_form, d.brute_force) ? " (exponent n-1 agrees)" : "");
      }
      return std::string{};
    });
  }

  IdentityResult check(const std::string& name, const std::function<std::string(int)>& body) {
    IdentityResult r;
    r.name = name;
    for (int i = 0; i < trials_; ++i) {
      std::string msg;
      try {
        msg = body(i);
      } catch (const Error& e) {
        msg = std::string("unexpected ") + std::string(e.name()) + ": " + e.what();
      }
      ++r.trials;
      if (!msg.empty()) {
        if (r.failures++ == 0) r.first_failure = msg;
      }
    }
    return r;
  }

  /// Draws instances until `attempt` yields a verdict (nullopt or a thrown
  /// domain error means the draw was invalid).
  std::string redraw(const std::function<std::optional<std::string>()>& attempt) {
    for (int k = 0; k < kMaxRedraws; ++k) {
      try {
        if (auto v = attempt()) return *v;
      } catch (const Error&) {
      }
    }
    return "no valid instance found";
  }

  S rat(int max_num = 7, int max_den = 5) {
    const long p = std::uniform_int_distribution<long>(-max_num, max_num)(rng_);
    const long q = std::uniform_int_distribution<long>(1, max_den)(rng_);
    return ratio<S>(p, q);
  }
  S pos_rat(int max_num = 7, int max_den = 5) {
    const long p = std::uniform_int_distribution<long>(1, max_num)(rng_);
    const long q = std::uniform_int_distribution<long>(1, max_den)(rng_);
    return ratio<S>(p, q);
  }
  S nonneg_rat() {
    return std::uniform_int_distribution<int>(0, 3)(rng_) == 0 ? S(0) : pos_rat();
  }

  QHParams<S> params(bool allow_gamma_minus_one = false) {
    for (;;) {
      QHParams<S> p;
      p.eta = rat();
      p.theta = rat();
      p.sigma = nonneg_rat();
      p.tau = nonneg_rat();
      p.gamma = allow_gamma_minus_one && std::uniform_int_distribution<int>(0, 9)(rng_) == 0
                    ? S(-1)
                    : S(rat(8, 4) / S(2) + S(1));
      if (S(-1) < p.gamma || p.gamma == S(-1)) {
        if (p.satisfies_infinite_horizon()) return p;
      }
    }
  }

  Interval<S> interval() {
    switch (std::uniform_int_distribution<int>(0, 2)(rng_)) {
      case 0: return Interval<S>::positive_half_line();
      case 1: {
        const S lo = rat();
        return {Endpoint<S>::finite(lo), Endpoint<S>::pos_inf()};
      }
      default: {
        const S lo = rat();
        return Interval<S>::finite(lo, S(lo + pos_rat()));
      }
    }
  }

  HarnessSpec<S> spec() {
    HarnessSpec<S> h;
    h.mean = {rat(), rat()};
    h.cov = {rat(), rat(), rat(), rat()};
    h.var_form.chi = rat();
    h.var_form.lin = {rat(), rat()};
    h.var_form.quad = {rat(), rat(), rat(), rat()};
    h.interval = interval();
    return h;
  }

  AffineMap<S> affine(int det_sign) {
    for (;;) {
      AffineMap<S> f{rat(), rat(), rat(), rat(), rat(), rat()};
      const int s = sign_of(f.det());
      if (s == 0) continue;
      if (s != det_sign) {
        f.a = -f.a;
        f.b = -f.b;
      }
      return f;
    }
  }

  std::string composition(int i) {
    const int sf = (i % 2 == 0) ? 1 : -1;
    const int sg = ((i / 2) % 2 == 0) ? 1 : -1;
    return redraw([&]() -> std::optional<std::string> {
      const HarnessSpec<S> h = spec();
      const AffineMap<S> f = affine(sf);
      const AffineMap<S> g = affine(sg);
      const HarnessSpec<S> stepwise = affine_transform_spec(affine_transform_spec(h, f), g);
      HarnessSpec<S> direct;
      try {
        direct = affine_transform_spec(h, AffineMap<S>::compose(f, g));
      } catch (const Error& e) {
        return std::string("composed map rejected: ") + std::string(e.name());
      }
      if (!agree(stepwise, direct)) {
        return "det signs (" + std::to_string(sf) + "," + std::to_string(sg) + "): stepwise != composed";
      }
      return std::string{};
    });
  }

  std::string map_inverse() {
    const AffineMap<S> f = affine(std::uniform_int_distribution<int>(0, 1)(rng_) ? 1 : -1);
    if (!agree(AffineMap<S>::compose(f, f.inverse()), AffineMap<S>::identity()) ||
        !agree(AffineMap<S>::compose(f.inverse(), f), AffineMap<S>::identity())) {
      return "f o f^-1 != identity";
    }
    return {};
  }

  std::string consistency() {
    return redraw([&]() -> std::optional<std::string> {
      const HarnessSpec<S> h = spec();
      if (is_zero(S(h.cov.c1 - h.cov.c2))) return std::nullopt;
      const HarnessSpec<S> n = normalize_gamma(h);
      if (!negligible(n.consistency_residual(), magnitude(h))) return "residual after normalize " + str(n.consistency_residual());
      if (!agree(n.var_form.rho(), h.var_form.rho())) return std::string("normalize changed rho");
      const HarnessSpec<S> t = affine_transform_spec(n, affine(std::uniform_int_distribution<int>(0, 1)(rng_) ? 1 : -1));
      if (!negligible(t.consistency_residual(), magnitude(t))) return "residual after transform " + str(t.consistency_residual());
      return std::string{};
    });
  }

  std::string bridge_invariant_preserved(int i) {
    return redraw([&]() -> std::optional<std::string> {
      const QHParams<S> p = params(true);
      const std::optional<S> before = bridge_invariant(p);
      auto same = [&](const SquaredQH<S>& q, const char* what) -> std::string {
        const std::optional<S> after = bridge_invariant(q);
        if (before.has_value() != after.has_value()) return std::string(what) + ": gamma=-1 class not preserved";
        if (before && !agree(*before, *after)) {
          return std::string(what) + ": " + str(*before) + " -> " + str(*after);
        }
        return {};
      };
      const S R = nonneg_rat();
      const S V = R + pos_rat();
      switch (i % 3) {
        case 0: return same(bridge_params(p, R, V, rat(), rat()).params, "bridge");
        case 1: return same(condition_on_future(p, V, rat()).params, "future");
        default: return same(condition_on_past(p, pos_rat(), rat()).params, "past");
      }
    });
  }

  std::string coherence() {
    return redraw([&]() -> std::optional<std::string> {
      const QHParams<S> p = params();
      const S R = nonneg_rat();
      const S V = R + pos_rat();
      const BridgeResult<S> br = bridge_params(p, R, V, rat(), rat());
      // (a, b, c, d) = (M sqrt V, -R M sqrt V, -M/sqrt V, M sqrt V) through pairwise products.
      const S m2 = br.data.M_sq;
      FactorGram<S> g;
      g.aa = m2 * V;
      g.ab = -R * m2 * V;
      g.ac = -m2;
      g.ad = m2 * V;
      g.bb = R * R * m2 * V;
      g.bc = R * m2;
      g.bd = -R * m2 * V;
      g.cc = m2 / V;
      g.cd = -m2;
      g.dd = m2 * V;
      g.lead_sign = 1;
      VarianceForm<S> vf;
      vf.chi = S(1);
      vf.lin = {p.theta, p.eta};
      vf.quad = standard_gamma(p);
      const MeanLine<S> mean{br.data.slope, br.data.pivot};
      const SquaredQH<S> via_standardize = harness_to_qh_squared(mean, g, vf).params;
      if (!agree(via_standardize, br.params)) return std::string("bridge parameters differ");
      return std::string{};
    });
  }

  std::string round_trip() {
    return redraw([&]() -> std::optional<std::string> {
      const MeanLine<S> mean{rat(), rat()};
      const ProductFactors<S> f{rat(), rat(), rat(), rat()};
      VarianceForm<S> vf;
      vf.chi = rat();
      vf.lin = {rat(), rat()};
      vf.quad = {rat(), rat(), rat(), rat()};
      const Interval<S> iv = interval();
      const StandardizeResult<S> r = harness_to_qh(mean, f, vf, iv);

      HarnessSpec<S> y = standard_spec(r.params);
      y.interval = r.interval;
      const HarnessSpec<S> back = affine_transform_spec(y, qh_inverse_representation(f, mean));

      HarnessSpec<S> expected;
      expected.mean = mean;
      expected.cov = f.cov();
      expected.var_form.chi = vf.chi / r.chi_tilde;
      expected.var_form.lin = (S(1) / r.chi_tilde) * vf.lin;
      expected.var_form.quad = (S(1) / r.chi_tilde) * vf.quad;
      expected.interval = iv;
      if (!agree(back, normalize_gamma(expected))) return std::string("spec not recovered");
      if (!agree(AffineMap<S>::compose(r.map, qh_inverse_representation(f, mean)),
                        AffineMap<S>::identity())) {
        return std::string("maps are not mutually inverse");
      }
      return std::string{};
    });
  }

  std::string scale_inversion() {
    const QHParams<S> p = params();
    S a = rat();
    while (is_zero(a)) a = rat();
    const AffineMap<S> scale{S(1) / a, S(0), S(0), a, S(0), S(0)};
    if (!agree(affine_transform_spec(standard_spec(p), scale), standard_spec(scale_transform(p, a)))) {
      return "scale by " + str(a);
    }
    const AffineMap<S> inversion{S(0), S(1), S(1), S(0), S(0), S(0)};
    if (!agree(affine_transform_spec(standard_spec(p), inversion), standard_spec(time_inversion(p)))) {
      return "time inversion";
    }
    return {};
  }

  std::string sign_identity() {
    return redraw([&]() -> std::optional<std::string> {
      QHParams<S> p;
      p.theta = rat();
      p.tau = nonneg_rat();
      const S V = pos_rat();
      const S z = rat();
      const SquaredQH<S> y = condition_on_future(p, V, z).params;
      const S r = z / V;
      const S base = p.theta * p.theta - S(4) * p.tau;
      const S upper = y.theta_sq - S(4) * y.tau;
      const S lower = y.eta_sq - S(4) * y.sigma;
      if (!agree(upper, S(V * base / ((V + p.tau) * (S(1) + p.theta * r + p.tau * r * r))))) {
        return std::string("theta_Y^2 - 4 tau_Y closed form");
      }
      if (!agree(lower, S(upper / (V * V)))) return std::string("eta_Y^2 - 4 sigma_Y closed form");
      if (sign_of(upper) != sign_of(base) || sign_of(lower) != sign_of(base)) return std::string("sign mismatch");
      return std::string{};
    });
  }

  std::string limit_r_zero() {
    return redraw([&]() -> std::optional<std::string> {
      const QHParams<S> p = params();
      const S V = pos_rat();
      const S z = rat();
      const SquaredQH<S> one = condition_on_future(p, V, z).params;
      const SquaredQH<S> two = bridge_params(p, S(0), V, S(0), z).params;
      if (!agree(one, two)) return std::string("future != bridge at R=0");
      return std::string{};
    });
  }

  std::string limit_v_inf() {
    return redraw([&]() -> std::optional<std::string> {
      const QHParams<S> p = params();
      const S R = pos_rat();
      const S zr = rat();
      const S zv = rat();
      const SquaredQH<S> past = condition_on_past(p, R, zr).params;
      const int top = ScalarTraits<S>::exact ? 9 : 6;
      double prev = -1;
      S V(1000);
      for (int k = 3; k <= top; ++k, V = V * S(10)) {
        const SquaredQH<S> b = bridge_params(p, R, V, zr, zv).params;
        if (b.theta_sign * past.theta_sign < 0 || b.eta_sign * past.eta_sign < 0) {
          return "sign differs at V=1e" + std::to_string(k);
        }
        const S diffs[6] = {b.sigma - past.sigma, b.tau - past.tau, b.gamma - past.gamma,
                            b.theta_sq - past.theta_sq, b.eta_sq - past.eta_sq,
                            b.theta_eta - past.theta_eta};
        double d = 0;
        for (const S& x : diffs) d = std::max(d, std::abs(to_double(x)));
        if (prev >= 0 && d > prev / 5 + 1e-300 && d > 1e-9) {
          return "difference not shrinking at V=1e" + std::to_string(k);
        }
        prev = d;
      }
      return std::string{};
    });
  }

  std::string meixner_vs_bridge() {
    return redraw([&]() -> std::optional<std::string> {
      QHParams<S> p;
      p.theta = rat();
      p.tau = nonneg_rat();
      const S R = nonneg_rat();
      const S V = R + pos_rat();
      const S zr = rat();
      const S zv = rat();
      const BridgeResult<S> br = bridge_params(p, R, V, zr, zv);
      const SquaredQH<S> m = meixner_bridge(p.theta, p.tau, R, V, br.data.slope);
      // Rescale the bridge by a^2 = 1/V.
      const SquaredQH<S> scaled = scale_transform(br.params, S(S(1) / V), 1);
      if (!agree(scaled, m)) return std::string("meixner bridge != rescaled bridge");
      return std::string{};
    });
  }

  std::string population() {
    return redraw([&]() -> std::optional<std::string> {
      HarnessSpec<S> h = spec();
      if (is_zero(S(h.cov.c1 - h.cov.c2))) return std::nullopt;
      h = normalize_gamma(h);
      const S s = rat();
      const S t = s + pos_rat();
      const S u = t + pos_rat();
      const PopulationMoments<S> pm = population_identities(h.cov, h.var_form, h.mean, s, t, u);
      const S f = eval_F_matrix(h.var_form.quad, s, t, u);
      if (!agree(S(f * pm.e_K), pm.e_var)) return "F E(K) " + str(S(f * pm.e_K)) + " vs " + str(pm.e_var);
      return std::string{};
    });
  }
};

}  // namespace

std::vector<IdentityResult> run_identity_suite(int trials, std::uint64_t seed, ScalarMode mode) {
  if (mode == ScalarMode::Rational) return Suite<Rational>(seed, trials).run();
  return Suite<double>(seed, trials).run();
}

IdentityResult run_determinant_check(int trials, std::uint64_t seed, int max_n, bool corrected) {
  return Suite<Rational>(seed, trials).determinant_check(max_n, corrected);
}

}  // namespace qh
