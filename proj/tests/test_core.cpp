#include <doctest.h>

#include <cmath>
#include <random>

#include "qh/core/identities.hpp"
#include "qh/core/io.hpp"
#include "qh/core/maps.hpp"
#include "qh/core/ops.hpp"

using namespace qh;
using Q = Rational;

namespace {

QHParams<double> qhp(double eta, double theta, double sigma, double tau, double gamma) {
  QHParams<double> p;
  p.eta = eta;
  p.theta = theta;
  p.sigma = sigma;
  p.tau = tau;
  p.gamma = gamma;
  return p;
}

QHParams<Q> qhq(Q eta, Q theta, Q sigma, Q tau, Q gamma) {
  QHParams<Q> p;
  p.eta = eta;
  p.theta = theta;
  p.sigma = sigma;
  p.tau = tau;
  p.gamma = gamma;
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("eval_K") {
  CHECK(eval_K(qhp(0, 0, 0, 0, 1), DeltaPair<double>{7, -3}) == 1.0);
  CHECK(eval_K(qhp(0, 1, 0, 0, 1), DeltaPair<double>{2, 0}) == 3.0);
  CHECK(eval_K(qhp(0, 2, 0, 1, 1), DeltaPair<double>{1, 1}) == 4.0);
}

TEST_CASE("eval_F and its matrix form") {
  CHECK(eval_F(qhq(0, 0, 0, 0, 1), Q(1), Q(2), Q(3)) == Q(1, 2));
  CHECK(eval_F(qhq(0, 0, 0, 0, -1), Q(1), Q(2), Q(3)) == Q(1, 4));
  const QHParams<Q> p = qhq(0, 0, 0, 1, 1);
  CHECK(eval_F(p, Q(1), Q(2), Q(3)) == Q(1, 3));
  CHECK(eval_F_matrix(Mat2<Q>{1, -1, 1, 0}, Q(1), Q(2), Q(3)) == Q(1, 3));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const QHParams<double> r = qhp(u(rng) - 1, u(rng) - 1, u(rng), u(rng), u(rng) - 1);
    const double s = u(rng), t = s + u(rng) + 0.1, w = t + u(rng) + 0.1;
    CHECK(eval_F(r, s, t, w) == doctest::Approx(eval_F_matrix(standard_gamma(r), s, t, w)).epsilon(1e-12));
  }
  CHECK(code_of([] { eval_F(qhp(0, 0, 0, 1, 2), 3.0, 4.0, 5.0); }) == ErrorCode::ZeroDenominator);
}

TEST_CASE("cond_cov_factor") {
  const QHParams<Q> w = qhq(0, 0, 0, 0, 1);
  CHECK(cond_cov_factor(w, Q(0), Q(1), Q(2), Q(3), DeltaPair<Q>{0, 0}) == Q(1, 3));

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> k(1, 6);
  for (int i = 0; i < 20; ++i) {
    const QHParams<Q> p = qhq(Q(k(rng), 3), Q(k(rng), 4), Q(k(rng), 5), Q(k(rng), 2), Q(1, k(rng)));
    const Q s(k(rng), 7);
    const Q t = s + Q(k(rng), 3);
    const Q u = t + Q(k(rng), 2);
    const DeltaPair<Q> d{Q(k(rng) - 3, 2), Q(k(rng) - 3, 5)};
    CHECK(cond_cov_factor(p, s, t, t, u, d) == eval_F(p, s, t, u) * eval_K(p, d));
  }
  // At a root of K the factor vanishes: K = 1 + theta Delta with theta = 1, Delta = -1.
  CHECK(cond_cov_factor(qhq(0, 1, 0, 0, 1), Q(0), Q(1), Q(2), Q(3), DeltaPair<Q>{-1, 0}) == 0);
}

TEST_CASE("elementary transforms") {
  CHECK(scale_transform(qhq(0, 2, 0, 1, 1), Q(2)) == qhq(0, 4, 0, 4, 1));
  const QHParams<Q> p = qhq(Q(1, 3), Q(-2, 5), Q(7, 2), Q(1, 9), Q(1, 2));
  CHECK(scale_transform(p, Q(1)) == p);
  CHECK(scale_transform(scale_transform(p, Q(3, 7)), Q(7, 3)) == p);
  CHECK(code_of([&] { scale_transform(p, Q(0)); }) == ErrorCode::ZeroScale);

  CHECK(time_inversion(qhq(1, 2, 3, 4, Q(1, 2))) == qhq(2, 1, 4, 3, Q(1, 2)));
  CHECK(time_inversion(time_inversion(p)) == p);
  CHECK(time_inversion(qhq(0, 0, 0, 0, 1)) == qhq(0, 0, 0, 0, 1));
}

TEST_CASE("affine_transform_spec examples") {
  const QHParams<Q> p = qhq(Q(1, 2), Q(3), Q(2), Q(5, 3), Q(1, 3));
  const HarnessSpec<Q> h = standard_spec(p);
  CHECK(affine_transform_spec(h, AffineMap<Q>::identity()) == h);

  const HarnessSpec<Q> inv = affine_transform_spec(h, AffineMap<Q>{0, 1, 1, 0, 0, 0});
  CHECK(inv.cov.matrix() == Mat2<Q>{0, 1, 0, 0});
  CHECK(inv.interval == Interval<Q>::positive_half_line());
  CHECK(params_of(inv) == time_inversion(p));

  const Q a(3, 2);
  const HarnessSpec<Q> sc = affine_transform_spec(h, AffineMap<Q>{1 / a, 0, 0, a, 0, 0});
  CHECK(sc.var_form.quad == Mat2<Q>{a * a * p.tau, -1, p.gamma, p.sigma / (a * a)});

  // Pole of the inverse time change inside (0, inf): t -> t/(1 - t) has its pole at 1.
  CHECK(code_of([&] { affine_transform_spec(h, AffineMap<Q>{1, 0, 1, 1, 0, 0}); }) == ErrorCode::PoleInInterval);
  CHECK(code_of([&] { affine_transform_spec(h, AffineMap<Q>{1, 1, 1, 1, 0, 0}); }) == ErrorCode::SingularMap);
}

TEST_CASE("normalize_gamma") {
  HarnessSpec<Q> h = standard_spec(qhq(1, 2, 3, 4, Q(1, 2)));
  h.var_form.quad.b = 0;
  h.var_form.quad.c = Q(-1, 2);
  const HarnessSpec<Q> n = normalize_gamma(h);
  CHECK(n.var_form.quad.b == -1);
  CHECK(n.var_form.quad.c == Q(1, 2));
  CHECK(normalize_gamma(n) == n);
  HarnessSpec<Q> bad = h;
  bad.cov = {0, 1, 1, 0};
  CHECK(code_of([&] { normalize_gamma(bad); }) == ErrorCode::DegenerateCovariance);
}

TEST_CASE("harness_to_qh examples") {
  // Wiener plus xi t with v = 1: covariance s(1 + t).
  VarianceForm<Q> vf;
  vf.chi = 1;
  vf.quad = {0, 0, 0, 0};
  const StandardizeResult<Q> w = harness_to_qh(MeanLine<Q>{}, ProductFactors<Q>{1, 0, 1, 1}, vf);
  CHECK(w.params == qhq(0, 0, 0, 0, 1));
  CHECK(w.interval == Interval<Q>::finite(0, 1));
  CHECK(w.map == AffineMap<Q>{1, 0, -1, 1, 0, 0});

  const StandardizeResult<Q> id = harness_to_qh(MeanLine<Q>{}, ProductFactors<Q>{1, 0, 0, 1}, vf);
  CHECK(id.params == qhq(0, 0, 0, 0, 1));
  CHECK(id.map == AffineMap<Q>::identity());

  // xi * gamma process: mean beta t, tau = 1 only, (a, b, c, d) = (v, 0, v, beta/v).
  for (double v : {0.5, 1.0, 2.0}) {
    for (double beta : {0.7, 1.5}) {
      VarianceForm<double> g;
      g.chi = 0;
      g.quad = {1, 0, 0, 0};
      const StandardizeResult<double> r =
          harness_to_qh(MeanLine<double>{beta, 0}, ProductFactors<double>{v, 0, v, beta / v}, g);
      CHECK(r.params.eta == doctest::Approx(2 * v / beta).epsilon(1e-12));
      CHECK(r.params.theta == doctest::Approx(2 * v / beta).epsilon(1e-12));
      CHECK(r.params.sigma == doctest::Approx(v * v / (beta * beta)).epsilon(1e-12));
      CHECK(r.params.tau == doctest::Approx(v * v / (beta * beta)).epsilon(1e-12));
      CHECK(r.params.gamma == doctest::Approx(1 + 2 * v * v / (beta * beta)).epsilon(1e-12));
    }
  }

  CHECK(code_of([&] { harness_to_qh(MeanLine<Q>{}, ProductFactors<Q>{0, 1, 1, 0}, vf); }) == ErrorCode::WrongOrientation);
  VarianceForm<Q> zero;
  zero.chi = 0;
  CHECK(code_of([&] { harness_to_qh(MeanLine<Q>{}, ProductFactors<Q>{1, 0, 0, 1}, zero); }) == ErrorCode::NonpositiveChiTilde);
  // (t - 1)(0 t + 1) changes sign on (0, inf)
  CHECK(code_of([&] { harness_to_qh(MeanLine<Q>{}, ProductFactors<Q>{1, -1, 0, 1}, vf); }) == ErrorCode::SignViolation);
}

TEST_CASE("inverse representation") {
  VarianceForm<Q> vf;
  vf.quad = {0, 0, 0, 0};
  const ProductFactors<Q> f{1, 0, 1, 1};
  const MeanLine<Q> mean{};
  CHECK(qh_inverse_representation(ProductFactors<Q>{1, 0, 0, 1}, mean) == AffineMap<Q>::identity());
  const StandardizeResult<Q> r = harness_to_qh(mean, f, vf);
  HarnessSpec<Q> y = standard_spec(r.params);
  y.interval = r.interval;
  const HarnessSpec<Q> x = affine_transform_spec(y, qh_inverse_representation(f, mean));
  CHECK(x.cov == CovMatrix<Q>::from_product(1, 0, 1, 1));
  CHECK(x.interval == Interval<Q>::positive_half_line());
  CHECK(code_of([&] { qh_inverse_representation(ProductFactors<Q>{1, 1, 1, 1}, mean); }) == ErrorCode::SingularMap);
}

TEST_CASE("bridge_params") {
  const QHParams<Q> w = qhq(0, 0, 0, 0, 1);
  const BridgeResult<Q> b = bridge_params(w, Q(1), Q(3), Q(2), Q(-1));
  CHECK(b.params == SquaredQH<Q>::from_params(w));

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> k(1, 6);
  for (int i = 0; i < 50; ++i) {
    const QHParams<Q> p = qhq(Q(k(rng) - 3, 2), Q(k(rng) - 3, 3), Q(k(rng), 4), Q(k(rng), 5), Q(k(rng) - 2, 4));
    const Q R(k(rng), 3);
    const Q V = R + Q(k(rng), 2);
    try {
      const BridgeResult<Q> r = bridge_params(p, R, V, Q(k(rng) - 3, 2), Q(k(rng) - 3, 2));
      CHECK(r.params.gamma - 1 ==
            ((p.gamma - 1) * (V + R) - 2 * p.sigma * R * V - 2 * p.tau) / r.data.denom);
      CHECK(r.params.gamma + 1 == (V - R) * (p.gamma + 1) / r.data.denom);
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::NonpositiveK || e.code() == ErrorCode::NonpositiveDenominator));
    }
  }
  CHECK(code_of([&] { bridge_params(qhq(0, 0, 0, 0, 3), Q(2), Q(3), Q(0), Q(0)); }) ==
        ErrorCode::NonpositiveDenominator);
  CHECK(code_of([&] { bridge_params(qhq(0, 1, 0, 0, 1), Q(0), Q(1), Q(0), Q(-1)); }) == ErrorCode::NonpositiveK);
}

TEST_CASE("one-sided conditioning") {
  const QHParams<Q> w = qhq(0, 0, 0, 0, 1);
  CHECK(condition_on_future(w, Q(5), Q(0)).params == SquaredQH<Q>::from_params(w));
  CHECK(condition_on_past(w, Q(1), Q(5)).params == SquaredQH<Q>::from_params(w));
  const OneSidedResult<Q> lev = condition_on_past(qhq(Q(1, 3), 2, 0, Q(3, 2), 1), Q(4), Q(0));
  CHECK(lev.params.tau == Q(3, 2));
  CHECK(lev.params.sigma == 0);
  CHECK(lev.params.gamma == 1);

  // Poisson conditioned on X_V = N: theta_Y = sqrt(V/N), eta_Y = -1/sqrt(VN).
  for (int N = 1; N <= 5; ++N) {
    for (double V : {0.5, 1.0, 3.0}) {
      const QHParams<double> y = condition_on_future(qhp(0, 1, 0, 0, 1), V, N - V).params.resolve();
      CHECK(y.theta == doctest::Approx(std::sqrt(V / N)).epsilon(1e-12));
      CHECK(y.eta == doctest::Approx(-1 / std::sqrt(V * N)).epsilon(1e-12));
      CHECK(y.sigma == 0.0);
      CHECK(y.tau == 0.0);
      CHECK(y.gamma == 1.0);
    }
  }
  CHECK(code_of([] { condition_on_future(qhp(0, 1, 0, 0, 1), 1.0, -1.0); }) == ErrorCode::NonpositiveKappaSq);
}

TEST_CASE("meixner_bridge") {
  for (int N = 1; N <= 4; ++N) {
    const double V = 2.0;
    const QHParams<double> y = meixner_bridge(1.0, 0.0, 0.0, V, (N - V) / V).resolve();
    CHECK(y.theta == doctest::Approx(1 / std::sqrt(N)).epsilon(1e-12));
    CHECK(y.eta == doctest::Approx(-1 / std::sqrt(N)).epsilon(1e-12));
  }
  for (Q d : {Q(0), Q(1, 3), Q(2)}) {
    const SquaredQH<Q> g = meixner_bridge(Q(2), Q(1), Q(0), Q(1, 4), d);
    CHECK(g.gamma == Q(-3, 5));
    CHECK(g.sigma == Q(4, 5));
    CHECK(g.tau == Q(4, 5));
    CHECK(g.theta_sq == 4 * g.tau);
  }
  const SquaredQH<Q> z = meixner_bridge(Q(0), Q(0), Q(0), Q(1), Q(3));
  CHECK(z.theta_sq == 0);
  CHECK(z.eta_sq == 0);
  CHECK(z.gamma == 1);
  CHECK(code_of([] { meixner_bridge(1.0, 0.0, 0.0, 1.0, -1.0); }) == ErrorCode::NonpositiveK);
}

TEST_CASE("bridge_invariant") {
  CHECK(*bridge_invariant(qhq(5, 1, 0, 0, 1)) == 0);
  CHECK(*bridge_invariant(qhq(0, 0, 1, 1, 0)) == -3);
  CHECK_FALSE(bridge_invariant(qhq(0, 0, 1, 1, -1)).has_value());
}

TEST_CASE("glue_classify") {
  QHParams<Q> p = qhq(0, 0, 0, 0, 1);
  CHECK(glue_classify(p).tag == GlueCase::Wiener);
  const GlueVerdict<Q> bp = glue_classify(qhq(1, 2, 0, 0, 1));
  CHECK(bp.tag == GlueCase::BiPoisson);
  CHECK(*bp.v == 2);
  const GlueVerdict<Q> ub = glue_classify(qhq(3, 3, 1, 1, 3));
  CHECK(ub.tag == GlueCase::UpperBoundary);
  CHECK(*ub.v_squared == 1);
  CHECK(ub.boundary_sign == 1);
  const GlueVerdict<double> ubd = glue_classify(qhp(3, 3, 1, 1, 3));
  CHECK(*ubd.v == doctest::Approx(1.0));
  CHECK(glue_classify(qhq(-1, 2, 0, 0, 1)).tag == GlueCase::Infeasible);
  CHECK(glue_classify(qhq(0, 0, 1, 1, 0)).tag == GlueCase::Infeasible);
  CHECK(code_of([] { glue_classify(qhq(0, 0, 1, 1, 4)); }) == ErrorCode::InvalidParams);
  CHECK(std::string(glue_case_name(GlueCase::BiPoisson)) == "bi_poisson");
}

TEST_CASE("solve_t1i") {
  const T1IConstruction c = solve_t1i(-1, 1, 0.25, 0.25);
  const QHParams<double> f = c.forward();
  CHECK(f.eta == doctest::Approx(-1).epsilon(1e-12));
  CHECK(f.theta == doctest::Approx(1).epsilon(1e-12));
  CHECK(f.sigma == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.tau == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(f.gamma == doctest::Approx(0.5).epsilon(1e-12));

  // Dirichlet class: sigma tau = 1/4, theta = 2 sqrt(tau), eta = -2 sqrt(sigma).
  const double sigma = 0.125, tau = 2.0;
  const QHParams<double> d = solve_t1i(-2 * std::sqrt(sigma), 2 * std::sqrt(tau), sigma, tau).forward();
  CHECK(d.theta == doctest::Approx(2 * std::sqrt(tau)).epsilon(1e-12));
  CHECK(d.eta == doctest::Approx(-2 * std::sqrt(sigma)).epsilon(1e-12));
  CHECK(d.gamma == doctest::Approx(0.0).epsilon(1e-12));

  const QHParams<double> neg = solve_t1i(1.5, -1.5, 0.3, 0.3).forward();
  CHECK(neg.theta == doctest::Approx(-1.5).epsilon(1e-12));

  CHECK(code_of([] { solve_t1i(1, 1, 0.25, 0.25); }) == ErrorCode::InfeasibleTarget);
  CHECK(code_of([] { solve_t1i(0, 0, 2, 2); }) == ErrorCode::InfeasibleTarget);
}

TEST_CASE("population_identities") {
  const HarnessSpec<Q> w = standard_spec(qhq(0, 0, 0, 0, 1));
  const PopulationMoments<Q> pm = population_identities(w.cov, w.var_form, w.mean, Q(1), Q(2), Q(3));
  const Mat2<Q> j = Mat2<Q>::j();
  CHECK(pm.cov_delta == Q(1, 2) * outer(j * time_vec(Q(3)), j * time_vec(Q(1))) + Mat2<Q>{0, 0, 1, 0});
  CHECK(pm.e_var == Q(1, 2));
  CHECK(pm.e_K == 1);
  CHECK(eval_F(qhq(0, 0, 0, 0, 1), Q(1), Q(2), Q(3)) * pm.e_K == pm.e_var);
}

TEST_CASE("cov_psd_check") {
  const std::vector<Q> t3{1, 2, 3};
  const DeterminantCheck<Q> m = cov_psd_check(CovMatrix<Q>{0, 1, 0, 0}, std::span<const Q>(t3));
  CHECK(m.closed_form == 0);
  CHECK(m.brute_force == 0);
  const std::vector<Q> t2{1, 2};
  const DeterminantCheck<Q> d = cov_psd_check(CovMatrix<Q>{0, 1, 0, 1}, std::span<const Q>(t2));
  CHECK(d.closed_form == 1);
  CHECK(d.brute_force == 1);
  // c1 - c2 = 2: the expansion carries (c1 - c2)^(n-1), one factor fewer than closed_form.
  const std::vector<Q> t3b{Q(1, 2), 2, Q(7, 3)};
  const DeterminantCheck<Q> g = cov_psd_check(CovMatrix<Q>{Q(1, 3), 3, 1, 2}, std::span<const Q>(t3b));
  CHECK(g.corrected_closed_form == g.brute_force);
  CHECK(g.closed_form == 2 * g.brute_force);
  CHECK(run_determinant_check(50, 3, 6, true).passed());
  const std::vector<Q> t9{1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(code_of([&] { cov_psd_check(CovMatrix<Q>{}, std::span<const Q>(t9)); }) == ErrorCode::TooLarge);
}

TEST_CASE("maps agree with the conditioning transforms") {
  // The Dirichlet map is the bridge map for the Dirichlet harness up to M; check its shape.
  const AffineMap<double> f = dirichlet_map(1.0, 1.0);
  CHECK(f.mobius(1.0) == doctest::Approx(0.5));
  CHECK(f.space_scale(1.0) == doctest::Approx(std::sqrt(2.0) * 2));
  const AffineMap<double> b = binomial_map(2, 1.0);
  CHECK(b.apply(1.0, 1.0) == doctest::Approx((2 * 1.0 - 2) / std::sqrt(2.0)));
}

TEST_CASE("json round trips") {
  const json j = json::parse(R"({"eta":"1/3","theta":2,"sigma":0.25,"tau":0,"gamma":1})");
  const QHParams<Q> p = params_from_json<Q>(j);
  CHECK(p.eta == Q(1, 3));
  CHECK(p.sigma == Q(1, 4));
  CHECK(params_from_json<Q>(params_to_json(p)) == p);
  CHECK(parse_rational("-1.5e-1") == Q(-3, 20));
  CHECK(parse_rational("6/4") == Q(3, 2));

  const json s = json::parse(R"({"mean":{"slope":1,"intercept":0},"cov":{"c0":0,"c1":1,"c2":0,"c3":0},
                                 "chi":1,"theta":1,"eta":0,"tau":0,"sigma":0,"gamma":1,"interval":[0,"inf"]})");
  const HarnessSpec<Q> h = spec_from_json<Q>(s);
  CHECK(h.normalized());
  CHECK(h.interval == Interval<Q>::positive_half_line());
  CHECK(spec_from_json<Q>(spec_to_json(h)) == h);
  CHECK(affine_from_csv<Q>("1,0,1/2,1,0,-1") == AffineMap<Q>{1, 0, Q(1, 2), 1, 0, -1});
  CHECK(code_of([] { parse_rational("abc"); }) == ErrorCode::ParseError);
}

TEST_CASE("identity suite") {
  for (const IdentityResult& r : run_identity_suite(20, 99, ScalarMode::Rational)) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.passed());
  }
  for (const IdentityResult& r : run_identity_suite(20, 99, ScalarMode::Float)) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.passed());
  }
}
