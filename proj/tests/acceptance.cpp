// One PASS/FAIL line per acceptance criterion; exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qh/core/identities.hpp"
#include "qh/core/ops.hpp"
#include "qh/sim/oracles.hpp"
#include "qh/sim/transform.hpp"
#include "qh/verify/fit.hpp"
#include "qh/verify/moments.hpp"

using namespace qh;
using namespace qh::sim;
using namespace qh::verify;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failures of one criterion; details go to stdout as indented lines.
struct Checker {
  int failures = 0;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      std::printf("    fail: %s\n", what.c_str());
    }
  }
  void close(double a, double b, double tol, const std::string& what) {
    const double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
    std::ostringstream os;
    os.precision(17);
    os << what << ": " << a << " vs " << b;
    check(std::abs(a - b) <= tol * scale, os.str());
  }
};

int g_failed = 0;

void report(int id, const std::string& title, bool pass, double secs, double limit, const std::string& note = "") {
  const bool in_time = limit <= 0 || secs < limit;
  const bool ok = pass && in_time;
  if (!ok) ++g_failed;
  std::printf("%s criterion %d: %s (%.3f s%s)%s%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), secs,
              in_time ? "" : ", over time limit", note.empty() ? "" : ": ", note.c_str());
  std::fflush(stdout);
}

ProcessDescriptor proc(auto p) { return ProcessDescriptor{p}; }

// 1 ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  const auto results = run_identity_suite(100, 20240601, ScalarMode::Rational);
  Checker c;
  for (const auto& r : results) {
    c.check(r.passed(), r.name + " (" + std::to_string(r.failures) + "/" + std::to_string(r.trials) + ") " +
                            r.first_failure);
  }
  report(1, "exact identity suite, rational, 100 trials", c.failures == 0 && !results.empty(), seconds_since(t0), 10,
         std::to_string(results.size()) + " identities");
}

// 2 ---------------------------------------------------------------------------

void poisson_values(Checker& c) {
  // standardized Poisson QH(0,1;0,0;1) conditioned on Z_V = N - V
  QHParams<double> z;
  z.theta = 1;
  for (double V : {0.5, 1.0, 2.0, 3.5}) {
    for (int N = 1; N <= 6; ++N) {
      const auto y = condition_on_future(z, V, N - V).params.resolve();
      const std::string tag = "poisson V=" + std::to_string(V) + " N=" + std::to_string(N);
      c.close(y.theta, std::sqrt(V / N), 1e-12, tag + " theta");
      c.close(y.eta, -1 / std::sqrt(V * N), 1e-12, tag + " eta");
      c.close(y.sigma, 0, 1e-12, tag + " sigma");
      c.close(y.tau, 0, 1e-12, tag + " tau");
      c.close(y.gamma, 1, 1e-12, tag + " gamma");
      // the same parameters from the binomial process standardized directly
      const auto b = params_of(harness_spec_for(transformed(proc(BinomialBridge{N, V}), BinomialTransform{N, V})));
      c.close(b.theta, std::sqrt(V / N), 1e-12, tag + " binomial theta");
      c.close(b.eta, -1 / std::sqrt(V * N), 1e-12, tag + " binomial eta");
      c.close(b.gamma, 1, 1e-12, tag + " binomial gamma");
    }
  }
}

void dirichlet_values(Checker& c) {
  // Dirichlet bridges standardized from their construction
  for (double cc : {0.5, 1.0, 3.0}) {
    for (double V : {0.5, 1.0, 2.0}) {
      const auto y = params_of(harness_spec_for(transformed(proc(DirichletBridge{cc, V}), DirichletTransform{cc, V})));
      const std::string tag = "dirichlet c=" + std::to_string(cc) + " V=" + std::to_string(V);
      c.close(y.theta, 2 * std::sqrt(V / (1 + cc * V)), 1e-12, tag + " theta = 2 sqrt(V/(1+cV))");
      c.close(y.theta, 2 * std::sqrt(y.tau), 1e-12, tag + " theta = 2 sqrt(tau)");
      c.close(y.eta, -2 * std::sqrt(y.sigma), 1e-12, tag + " eta = -2 sqrt(sigma)");
      c.close(y.theta * y.theta, 4 * y.tau, 1e-12, tag + " theta^2 = 4 tau");
      c.close(y.eta * y.eta, 4 * y.sigma, 1e-12, tag + " eta^2 = 4 sigma");
      c.close(y.gamma, 1 - 2 * std::sqrt(y.sigma * y.tau), 1e-12, tag + " gamma");
    }
  }
  // gamma-process route: Meixner bridge of QH(0,2;0,1;1) with span (1-q)/q,
  // q = sqrt(sigma0 tau0), then Z_t = a X_{t/a^2} with a^2 = sqrt(tau0/sigma0)
  for (auto [s0, t0] : {std::pair{0.25, 1.0}, {2.0, 0.125}, {0.3, 0.3}, {0.9, 0.9}}) {
    const double q = std::sqrt(s0 * t0);
    for (double slope : {0.0, 0.5, 2.0}) {
      const auto b = meixner_bridge(2.0, 1.0, 0.0, (1 - q) / q, slope);
      const auto y = scale_transform(b, std::sqrt(t0 / s0), 1).resolve();
      const std::string tag = "meixner sigma0=" + std::to_string(s0) + " tau0=" + std::to_string(t0);
      c.close(y.sigma, s0, 1e-12, tag + " sigma");
      c.close(y.tau, t0, 1e-12, tag + " tau");
      c.close(y.theta, 2 * std::sqrt(t0), 1e-12, tag + " theta");
      c.close(y.eta, -2 * std::sqrt(s0), 1e-12, tag + " eta");
      c.close(y.gamma, 1 - 2 * q, 1e-12, tag + " gamma");
    }
  }
}

StandardizeResult<double> xi_gamma(double beta, double c0, double c1) {
  HarnessSpec<double> h;
  h.mean = {beta, 0};
  h.cov = {c0, c1, 0, 0};
  h.var_form.chi = 0;
  h.var_form.quad = {1, 0, 0, 0};
  h = normalize_gamma(h);
  return harness_to_qh(h.mean, ProductFactors<double>{1, 0, c0, c1}, h.var_form, h.interval);
}

void xi_gamma_values(Checker& c, std::string& note) {
  // X = xi G with E xi = beta, E xi^2 = v^2, covariance as stated: s (v^2 t + beta)
  for (auto [beta, v_sq] : {std::pair{2.0, 5.0}, {1.0, 1.5}, {0.5, 4.0}}) {
    const auto y = xi_gamma(beta, v_sq, beta).params;
    const std::string tag = "xi gamma beta=" + std::to_string(beta) + " v^2=" + std::to_string(v_sq);
    c.close(y.gamma, 1 + 2 * std::sqrt(y.sigma * y.tau), 1e-12, tag + " gamma = 1 + 2 sqrt(sigma tau)");
    c.close(y.sigma * y.tau, v_sq * v_sq / std::pow(beta, 4), 1e-12, tag + " sigma tau = v^4/beta^4");
  }
  // the law of xi G itself has covariance Var(xi) s t + E(xi^2) s; the
  // gamma relation survives, the product becomes Var(xi)^2/beta^4
  int true_ok = 0;
  for (auto [beta, v_sq] : {std::pair{2.0, 5.0}, {1.0, 1.5}, {0.5, 4.0}}) {
    const double var = v_sq - beta * beta;
    const auto y = xi_gamma(beta, var, v_sq).params;
    const double g = 1 + 2 * std::sqrt(y.sigma * y.tau);
    const bool ok = std::abs(y.gamma - g) <= 1e-12 * std::max(1.0, g) &&
                    std::abs(y.sigma * y.tau - var * var / std::pow(beta, 4)) <= 1e-12;
    true_ok += ok;
  }
  note = "true xi G covariance: gamma relation and sigma tau = Var(xi)^2/beta^4 on " + std::to_string(true_ok) +
         "/3 instances";
}

void glue_values(Checker& c) {
  QHParams<double> w;
  c.check(glue_classify(w).tag == GlueCase::Wiener, "glue (0,0;0,0;1) is the Wiener case");
  QHParams<double> bp;
  bp.eta = 1;
  bp.theta = 2;
  const auto v2 = glue_classify(bp);
  c.check(v2.tag == GlueCase::BiPoisson && v2.v && std::abs(*v2.v - 2) < 1e-12, "glue (1,2;0,0;1) is bi-Poisson, V=2");
  QHParams<double> ub;
  ub.eta = 3;
  ub.theta = 3;
  ub.sigma = 1;
  ub.tau = 1;
  ub.gamma = 3;
  const auto v3 = glue_classify(ub);
  c.check(v3.tag == GlueCase::UpperBoundary && v3.v && std::abs(*v3.v - 1) < 1e-12,
          "glue (3,3;1,1;3) is the upper boundary, V=1");
  QHParams<double> ub2;
  ub2.sigma = 1;
  ub2.tau = 4;
  ub2.gamma = 5;
  ub2.eta = 1;
  ub2.theta = 2;
  const auto v4 = glue_classify(ub2);
  c.check(v4.tag == GlueCase::UpperBoundary && v4.v && std::abs(*v4.v - 2) < 1e-12 && v4.boundary_sign < 0,
          "glue (1,2;1,4;5) is the upper boundary, V=2, theta^2 < 4 tau");
  QHParams<double> none;
  none.eta = -1;
  none.theta = 2;
  c.check(glue_classify(none).tag == GlueCase::Infeasible, "glue (-1,2;0,0;1) has no gluing");
}

void criterion2() {
  const auto t0 = Clock::now();
  Checker c;
  std::string note;
  poisson_values(c);
  dirichlet_values(c);
  xi_gamma_values(c, note);
  glue_values(c);
  report(2, "parameter values of the worked examples at 1e-12", c.failures == 0, seconds_since(t0), 1, note);
}

// 3 ---------------------------------------------------------------------------

void criterion3() {
  const auto t0 = Clock::now();
  const auto printed = run_determinant_check(200, 77, 6, false);
  const double secs = seconds_since(t0);
  const auto corrected = run_determinant_check(200, 77, 6, true);
  if (!printed.passed()) std::printf("    fail: %s\n", printed.first_failure.c_str());
  std::ostringstream note;
  note << "closed form with (c1-c2)^n matches " << printed.trials - printed.failures << "/" << printed.trials
       << "; with (c1-c2)^(n-1) matches " << corrected.trials - corrected.failures << "/" << corrected.trials;
  report(3, "Gram determinant closed form, 200 rational instances, n <= 6", printed.passed(), secs, 5, note.str());
}

// 4 ---------------------------------------------------------------------------

void criterion4() {
  const auto t0 = Clock::now();
  Checker c;
  const std::vector<Rational> grid{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
  const Rational &s = grid[0], &t = grid[1], &u = grid[2];
  for (int N = 1; N <= 4; ++N) {
    const auto law = enumerate_binomial_bridge(N, Rational(1), grid);
    const std::string tag = "N=" + std::to_string(N);
    Rational total(0);
    for (const auto& a : law.atoms()) total += a.prob;
    c.check(total == 1, tag + " probabilities sum to 1");
    for (int xs = 0; xs <= N; ++xs) {
      for (int xu = xs; xu <= N; ++xu) {
        if (law.pair_prob(0, xs, 2, xu) == 0) continue;
        const auto [mean, var] = law.conditional(1, 0, xs, 2, xu);
        const Rational want_mean = ((u - t) * Rational(xs) + (t - s) * Rational(xu)) / (u - s);
        const Rational want_var = (u - t) * (t - s) / ((u - s) * (u - s)) * Rational(xu - xs);
        c.check(mean == want_mean, tag + " conditional mean at (" + std::to_string(xs) + "," + std::to_string(xu) + ")");
        c.check(var == want_var, tag + " conditional variance at (" + std::to_string(xs) + "," + std::to_string(xu) + ")");
      }
    }
    // regression on the exact law of Y_t = ((1 + t) X_{t/(1+t)} - t N)/sqrt(N)
    std::vector<double> w;
    const auto e = law_as_ensemble(law, w);
    const std::vector<double> targets{1.0 / 3.0, 1.0, 3.0};
    const auto y = transform_paths(e, BinomialTransform{N, 1.0}, targets);
    auto fit = fit_conditional_variance(y, targets[0], targets[1], targets[2], w);
    QHParams<double> p;
    p.theta = std::sqrt(1.0 / N);
    p.eta = -1 / std::sqrt(static_cast<double>(N));
    const auto pred = predict(p, targets[0], targets[1], targets[2]);
    const auto& v = fit.variance;
    if (v.identifiable[0] && v.identifiable[1] && v.identifiable[2]) {
      c.close(v.fitted[0], pred.variance[0], 1e-12, tag + " fitted F");
      c.close(v.fitted[1] / v.fitted[0], p.theta, 1e-12, tag + " fitted theta");
      c.close(v.fitted[2] / v.fitted[0], p.eta, 1e-12, tag + " fitted eta");
    } else {
      c.check(false, tag + " theta or eta not identifiable on the exact law");
    }
    compare_to_prediction(fit, pred, {targets[0], targets[1], targets[2]}, 3);
    c.check(fit.passed(), tag + " all coefficients match the prediction to 1e-12");
    for (std::size_t j = 0; j < 3; ++j) {
      c.close(fit.linear.fitted[j], pred.linear[j], 1e-12, tag + " linear " + fit.linear.basis[j]);
    }
  }
  report(4, "binomial bridge exact enumeration, N = 1..4", c.failures == 0, seconds_since(t0), 5);
}

// 5 ---------------------------------------------------------------------------

constexpr std::size_t kPaths = 200000;

// Mean zero and covariance min(s, t) within 3 SE.
void check_min_cov(Checker& c, const PathEnsemble& y, const std::string& tag, bool expect) {
  const auto m = estimate_mean_cov(y);
  bool ok = true;
  for (std::size_t i = 0; i < y.times.size(); ++i) {
    ok = ok && std::abs(m.mean[i]) <= 3 * m.mean_se[i];
    for (std::size_t j = 0; j < y.times.size(); ++j) {
      const double want = std::min(y.times[i], y.times[j]);
      const bool cell = std::abs(m.cov_at(i, j) - want) <= 3 * m.cov_se_at(i, j);
      if (expect && !cell) {
        std::printf("    cov(%g,%g) = %.6f +- %.6f, want %g\n", y.times[i], y.times[j], m.cov_at(i, j),
                    m.cov_se_at(i, j), want);
      }
      ok = ok && cell;
    }
  }
  c.check(ok == expect, tag);
}

void criterion5() {
  const auto t0 = Clock::now();
  Checker c;

  // (a) Wiener at (1, 2, 3)
  {
    const auto e = sample_ensemble(proc(Wiener{}), {1, 2, 3}, kPaths, 5001);
    auto fit = fit_conditional_variance(e, 1, 2, 3);
    Prediction pred;
    pred.linear = {0, 0.5, 0.5};
    pred.variance = {0.5, 0, 0, 0, 0, 0};
    compare_to_prediction(fit, pred, {1, 2, 3}, 3);
    c.check(fit.linear.all_pass(), "(a) wiener linear fit (0, 1/2, 1/2)");
    c.check(fit.variance.all_pass(), "(a) wiener variance fit (1/2, 0, ...)");
  }

  // (b) standardized Dirichlet bridge, c = 1, V = 1
  {
    const TransformKind kind = DirichletTransform{1, 1};
    const std::vector<double> targets{1, 2};
    const auto e = sample_ensemble(proc(DirichletBridge{1, 1}), source_grid(kind, targets), kPaths, 5002);
    check_min_cov(c, transform_paths(e, kind, targets), "(b) dirichlet: mean 0, covariance min(s,t)", true);
  }

  // (c) Wiener with drift xi t, xi = +-1: the map (1 - t) X_{t/(1-t)} gives
  // min(s, t); the map (1 - t) X_{1/(1-t)} does not
  {
    const ProcessDescriptor d = proc(WienerDrift{1.0, MixLaw::fair_signs()});
    const std::vector<double> targets{0.25, 0.5, 0.75};
    const TransformKind std_kind = *default_standardization(d);
    const auto e = sample_ensemble(d, source_grid(std_kind, targets), kPaths, 5003);
    check_min_cov(c, transform_paths(e, std_kind, targets), "(c) wiener+drift via X_{t/(1-t)}: covariance min(s,t)",
                  true);
    const TransformKind literal = AffineTransform{AffineMap<double>{0, 1, -1, 1, 0, 0}};
    const auto e2 = sample_ensemble(d, source_grid(literal, targets), kPaths, 5004);
    check_min_cov(c, transform_paths(e2, literal, targets), "(c) wiener+drift via X_{1/(1-t)} is rejected", false);
  }

  // (d) binomial bridge N = 4 Monte Carlo against the exact-law fit
  {
    const std::vector<Rational> grid{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
    std::vector<double> w;
    const auto law_e = law_as_ensemble(enumerate_binomial_bridge(4, Rational(1), grid), w);
    const auto exact = fit_conditional_variance(law_e, 0.25, 0.5, 0.75, w);
    const auto mc_e = sample_ensemble(proc(BinomialBridge{4, 1.0}), {0.25, 0.5, 0.75}, kPaths, 5005);
    auto mc = fit_conditional_variance(mc_e, 0.25, 0.5, 0.75);
    Prediction pred;
    for (std::size_t j = 0; j < 3; ++j) pred.linear[j] = exact.linear.fitted[j];
    for (std::size_t j = 0; j < 6; ++j) pred.variance[j] = exact.variance.fitted[j];
    compare_to_prediction(mc, pred, {0.25, 0.5, 0.75}, 3);
    c.check(mc.variance.all_pass(), "(d) binomial variance fit within 3 SE of the exact law");
  }
  report(5, "Monte Carlo suite, 2e5 paths", c.failures == 0, seconds_since(t0), 60);
}

// 6 ---------------------------------------------------------------------------

void criterion6() {
  const auto t0 = Clock::now();
  Checker c;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> pos(0.05, 3.0), unit(0.01, 0.99), th(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const double sigma = pos(rng);
    const double tau = unit(rng) * unit(rng) / sigma;  // sigma tau < 1
    const double theta = th(rng);
    const double eta = -std::sqrt(sigma) * theta / std::sqrt(tau);
    const auto f = solve_t1i(eta, theta, sigma, tau).forward();
    const std::string tag = "target " + std::to_string(k);
    c.close(f.eta, eta, 1e-12, tag + " eta");
    c.close(f.theta, theta, 1e-12, tag + " theta");
    c.close(f.sigma, sigma, 1e-12, tag + " sigma");
    c.close(f.tau, tau, 1e-12, tag + " tau");
    c.close(f.gamma, 1 - 2 * std::sqrt(sigma * tau), 1e-12, tag + " gamma");
  }
  report(6, "solve_t1i forward verification, 20 targets", c.failures == 0, seconds_since(t0), 1);
}

// 7 ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

void criterion7() {
  const auto t0 = Clock::now();
  Checker c;
  const auto dir = std::filesystem::temp_directory_path() / ("qh_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string bin = QH_BINARY;
  const std::string d = dir.string();
  const std::vector<std::string> threads{"1", "3", "1", "8"};
  std::vector<std::string> sims, sim_cfgs, vers, ver_outs;
  // every run writes to the same paths so the config echoes are comparable
  const std::string csv = d + "/sim.csv", report_json = d + "/verify.json";
  for (const auto& n : threads) {
    const std::string env = "QH_THREADS=" + n + " ";
    const int rs = run(env + bin + " simulate --process 'dirichlet:c=1,V=1' --times 0.25,0.5,0.75 --paths 20000 " +
                       "--seed 7 --out " + csv + " > " + d + "/sim.txt");
    c.check(rs == 0, "simulate exits 0 with QH_THREADS=" + n);
    const int rv = run(env + bin + " verify --ensemble " + csv + " --stu 0.25,0.5,0.75 " +
                       "--process 'dirichlet:c=1,V=1' --out " + report_json + " > " + d + "/verify.txt");
    c.check(rv == 0, "verify exits 0 with QH_THREADS=" + n);
    sims.push_back(slurp(csv) + slurp(d + "/sim.txt"));
    sim_cfgs.push_back(slurp(csv + ".config.json"));
    vers.push_back(slurp(report_json) + slurp(report_json + ".config.json"));
    ver_outs.push_back(slurp(d + "/verify.txt"));
  }
  c.check(!sims[0].empty() && !vers[0].empty(), "outputs are nonempty");
  for (std::size_t k = 1; k < threads.size(); ++k) {
    const std::string tag = " (QH_THREADS=" + threads[k] + " vs " + threads[0] + ")";
    c.check(sims[k] == sims[0], "simulate CSV identical" + tag);
    c.check(sim_cfgs[k] == sim_cfgs[0], "simulate config echo identical" + tag);
    c.check(vers[k] == vers[0], "verify report identical" + tag);
    c.check(ver_outs[k] == ver_outs[0], "verify stdout identical" + tag);
  }
  std::filesystem::remove_all(dir);
  report(7, "byte-identical simulate and verify across QH_THREADS", c.failures == 0, seconds_since(t0), 0);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                     criterion5, criterion6, criterion7};
  int id = 1;
  for (const auto& f : criteria) {
    try {
      f();
    } catch (const std::exception& ex) {
      report(id, "aborted", false, 0, 0, ex.what());
    }
    ++id;
  }
  std::printf("%d of 7 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
