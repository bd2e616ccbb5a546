#include "qh/sim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qh/sim/rng.hpp"
#include "qh/sim/transform.hpp"

namespace qh::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double draw_mix(const MixLaw& law, PathRng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0;
  for (std::size_t i = 0; i + 1 < law.values.size(); ++i) {
    acc += law.probs[i];
    if (u < acc) return law.values[i];
  }
  return law.values.back();
}

double draw_gamma(double shape, PathRng& rng) {
  if (shape <= 0) return 0.0;
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

// Beta(a, b) as G_a/(G_a + G_b); b = 0 is the point mass at 1.
double draw_beta(double a, double b, PathRng& rng) {
  if (b <= 0) return 1.0;
  if (a <= 0) return 0.0;
  const double x = draw_gamma(a, rng);
  const double y = draw_gamma(b, rng);
  if (x + y > 0) return x / (x + y);
  // both gammas underflowed: the beta law is then concentrated near {0, 1}
  return std::bernoulli_distribution(a / (a + b))(rng) ? 1.0 : 0.0;
}

int draw_binomial(int n, double p, PathRng& rng) {
  if (n <= 0 || p <= 0) return 0;
  if (p >= 1) return n;
  return std::binomial_distribution<int>(n, p)(rng);
}

double draw_poisson(double mean, PathRng& rng) {
  if (mean <= 0) return 0.0;
  return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

// Brownian path on times (all >= t0) started from 0 at t0.
void wiener_from(double t0, std::span<const double> times, PathRng& rng, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double prev_t = t0;
  double x = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    x += std::sqrt(times[k] - prev_t) * normal(rng);
    prev_t = times[k];
    out[k] = x;
  }
}

// Precomputed sampling recipe: source grids of nested transforms are built once.
struct Plan {
  const ProcessDescriptor* d = nullptr;
  std::vector<double> times;
  std::vector<double> src_times;  // transformed processes only
  std::unique_ptr<Plan> base;
};

std::unique_ptr<Plan> make_plan(const ProcessDescriptor& d, std::vector<double> times) {
  auto plan = std::make_unique<Plan>();
  plan->d = &d;
  plan->times = std::move(times);
  if (const auto* t = std::get_if<Transformed>(&d.process)) {
    plan->src_times = source_grid(t->kind, plan->times);
    plan->base = make_plan(*t->base, plan->src_times);
  }
  return plan;
}

void run_plan(const Plan& plan, PathRng& rng, std::span<double> out, std::vector<double>& scratch) {
  const std::span<const double> times(plan.times);
  std::visit(overloaded{
                 [&](const Wiener&) { wiener_from(0.0, times, rng, out); },
                 [&](const WienerDrift& p) {
                   const double xi = p.v * draw_mix(p.xi_law, rng);
                   wiener_from(0.0, times, rng, out);
                   for (std::size_t k = 0; k < times.size(); ++k) out[k] += xi * times[k];
                 },
                 [&](const WienerShift& p) {
                   const double xi = p.v * draw_mix(p.xi_law, rng);
                   wiener_from(p.v * p.v, times, rng, out);
                   for (double& x : out) x += xi;
                 },
                 [&](const Poisson& p) {
                   double prev = 0, x = 0;
                   for (std::size_t k = 0; k < times.size(); ++k) {
                     x += draw_poisson(p.lambda * (times[k] - prev), rng);
                     prev = times[k];
                     out[k] = x;
                   }
                 },
                 [&](const Gamma& p) {
                   double prev = 0, x = 0;
                   for (std::size_t k = 0; k < times.size(); ++k) {
                     x += draw_gamma(p.alpha * (times[k] - prev), rng) / p.beta;
                     prev = times[k];
                     out[k] = x;
                   }
                 },
                 [&](const DirichletBridge& p) {
                   double prev = 0, x = 0;
                   for (std::size_t k = 0; k < times.size(); ++k) {
                     const double step = draw_beta(p.c * (times[k] - prev), p.c * (p.V - times[k]), rng);
                     x = std::min(1.0, x + (1.0 - x) * step);
                     prev = times[k];
                     out[k] = x;
                   }
                 },
                 [&](const BinomialBridge& p) {
                   double prev = 0;
                   int x = 0;
                   for (std::size_t k = 0; k < times.size(); ++k) {
                     const double q = times[k] >= p.V ? 1.0 : (times[k] - prev) / (p.V - prev);
                     x += draw_binomial(p.N - x, q, rng);
                     prev = times[k];
                     out[k] = x;
                   }
                 },
                 [&](const GammaRandomScale& p) {
                   const double xi = draw_mix(p.xi_law, rng);
                   double prev = 0, g = 0;
                   for (std::size_t k = 0; k < times.size(); ++k) {
                     g += draw_gamma(times[k] - prev, rng);
                     prev = times[k];
                     out[k] = xi * g;
                   }
                 },
                 [&](const Transformed& t) {
                   std::vector<double> src(plan.src_times.size());
                   run_plan(*plan.base, rng, src, scratch);
                   transform_row(t.kind, plan.src_times, src, times, out);
                 },
             },
             plan.d->process);
}

}  // namespace

std::size_t PathEnsemble::index_of(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) raise(ErrorCode::GridMismatch, "time not on the ensemble grid");
  return static_cast<std::size_t>(it - times.begin());
}

void sample_path(const ProcessDescriptor& d, std::span<const double> times, std::uint64_t seed,
                 std::uint64_t index, std::span<double> out) {
  const auto plan = make_plan(d, std::vector<double>(times.begin(), times.end()));
  PathRng rng = path_rng(seed, index);
  std::vector<double> scratch;
  run_plan(*plan, rng, out, scratch);
}

PathEnsemble sample_ensemble(const ProcessDescriptor& d, const std::vector<double>& times, std::size_t n_paths,
                             std::uint64_t seed, Exec exec) {
  d.validate();
  if (n_paths < 1) raise(ErrorCode::InvalidDescriptor, "n_paths must be at least 1");
  check_grid(d, times);
  PathEnsemble e;
  e.times = times;
  e.n_paths = n_paths;
  e.seed = seed;
  e.descriptor = d;
  e.values.assign(n_paths * times.size(), 0.0);
  const auto plan = make_plan(e.descriptor, times);
  const std::size_t m = times.size();

  std::size_t first_bad = std::numeric_limits<std::size_t>::max();
  std::exception_ptr first_error;
  auto kernel = [&](std::size_t i) {
    try {
      PathRng rng = path_rng(seed, i);
      std::vector<double> scratch;
      run_plan(*plan, rng, std::span<double>(e.values.data() + i * m, m), scratch);
    } catch (const Error& err) {
#pragma omp critical(qh_sample_error)
      if (i < first_bad) {
        first_bad = i;
        first_error = std::make_exception_ptr(
            Error(err.code(), "path " + std::to_string(i) + ": " + err.what()));
      }
    }
  };

  const auto n = static_cast<std::int64_t>(n_paths);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) kernel(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i) kernel(static_cast<std::size_t>(i));
  }
  if (first_error) std::rethrow_exception(first_error);
  return e;
}

}  // namespace qh::sim
