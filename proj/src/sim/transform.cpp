#include "qh/sim/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qh/core/maps.hpp"
#include "qh/core/ops.hpp"

namespace qh::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t find_time(std::span<const double> times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  if (it != times.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - times.begin());
  if (it != times.begin() && std::abs(*(it - 1) - t) <= tol) return static_cast<std::size_t>(it - 1 - times.begin());
  raise(ErrorCode::GridMismatch, "source time " + std::to_string(t) + " missing from the grid");
}

double value_at(std::span<const double> times, std::span<const double> row, double t) {
  if (t == 0.0) return 0.0;
  return row[find_time(times, t)];
}

AffineMap<double> path_map(const TransformKind& kind, std::span<const double> times, std::span<const double> row) {
  if (const auto f = fixed_map(kind)) return *f;
  return std::visit(overloaded{
                        [&](const BridgeTransform& b) {
                          const double z_r = value_at(times, row, b.R);
                          const double z_v = value_at(times, row, b.V);
                          double m = 0;
                          if (b.M) {
                            m = *b.M;
                          } else {
                            m = bridge_params(b.params, b.R, b.V, z_r, z_v).data.M();
                          }
                          return bridge_map(b.R, b.V, z_r, z_v, m);
                        },
                        [&](const FutureTransform& f) {
                          const double z_v = value_at(times, row, f.V);
                          const auto r = condition_on_future(f.params, f.V, z_v);
                          return future_map(f.V, z_v, std::sqrt(r.scale_sq));
                        },
                        [&](const PastTransform& p) {
                          const double z_r = value_at(times, row, p.R);
                          const auto r = condition_on_past(p.params, p.R, z_r);
                          return past_map(p.R, z_r, std::sqrt(r.scale_sq));
                        },
                        [](const auto&) -> AffineMap<double> { raise(ErrorCode::InvalidDescriptor); },
                    },
                    kind);
}

}  // namespace

void transform_row(const TransformKind& kind, std::span<const double> src_times, std::span<const double> src,
                   std::span<const double> targets, std::span<double> out) {
  const AffineMap<double> f = path_map(kind, src_times, src);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double t = targets[k];
    out[k] = f.apply(t, src[find_time(src_times, source_time(kind, t))]);
  }
}

PathEnsemble transform_paths(const PathEnsemble& e, const TransformKind& kind, const std::vector<double>& targets,
                             Exec exec) {
  if (e.n_paths == 0) raise(ErrorCode::EmptyEnsemble);
  for (double t : source_grid(kind, targets)) find_time(e.times, t);
  PathEnsemble out;
  out.times = targets;
  out.n_paths = e.n_paths;
  out.seed = e.seed;
  out.descriptor = transformed(e.descriptor, kind);
  out.values.assign(e.n_paths * targets.size(), 0.0);
  const std::size_t m = targets.size();

  std::size_t first_bad = std::numeric_limits<std::size_t>::max();
  std::exception_ptr first_error;
  auto kernel = [&](std::size_t i) {
    try {
      transform_row(kind, e.times, e.row(i), targets, std::span<double>(out.values.data() + i * m, m));
    } catch (const Error& err) {
#pragma omp critical(qh_transform_error)
      if (i < first_bad) {
        first_bad = i;
        first_error = std::make_exception_ptr(Error(err.code(), "path " + std::to_string(i) + ": " + err.what()));
      }
    }
  };
  const auto n = static_cast<std::int64_t>(e.n_paths);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) kernel(static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i) kernel(static_cast<std::size_t>(i));
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace qh::sim
