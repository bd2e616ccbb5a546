#include "qh/verify/fit.hpp"

#include <algorithm>
#include <cmath>

namespace qh::verify {

namespace {

std::size_t column_of(const sim::PathEnsemble& e, double t) {
  const auto it = std::min_element(e.times.begin(), e.times.end(),
                                   [&](double a, double b) { return std::abs(a - t) < std::abs(b - t); });
  if (it == e.times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t))) {
    raise(ErrorCode::GridMismatch, "time " + std::to_string(t) + " is not on the ensemble grid");
  }
  return static_cast<std::size_t>(it - e.times.begin());
}

struct Columns {
  std::size_t s, t, u;
};

Columns locate(const sim::PathEnsemble& e, double s, double t, double u) {
  if (!(s < t && t < u)) raise(ErrorCode::DomainViolation, "need s < t < u");
  return {column_of(e, s), column_of(e, t), column_of(e, u)};
}

CoefficientBlock block_of(const Regression& r, std::vector<std::string> basis) {
  CoefficientBlock b;
  b.basis = std::move(basis);
  b.fitted = r.coef;
  b.se = r.se;
  b.identifiable = r.kept;
  return b;
}

void compare_block(CoefficientBlock& b, const Regression& r, std::span<const double> pred, double tol_sigmas,
                   bool exact) {
  b.predicted = r.project(pred);
  b.z.assign(b.fitted.size(), 0.0);
  b.pass.assign(b.fitted.size(), true);
  for (std::size_t j = 0; j < b.fitted.size(); ++j) {
    if (!b.identifiable[j]) continue;
    const double diff = b.fitted[j] - b.predicted[j];
    b.z[j] = b.se[j] > 0 ? diff / b.se[j] : 0.0;
    const bool within_se = !exact && std::abs(diff) <= tol_sigmas * b.se[j];
    b.pass[j] = within_se || std::abs(diff) <= kExactTolerance;
  }
  b.compared = true;
}

json block_json(const CoefficientBlock& b) {
  json j;
  j["basis"] = b.basis;
  auto masked = [&](const std::vector<double>& v) {
    json a = json::array();
    for (std::size_t i = 0; i < v.size(); ++i) a.push_back(b.identifiable[i] ? json(v[i]) : json(nullptr));
    return a;
  };
  j["fitted"] = masked(b.fitted);
  j["se"] = masked(b.se);
  if (b.compared) {
    j["predicted"] = masked(b.predicted);
    j["z"] = masked(b.z);
    json pass = json::array();
    for (std::size_t i = 0; i < b.pass.size(); ++i) {
      pass.push_back(b.identifiable[i] ? json(b.pass[i] ? "PASS" : "FAIL") : json("DROPPED"));
    }
    j["verdicts"] = pass;
  }
  json dropped = json::array();
  for (std::size_t i = 0; i < b.identifiable.size(); ++i) {
    if (!b.identifiable[i]) dropped.push_back(b.basis[i]);
  }
  j["dropped"] = dropped;
  return j;
}

}  // namespace

bool CoefficientBlock::all_pass() const {
  if (!compared) return false;
  for (std::size_t i = 0; i < pass.size(); ++i) {
    if (identifiable[i] && !pass[i]) return false;
  }
  return true;
}

std::vector<std::string> CoefficientBlock::failing() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pass.size(); ++i) {
    if (identifiable[i] && !pass[i]) out.push_back(basis[i]);
  }
  return out;
}

bool FitReport::passed() const { return linear.all_pass() && (!has_variance || variance.all_pass()); }

FitReport check_harness(const sim::PathEnsemble& e, double s, double t, double u, std::span<const double> weights,
                        Exec exec) {
  if (e.n_paths == 0) raise(ErrorCode::EmptyEnsemble);
  const Columns c = locate(e, s, t, u);
  FitReport out;
  out.triple = {s, t, u};
  out.exact = !weights.empty();
  out.linear_reg = least_squares(e.n_paths, 3, [&](std::size_t i, double* x) {
    x[0] = 1.0;
    x[1] = e.at(i, c.s);
    x[2] = e.at(i, c.u);
    return e.at(i, c.t);
  }, weights, exec);
  out.linear = block_of(out.linear_reg, {"1", "X_s", "X_u"});
  return out;
}

FitReport fit_conditional_variance(const sim::PathEnsemble& e, double s, double t, double u,
                                   std::span<const double> weights, Exec exec) {
  FitReport out = check_harness(e, s, t, u, weights, exec);
  const Columns c = locate(e, s, t, u);
  const double span = u - s;
  const double ws = (u - t) / span;
  const double wu = (t - s) / span;
  out.variance_reg = least_squares(e.n_paths, 6, [&](std::size_t i, double* x) {
    const double xs = e.at(i, c.s);
    const double xu = e.at(i, c.u);
    const double slope = (xu - xs) / span;
    const double pivot = (u * xs - s * xu) / span;
    x[0] = 1.0;
    x[1] = slope;
    x[2] = pivot;
    x[3] = slope * slope;
    x[4] = pivot * pivot;
    x[5] = slope * pivot;
    const double r = e.at(i, c.t) - ws * xs - wu * xu;
    return r * r;
  }, weights, exec);
  out.variance = block_of(out.variance_reg, {"1", "D", "D~", "D^2", "D~^2", "D D~"});
  out.has_variance = true;
  return out;
}

void compare_to_prediction(FitReport& fit, const Prediction& pred, const std::array<double, 3>& triple,
                           double tol_sigmas) {
  for (std::size_t k = 0; k < 3; ++k) {
    if (std::abs(fit.triple[k] - triple[k]) > 1e-12 * std::max(1.0, std::abs(triple[k]))) {
      raise(ErrorCode::MismatchedTriples, "fit and prediction refer to different (s, t, u)");
    }
  }
  compare_block(fit.linear, fit.linear_reg, pred.linear, tol_sigmas, fit.exact);
  if (fit.has_variance) compare_block(fit.variance, fit.variance_reg, pred.variance, tol_sigmas, fit.exact);
}

json fit_report_json(const FitReport& fit) {
  json j;
  j["triple"] = {fit.triple[0], fit.triple[1], fit.triple[2]};
  j["mode"] = fit.exact ? "exact" : "monte_carlo";
  j["n"] = fit.linear_reg.n;
  j["linear"] = block_json(fit.linear);
  if (fit.has_variance) j["variance"] = block_json(fit.variance);
  j["verdict"] = fit.verdict();
  return j;
}

}  // namespace qh::verify
