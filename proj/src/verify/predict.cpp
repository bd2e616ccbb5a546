#include "qh/verify/predict.hpp"

#include "qh/core/ops.hpp"

namespace qh::verify {

namespace {

std::array<double, 3> harness_line(double s, double t, double u) {
  detail::require_ordered(s, t, u);
  return {0.0, (u - t) / (u - s), (t - s) / (u - s)};
}

}  // namespace

Prediction predict(const QHParams<double>& p, double s, double t, double u) {
  Prediction out;
  out.linear = harness_line(s, t, u);
  const double f = eval_F(p, s, t, u);
  out.variance = {f, f * p.theta, f * p.eta, f * p.tau, f * p.sigma, f * (p.gamma - 1)};
  return out;
}

Prediction predict(const HarnessSpec<double>& h, double s, double t, double u) {
  Prediction out;
  out.linear = harness_line(s, t, u);
  const VarianceForm<double>& v = h.var_form;
  const double f = eval_F_matrix(v.quad, s, t, u);
  out.variance = {f * v.chi, f * v.lin.x, f * v.lin.y, f * v.quad.a, f * v.quad.d, f * (v.quad.b + v.quad.c)};
  return out;
}

}  // namespace qh::verify
