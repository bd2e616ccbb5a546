#include "qh/verify/regression.hpp"

#include <cmath>

namespace qh::verify {

namespace {

using Matrix = std::vector<std::vector<double>>;

// Gauss-Jordan inverse with partial pivoting; returns false on an exactly zero pivot.
bool invert(Matrix a, Matrix& inv) {
  const std::size_t k = a.size();
  inv.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0.0) return false;
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < k; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < k; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return true;
}

Matrix sub(const Matrix& g, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Matrix out(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out[i][j] = g[rows[i]][cols[j]];
  }
  return out;
}

// Squared norm of column j after projection on the columns in `kept`.
double residual_norm(const Matrix& g, const std::vector<std::size_t>& kept, std::size_t j) {
  if (kept.empty()) return g[j][j];
  Matrix inv;
  if (!invert(sub(g, kept, kept), inv)) return 0.0;
  double r = g[j][j];
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = 0; b < kept.size(); ++b) r -= g[j][kept[a]] * inv[a][b] * g[kept[b]][j];
  }
  return r;
}

}  // namespace

std::vector<std::size_t> Regression::dropped() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < p; ++j) {
    if (!kept[j]) out.push_back(j);
  }
  return out;
}

std::vector<double> Regression::project(std::span<const double> beta) const {
  std::vector<double> out(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (!kept[j]) continue;
    out[j] = beta[j];
    for (std::size_t d = 0; d < p; ++d) {
      if (!kept[d]) out[j] += alias[j][d] * beta[d];
    }
  }
  return out;
}

Regression least_squares(std::size_t n, std::size_t p, const DesignRow& row, std::span<const double> weights,
                         Exec exec) {
  const bool weighted = !weights.empty();
  if (weighted && weights.size() != n) raise(ErrorCode::InvalidParams, "one weight per row required");
  if (!weighted && n < p + 1) raise(ErrorCode::EmptyEnsemble, "too few rows for the regression");

  // first pass: sum w, sum w x x^T (upper triangle), sum w x y
  const std::size_t tri = p * (p + 1) / 2;
  const auto first = pairwise_sums(n, 1 + tri + p, [&](std::size_t i, double* o) {
    std::vector<double> x(p);
    const double y = row(i, x.data());
    const double w = weighted ? weights[i] : 1.0;
    o[0] = w;
    std::size_t q = 1;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) o[q++] = w * x[a] * x[b];
    }
    for (std::size_t a = 0; a < p; ++a) o[q++] = w * x[a] * y;
  }, exec);

  const double total = first[0];
  if (!(total > 0)) raise(ErrorCode::EmptyEnsemble, "total weight is zero");
  Matrix g(p, std::vector<double>(p));
  std::vector<double> xy(p);
  std::size_t q = 1;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) g[a][b] = g[b][a] = first[q++] / total;
  }
  for (std::size_t a = 0; a < p; ++a) xy[a] = first[q++] / total;

  Regression out;
  out.n = n;
  out.p = p;
  out.weighted = weighted;
  out.kept.assign(p, false);
  std::vector<std::size_t> kept;
  std::vector<std::size_t> drop;
  for (std::size_t j = 0; j < p; ++j) {
    const double r = residual_norm(g, kept, j);
    if (g[j][j] > 0 && r > 1e-9 * g[j][j]) {
      kept.push_back(j);
      out.kept[j] = true;
    } else {
      drop.push_back(j);
    }
  }
  if (kept.empty()) raise(ErrorCode::SingularDesign, "no identifiable regressor");

  Matrix inv;
  if (!invert(sub(g, kept, kept), inv)) raise(ErrorCode::SingularDesign, "normal equations are singular");
  const std::size_t k = kept.size();
  out.coef.assign(p, 0.0);
  out.se.assign(p, 0.0);
  out.alias.assign(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    double c = 0;
    for (std::size_t b = 0; b < k; ++b) c += inv[a][b] * xy[kept[b]];
    out.coef[kept[a]] = c;
    for (std::size_t d : drop) {
      double al = 0;
      for (std::size_t b = 0; b < k; ++b) al += inv[a][b] * g[kept[b]][d];
      out.alias[kept[a]][d] = al;
    }
  }

  // second pass: residuals and the HC1 meat sum e^2 x_K x_K^T
  const std::size_t ktri = k * (k + 1) / 2;
  const auto second = pairwise_sums(n, 1 + ktri, [&](std::size_t i, double* o) {
    std::vector<double> x(p);
    const double y = row(i, x.data());
    const double w = weighted ? weights[i] : 1.0;
    double e = y;
    for (std::size_t j : kept) e -= out.coef[j] * x[j];
    const double e2 = e * e;
    o[0] = w * e2;
    std::size_t qq = 1;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) o[qq++] = w * e2 * x[kept[a]] * x[kept[b]];
    }
  }, exec);
  out.mean_sq_residual = second[0] / total;
  if (weighted) return out;

  Matrix meat(k, std::vector<double>(k));
  std::size_t qq = 1;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) meat[a][b] = meat[b][a] = second[qq++];
  }
  // (X^T X)^{-1} = inv / n
  const double dn = static_cast<double>(n);
  const double hc1 = dn / (dn - static_cast<double>(k));
  for (std::size_t a = 0; a < k; ++a) {
    double v = 0;
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t c = 0; c < k; ++c) v += inv[a][b] * meat[b][c] * inv[c][a];
    }
    out.se[kept[a]] = std::sqrt(std::max(0.0, v * hc1) ) / dn;
  }
  return out;
}

}  // namespace qh::verify
