#pragma once

#include <cmath>

#include "qh/core/types.hpp"

// Concrete space-time maps used by the conditioning results, as AffineMaps
// acting by X^f_t = (c t + d) X_{(a t + b)/(c t + d)} + m1 t + m2.

namespace qh {

/// Y_t = k((1 + t/V) X_{(t+R)/(1+t/V)} - t z_V/V - z_R), k = sqrt(V)/((V - R) M).
inline AffineMap<double> bridge_map(double R, double V, double z_R, double z_V, double M) {
  const double k = std::sqrt(V) / ((V - R) * M);
  return {k, k * R, k / V, k, -k * z_V / V, -k * z_R};
}

/// Y_t = k((1 + t/V) X_{t/(1+t/V)} - t z_V/V), k = (1 + tau/V)/kappa.
inline AffineMap<double> future_map(double V, double z_V, double k) {
  return {k, 0.0, k / V, k, -k * z_V / V, 0.0};
}

/// Y_t = k (X_{t+R} - z_R), k = (1 + R sigma)/kappa.
inline AffineMap<double> past_map(double R, double z_R, double k) {
  return {k, k * R, 0.0, k, 0.0, -k * z_R};
}

/// Y_t = sqrt(c + 1/V)((V + t) X_{tV/(V+t)} - t) for the Dirichlet bridge on [0, V].
inline AffineMap<double> dirichlet_map(double c, double V) {
  const double k = std::sqrt(c + 1.0 / V);
  return {k * V, 0.0, k, k * V, -k, 0.0};
}

/// Y_t = ((V + t) X_{tV/(V+t)} - t N)/sqrt(V N) for the binomial bridge on [0, V].
inline AffineMap<double> binomial_map(int N, double V) {
  const double k = 1.0 / std::sqrt(V * N);
  return {k * V, 0.0, k, k * V, -k * N, 0.0};
}

}  // namespace qh
