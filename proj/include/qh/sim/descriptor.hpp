#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qh/core/io.hpp"
#include "qh/core/types.hpp"

namespace qh::sim {

/// Finite discrete law for a random variable xi.
struct MixLaw {
  std::vector<double> values{-1.0, 1.0};
  std::vector<double> probs{0.5, 0.5};

  void validate() const;
  double mean() const;
  double second_moment() const;
  double variance() const { return second_moment() - mean() * mean(); }

  static MixLaw fair_signs() { return {}; }
};

// Processes. Unless stated the time domain is (0, inf) and X_0 = 0.

struct Wiener {};

/// X_t = W_t + xi t with xi = v * zeta, zeta ~ xi_law.
struct WienerDrift {
  double v = 1.0;
  MixLaw xi_law{};
};

/// X_t = W_{t - v^2} + xi on (v^2, inf), xi = v * zeta, zeta ~ xi_law.
struct WienerShift {
  double v = 1.0;
  MixLaw xi_law{};
};

struct Poisson {
  double lambda = 1.0;
};

/// G_t ~ Gamma(shape alpha t, rate beta), independent increments.
struct Gamma {
  double alpha = 1.0;
  double beta = 1.0;
};

/// On [0, V]: X_t ~ Beta(c t, c (V - t)), (X_t - X_s)/(1 - X_s) ~ Beta(c(t - s), c(V - t)).
struct DirichletBridge {
  double c = 1.0;
  double V = 1.0;
};

/// On [0, V]: X_t ~ b(N, t/V), X_t - X_s | X_s ~ b(N - X_s, (t - s)/(V - s)).
struct BinomialBridge {
  int N = 1;
  double V = 1.0;
};

/// X_t = xi G_t with G a Gamma(1, 1) process, xi ~ xi_law.
struct GammaRandomScale {
  MixLaw xi_law{{1.0}, {1.0}};
};

// Pathwise transforms.

/// Y = X^f for a fixed space-time map f.
struct AffineTransform {
  AffineMap<double> map{};
};

/// Y_t = ((a - c t)/(ad - bc))(X_{psi(t)} - alpha - beta psi(t)), psi(t) = (d t - b)/(a - c t).
struct StandardizeTransform {
  double a = 1, b = 0, c = 0, d = 1;
  double alpha = 0, beta = 0;
};

/// Two-sided conditioning on (X_R, X_V) read from each path. M is fixed when
/// given, otherwise sqrt(K(Delta_RV)/denom) under `params`, per path.
struct BridgeTransform {
  double R = 0;
  double V = 1;
  std::optional<double> M;
  QHParams<double> params{};
};

/// One-sided conditioning on X_V read from each path.
struct FutureTransform {
  double V = 1;
  QHParams<double> params{};
};

/// One-sided conditioning on X_R read from each path.
struct PastTransform {
  double R = 1;
  QHParams<double> params{};
};

struct DirichletTransform {
  double c = 1;
  double V = 1;
};

struct BinomialTransform {
  int N = 1;
  double V = 1;
};

using TransformKind = std::variant<AffineTransform, StandardizeTransform, BridgeTransform, FutureTransform,
                                   PastTransform, DirichletTransform, BinomialTransform>;

struct ProcessDescriptor;

struct Transformed {
  std::shared_ptr<const ProcessDescriptor> base;
  TransformKind kind;
};

struct ProcessDescriptor {
  std::variant<Wiener, WienerDrift, WienerShift, Poisson, Gamma, DirichletBridge, BinomialBridge,
               GammaRandomScale, Transformed>
      process;

  /// Throws InvalidDescriptor on bad parameters.
  void validate() const;
  std::string name() const;
};

ProcessDescriptor transformed(ProcessDescriptor base, TransformKind kind);

/// Space-time map realized by a transform when it does not depend on the path
/// (everything except per-path bridge, future and past conditioning).
std::optional<AffineMap<double>> fixed_map(const TransformKind& kind);

/// Source time of target time t under the transform's time change.
double source_time(const TransformKind& kind, double t);

/// Times at which the base process must be observed: the images of `targets`
/// plus any conditioning times, sorted and deduplicated.
std::vector<double> source_grid(const TransformKind& kind, const std::vector<double>& targets);

/// Throws DomainViolation if `times` is not strictly increasing or leaves the
/// process's time domain.
void check_grid(const ProcessDescriptor& d, const std::vector<double>& times);

/// Mean line, covariance and normalized conditional-variance form of the
/// process, from its construction. Throws InvalidDescriptor for per-path
/// conditioning transforms, whose law is a mixture over the conditioning values.
HarnessSpec<double> harness_spec_for(const ProcessDescriptor& d);

json descriptor_to_json(const ProcessDescriptor& d);
ProcessDescriptor descriptor_from_json(const json& j);

/// "wiener", "poisson:lambda=2", "dirichlet:c=1,V=1", ... or inline JSON / a JSON file.
ProcessDescriptor parse_process_arg(const std::string& arg);

json transform_to_json(const TransformKind& k);
TransformKind transform_from_json(const json& j);

/// "dirichlet:c=1,V=1", "binomial:N=2,V=1", "standardize:a=1,c=1", ... or JSON.
TransformKind parse_transform_arg(const std::string& arg);

/// Map taking the process to mean zero and covariance min(s, t), for the
/// processes whose standardization is fixed by their construction: Wiener
/// (identity), Wiener with random drift, Dirichlet and binomial bridges.
std::optional<TransformKind> default_standardization(const ProcessDescriptor& d);

}  // namespace qh::sim
