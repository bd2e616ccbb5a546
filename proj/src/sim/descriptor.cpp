#include "qh/sim/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "qh/core/maps.hpp"
#include "qh/core/ops.hpp"

namespace qh::sim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) raise(ErrorCode::InvalidDescriptor, what);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

AffineMap<double> standardize_map(const StandardizeTransform& s) {
  const double det = s.a * s.d - s.b * s.c;
  require(det > 0, "standardize transform needs ad - bc > 0");
  return {s.d / det, -s.b / det, -s.c / det, s.a / det, (s.c * s.alpha - s.d * s.beta) / det,
          (s.b * s.beta - s.a * s.alpha) / det};
}

HarnessSpec<double> raw_spec(double slope, double intercept, CovMatrix<double> cov, double chi,
                             Vec2<double> lin, double tau, Interval<double> iv) {
  HarnessSpec<double> h;
  h.mean = {slope, intercept};
  h.cov = cov;
  h.var_form.chi = chi;
  h.var_form.lin = lin;
  h.var_form.quad = {tau, 0.0, 0.0, 0.0};
  h.interval = iv;
  return normalize_gamma(h);
}

json mix_to_json(const MixLaw& m) { return {{"values", m.values}, {"probs", m.probs}}; }

MixLaw mix_from_json(const json& j) {
  MixLaw m;
  m.values = j.at("values").get<std::vector<double>>();
  m.probs = j.at("probs").get<std::vector<double>>();
  m.validate();
  return m;
}

}  // namespace

json transform_to_json(const TransformKind& k) {
  return std::visit(
      overloaded{
          [](const AffineTransform& t) -> json { return {{"kind", "affine"}, {"map", affine_to_json(t.map)}}; },
          [](const StandardizeTransform& t) -> json {
            return {{"kind", "standardize"}, {"a", t.a},         {"b", t.b},
                    {"c", t.c},              {"d", t.d},         {"alpha", t.alpha},
                    {"beta", t.beta}};
          },
          [](const BridgeTransform& t) -> json {
            json j = {{"kind", "bridge"}, {"R", t.R}, {"V", t.V}, {"params", params_to_json(t.params)}};
            if (t.M) j["M"] = *t.M;
            return j;
          },
          [](const FutureTransform& t) -> json {
            return {{"kind", "future"}, {"V", t.V}, {"params", params_to_json(t.params)}};
          },
          [](const PastTransform& t) -> json {
            return {{"kind", "past"}, {"R", t.R}, {"params", params_to_json(t.params)}};
          },
          [](const DirichletTransform& t) -> json { return {{"kind", "dirichlet"}, {"c", t.c}, {"V", t.V}}; },
          [](const BinomialTransform& t) -> json { return {{"kind", "binomial"}, {"N", t.N}, {"V", t.V}}; },
      },
      k);
}

TransformKind transform_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine") return AffineTransform{affine_from_json<double>(j.at("map"))};
  if (kind == "standardize") {
    return StandardizeTransform{j.value("a", 1.0), j.value("b", 0.0),     j.value("c", 0.0),
                                j.value("d", 1.0), j.value("alpha", 0.0), j.value("beta", 0.0)};
  }
  auto params = [&]() { return j.contains("params") ? params_from_json<double>(j.at("params")) : QHParams<double>{}; };
  if (kind == "bridge") {
    BridgeTransform t{j.value("R", 0.0), j.value("V", 1.0), std::nullopt, params()};
    if (j.contains("M")) t.M = j.at("M").get<double>();
    return t;
  }
  if (kind == "future") return FutureTransform{j.value("V", 1.0), params()};
  if (kind == "past") return PastTransform{j.value("R", 1.0), params()};
  if (kind == "dirichlet") return DirichletTransform{j.value("c", 1.0), j.value("V", 1.0)};
  if (kind == "binomial") return BinomialTransform{j.value("N", 1), j.value("V", 1.0)};
  raise(ErrorCode::InvalidDescriptor, "unknown transform kind '" + kind + "'");
}

namespace {

void validate_transform(const TransformKind& k) {
  std::visit(overloaded{
                 [](const AffineTransform& t) { require(t.map.det() != 0.0, "affine map is singular"); },
                 [](const StandardizeTransform& t) { standardize_map(t); },
                 [](const BridgeTransform& t) {
                   require(t.R >= 0 && t.R < t.V, "bridge needs 0 <= R < V");
                   require(!t.M || *t.M > 0, "bridge M must be positive");
                 },
                 [](const FutureTransform& t) { require(t.V > 0, "future conditioning needs V > 0"); },
                 [](const PastTransform& t) { require(t.R > 0, "past conditioning needs R > 0"); },
                 [](const DirichletTransform& t) { require(t.c > 0 && t.V > 0, "dirichlet transform needs c, V > 0"); },
                 [](const BinomialTransform& t) { require(t.N >= 1 && t.V > 0, "binomial transform needs N >= 1, V > 0"); },
             },
             k);
}

}  // namespace

void MixLaw::validate() const {
  require(!values.empty() && values.size() == probs.size(), "mix law needs matching values and probs");
  double total = 0;
  for (double p : probs) {
    require(p >= 0 && std::isfinite(p), "mix law probabilities must be nonnegative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, "mix law probabilities must sum to 1");
  for (double v : values) require(std::isfinite(v), "mix law values must be finite");
}

double MixLaw::mean() const {
  return std::inner_product(values.begin(), values.end(), probs.begin(), 0.0);
}

double MixLaw::second_moment() const {
  double s = 0;
  for (std::size_t i = 0; i < values.size(); ++i) s += probs[i] * values[i] * values[i];
  return s;
}

void ProcessDescriptor::validate() const {
  std::visit(overloaded{
                 [](const Wiener&) {},
                 [](const WienerDrift& p) { p.xi_law.validate(); },
                 [](const WienerShift& p) { p.xi_law.validate(); },
                 [](const Poisson& p) { require(p.lambda > 0, "poisson needs lambda > 0"); },
                 [](const Gamma& p) { require(p.alpha > 0 && p.beta > 0, "gamma needs alpha, beta > 0"); },
                 [](const DirichletBridge& p) { require(p.c > 0 && p.V > 0, "dirichlet needs c, V > 0"); },
                 [](const BinomialBridge& p) { require(p.N >= 1 && p.V > 0, "binomial needs N >= 1, V > 0"); },
                 [](const GammaRandomScale& p) { p.xi_law.validate(); },
                 [](const Transformed& t) {
                   require(t.base != nullptr, "transformed process needs a base");
                   t.base->validate();
                   validate_transform(t.kind);
                 },
             },
             process);
}

std::string ProcessDescriptor::name() const {
  return std::visit(overloaded{
                        [](const Wiener&) -> std::string { return "wiener"; },
                        [](const WienerDrift&) -> std::string { return "wiener_drift"; },
                        [](const WienerShift&) -> std::string { return "wiener_shift"; },
                        [](const Poisson&) -> std::string { return "poisson"; },
                        [](const Gamma&) -> std::string { return "gamma"; },
                        [](const DirichletBridge&) -> std::string { return "dirichlet"; },
                        [](const BinomialBridge&) -> std::string { return "binomial"; },
                        [](const GammaRandomScale&) -> std::string { return "gamma_random_scale"; },
                        [](const Transformed& t) -> std::string { return "transformed(" + t.base->name() + ")"; },
                    },
                    process);
}

ProcessDescriptor transformed(ProcessDescriptor base, TransformKind kind) {
  ProcessDescriptor d;
  d.process = Transformed{std::make_shared<const ProcessDescriptor>(std::move(base)), std::move(kind)};
  return d;
}

std::optional<AffineMap<double>> fixed_map(const TransformKind& kind) {
  return std::visit(overloaded{
                        [](const AffineTransform& t) -> std::optional<AffineMap<double>> { return t.map; },
                        [](const StandardizeTransform& t) -> std::optional<AffineMap<double>> {
                          return standardize_map(t);
                        },
                        [](const DirichletTransform& t) -> std::optional<AffineMap<double>> {
                          return dirichlet_map(t.c, t.V);
                        },
                        [](const BinomialTransform& t) -> std::optional<AffineMap<double>> {
                          return binomial_map(t.N, t.V);
                        },
                        [](const auto&) -> std::optional<AffineMap<double>> { return std::nullopt; },
                    },
                    kind);
}

double source_time(const TransformKind& kind, double t) {
  if (const auto f = fixed_map(kind)) return f->mobius(t);
  return std::visit(overloaded{
                        [&](const BridgeTransform& b) { return (t + b.R) / (1 + t / b.V); },
                        [&](const FutureTransform& b) { return t / (1 + t / b.V); },
                        [&](const PastTransform& b) { return t + b.R; },
                        [](const auto&) -> double { raise(ErrorCode::InvalidDescriptor, "no time change"); },
                    },
                    kind);
}

std::vector<double> source_grid(const TransformKind& kind, const std::vector<double>& targets) {
  std::vector<double> out;
  out.reserve(targets.size() + 2);
  for (double t : targets) out.push_back(source_time(kind, t));
  // R = 0 reads the initial value X_0 = 0 and needs no grid point
  if (const auto* b = std::get_if<BridgeTransform>(&kind)) {
    if (b->R > 0) out.push_back(b->R);
    out.push_back(b->V);
  } else if (const auto* f = std::get_if<FutureTransform>(&kind)) {
    out.push_back(f->V);
  } else if (const auto* p = std::get_if<PastTransform>(&kind)) {
    out.push_back(p->R);
  }
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  for (double t : out) {
    if (dedup.empty() || std::abs(t - dedup.back()) > 1e-12 * std::max(1.0, std::abs(t))) dedup.push_back(t);
  }
  return dedup;
}

void check_grid(const ProcessDescriptor& d, const std::vector<double>& times) {
  if (times.empty()) raise(ErrorCode::DomainViolation, "empty time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) raise(ErrorCode::DomainViolation, "non-finite time");
    if (i > 0 && !(times[i - 1] < times[i])) raise(ErrorCode::DomainViolation, "times must be strictly increasing");
  }
  const double first = times.front();
  const double last = times.back();
  std::visit(overloaded{
                 [&](const WienerShift& p) {
                   if (!(first > p.v * p.v)) raise(ErrorCode::DomainViolation, "times must exceed v^2");
                 },
                 [&](const DirichletBridge& p) {
                   if (!(first > 0) || last > p.V) raise(ErrorCode::DomainViolation, "times must lie in (0, V]");
                 },
                 [&](const BinomialBridge& p) {
                   if (!(first > 0) || last > p.V) raise(ErrorCode::DomainViolation, "times must lie in (0, V]");
                 },
                 [&](const Transformed& t) {
                   for (double x : times) {
                     if (const auto f = fixed_map(t.kind)) {
                       if (!(f->space_scale(x) != 0.0)) raise(ErrorCode::DomainViolation, "time change has a pole on the grid");
                     }
                   }
                   check_grid(*t.base, source_grid(t.kind, times));
                 },
                 [&](const auto&) {
                   if (!(first > 0)) raise(ErrorCode::DomainViolation, "times must be positive");
                 },
             },
             d.process);
}

HarnessSpec<double> harness_spec_for(const ProcessDescriptor& d) {
  d.validate();
  const Interval<double> half = Interval<double>::positive_half_line();
  return std::visit(
      overloaded{
          [&](const Wiener&) { return raw_spec(0, 0, {0, 1, 0, 0}, 1, {0, 0}, 0, half); },
          [&](const WienerDrift& p) {
            const double m = p.v * p.xi_law.mean();
            const double w = p.v * p.v * p.xi_law.variance();
            return raw_spec(m, 0, {w, 1, 0, 0}, 1, {0, 0}, 0, half);
          },
          [&](const WienerShift& p) {
            const double m = p.v * p.xi_law.mean();
            const double w = p.v * p.v * p.xi_law.variance();
            const Interval<double> iv{Endpoint<double>::finite(p.v * p.v), Endpoint<double>::pos_inf()};
            return raw_spec(0, m, {0, 1, 0, w - p.v * p.v}, 1, {0, 0}, 0, iv);
          },
          [&](const Poisson& p) { return raw_spec(p.lambda, 0, {0, p.lambda, 0, 0}, 0, {1, 0}, 0, half); },
          [&](const Gamma& p) {
            return raw_spec(p.alpha / p.beta, 0, {0, p.alpha / (p.beta * p.beta), 0, 0}, 0, {0, 0}, 1 / p.alpha, half);
          },
          [&](const DirichletBridge& p) {
            const double k = p.c * p.V + 1;
            return raw_spec(1 / p.V, 0, {-1 / (p.V * p.V * k), 1 / (p.V * k), 0, 0}, 0, {0, 0}, 1 / p.c,
                            Interval<double>::finite(0, p.V));
          },
          [&](const BinomialBridge& p) {
            const double n = p.N;
            return raw_spec(n / p.V, 0, {-n / (p.V * p.V), n / p.V, 0, 0}, 0, {1, 0}, 0,
                            Interval<double>::finite(0, p.V));
          },
          [&](const GammaRandomScale& p) {
            return raw_spec(p.xi_law.mean(), 0, {p.xi_law.variance(), p.xi_law.second_moment(), 0, 0}, 0, {0, 0}, 1,
                            half);
          },
          [&](const Transformed& t) {
            const auto f = fixed_map(t.kind);
            if (!f) {
              raise(ErrorCode::InvalidDescriptor,
                    "per-path conditioning: the law depends on the conditioning values; supply parameters");
            }
            return affine_transform_spec(harness_spec_for(*t.base), *f);
          },
      },
      d.process);
}

json descriptor_to_json(const ProcessDescriptor& d) {
  return std::visit(
      overloaded{
          [](const Wiener&) -> json { return {{"process", "wiener"}}; },
          [](const WienerDrift& p) -> json {
            return {{"process", "wiener_drift"}, {"v", p.v}, {"xi", mix_to_json(p.xi_law)}};
          },
          [](const WienerShift& p) -> json {
            return {{"process", "wiener_shift"}, {"v", p.v}, {"xi", mix_to_json(p.xi_law)}};
          },
          [](const Poisson& p) -> json { return {{"process", "poisson"}, {"lambda", p.lambda}}; },
          [](const Gamma& p) -> json { return {{"process", "gamma"}, {"alpha", p.alpha}, {"beta", p.beta}}; },
          [](const DirichletBridge& p) -> json { return {{"process", "dirichlet"}, {"c", p.c}, {"V", p.V}}; },
          [](const BinomialBridge& p) -> json { return {{"process", "binomial"}, {"N", p.N}, {"V", p.V}}; },
          [](const GammaRandomScale& p) -> json {
            return {{"process", "gamma_random_scale"}, {"xi", mix_to_json(p.xi_law)}};
          },
          [](const Transformed& t) -> json {
            return {{"process", "transformed"}, {"base", descriptor_to_json(*t.base)}, {"transform", transform_to_json(t.kind)}};
          },
      },
      d.process);
}

ProcessDescriptor descriptor_from_json(const json& j) {
  try {
    const std::string name = j.at("process").get<std::string>();
    ProcessDescriptor d;
    if (name == "wiener") {
      d.process = Wiener{};
    } else if (name == "wiener_drift") {
      d.process = WienerDrift{j.value("v", 1.0), j.contains("xi") ? mix_from_json(j.at("xi")) : MixLaw{}};
    } else if (name == "wiener_shift") {
      d.process = WienerShift{j.value("v", 1.0), j.contains("xi") ? mix_from_json(j.at("xi")) : MixLaw{}};
    } else if (name == "poisson") {
      d.process = Poisson{j.value("lambda", 1.0)};
    } else if (name == "gamma") {
      d.process = Gamma{j.value("alpha", 1.0), j.value("beta", 1.0)};
    } else if (name == "dirichlet") {
      d.process = DirichletBridge{j.value("c", 1.0), j.value("V", 1.0)};
    } else if (name == "binomial") {
      d.process = BinomialBridge{j.value("N", 1), j.value("V", 1.0)};
    } else if (name == "gamma_random_scale") {
      d.process = GammaRandomScale{j.contains("xi") ? mix_from_json(j.at("xi")) : GammaRandomScale{}.xi_law};
    } else if (name == "transformed") {
      d = transformed(descriptor_from_json(j.at("base")), transform_from_json(j.at("transform")));
    } else {
      raise(ErrorCode::InvalidDescriptor, "unknown process '" + name + "'");
    }
    d.validate();
    return d;
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, e.what());
  }
}

namespace {

bool looks_like_json(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t");
  return first != std::string::npos && (arg[first] == '{' || arg.find(".json") != std::string::npos);
}

// "name:k1=v1,k2=v2" into {key: name, k1: v1, ...}
json keyed_arg(const std::string& arg, const char* key) {
  const auto colon = arg.find(':');
  json j;
  j[key] = arg.substr(0, colon);
  if (colon != std::string::npos) {
    std::stringstream ss(arg.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) raise(ErrorCode::ParseError, "expected key=value in '" + item + "'");
      const std::string key = item.substr(0, eq);
      const double value = parse_scalar<double>(json(item.substr(eq + 1)));
      if (key == "N") {
        j[key] = static_cast<int>(std::lround(value));
      } else {
        j[key] = value;
      }
    }
  }
  return j;
}

}  // namespace

ProcessDescriptor parse_process_arg(const std::string& arg) {
  if (looks_like_json(arg)) return descriptor_from_json(load_json_arg(arg));
  return descriptor_from_json(keyed_arg(arg, "process"));
}

TransformKind parse_transform_arg(const std::string& arg) {
  try {
    const TransformKind k = transform_from_json(looks_like_json(arg) ? load_json_arg(arg) : keyed_arg(arg, "kind"));
    validate_transform(k);
    return k;
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, e.what());
  }
}

std::optional<TransformKind> default_standardization(const ProcessDescriptor& d) {
  return std::visit(overloaded{
                        [](const Wiener&) -> std::optional<TransformKind> { return AffineTransform{}; },
                        [](const WienerDrift& p) -> std::optional<TransformKind> {
                          // Cov = s + w s t = s (1 + w t) for s <= t
                          const double w = p.v * p.v * p.xi_law.variance();
                          return StandardizeTransform{1, 0, w, 1, 0, p.v * p.xi_law.mean()};
                        },
                        [](const DirichletBridge& p) -> std::optional<TransformKind> {
                          return DirichletTransform{p.c, p.V};
                        },
                        [](const BinomialBridge& p) -> std::optional<TransformKind> {
                          return BinomialTransform{p.N, p.V};
                        },
                        [](const auto&) -> std::optional<TransformKind> { return std::nullopt; },
                    },
                    d.process);
}

}  // namespace qh::sim
