#include "qh/cli/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "qh/cli/output.hpp"
#include "qh/core/identities.hpp"
#include "qh/core/io.hpp"
#include "qh/core/maps.hpp"
#include "qh/core/ops.hpp"
#include "qh/sim/descriptor.hpp"
#include "qh/sim/ensemble_io.hpp"
#include "qh/sim/sampler.hpp"
#include "qh/sim/transform.hpp"
#include "qh/verify/fit.hpp"

namespace qh::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string params;
  std::string affine;
  std::string factors;
  std::string R, V, zr, zv;
  std::string process;
  std::string transform;
  std::string times;
  std::string ensemble;
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  std::string stu;
  double tol_sigmas = 3.0;
  std::string mode = "float";
  std::string out;
  int trials = 100;
};

struct Result {
  json body;
  bool passed = true;
};

bool rational(const Options& o) { return o.mode == "rational"; }

void need(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing ") + flag);
}

template <Scalar S>
S scalar_arg(const std::string& text) {
  return parse_scalar<S>(json(text));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(scalar_arg<double>(item));
  return out;
}

std::array<double, 3> triple_arg(const std::string& text) {
  const auto v = double_list(text);
  if (v.size() != 3) throw UsageError("--stu expects s,t,u");
  return {v[0], v[1], v[2]};
}

json base_config(const std::string& command, const Options& o) {
  json c;
  c["command"] = command;
  c["mode"] = o.mode;
  return c;
}

// transform -----------------------------------------------------------------

template <Scalar S>
Result transform_cmd(const Options& o) {
  need(o.params, "--params");
  const HarnessSpec<S> spec = spec_from_json<S>(load_json_arg(o.params));
  Result r;
  if (!o.affine.empty()) {
    const AffineMap<S> f = affine_from_csv<S>(o.affine);
    const HarnessSpec<S> y = affine_transform_spec(spec, f);
    r.body["spec"] = spec_to_json(y);
    r.body["map"] = affine_to_json(f);
  } else if (!o.factors.empty()) {
    const auto v = split(o.factors, ',');
    if (v.size() != 4) throw UsageError("--factors expects a,b,c,d");
    const ProductFactors<S> f{scalar_arg<S>(v[0]), scalar_arg<S>(v[1]), scalar_arg<S>(v[2]), scalar_arg<S>(v[3])};
    if (!nearly_equal(f.cov().matrix(), spec.cov.matrix())) {
      raise(ErrorCode::InvalidParams, "factors do not reproduce the covariance of the harness");
    }
    const StandardizeResult<S> s = harness_to_qh(spec.mean, f, spec.var_form, spec.interval);
    r.body["params"] = params_to_json(s.params);
    r.body["map"] = affine_to_json(s.map);
    r.body["interval"] = interval_to_json(s.interval);
    r.body["chi_tilde"] = scalar_json(s.chi_tilde);
  } else {
    throw UsageError("transform needs --affine or --factors");
  }
  return r;
}

// bridge / condition / meixner-bridge -------------------------------------------

template <Scalar S>
json squared_block(const SquaredQH<S>& q) {
  json j;
  j["squared"] = squared_to_json(q);
  j["params"] = params_to_json(q.resolve());
  return j;
}

template <Scalar S>
Result bridge_cmd(const Options& o) {
  need(o.params, "--params");
  need(o.R, "--R");
  need(o.V, "--V");
  need(o.zr, "--zr");
  need(o.zv, "--zv");
  const QHParams<S> p = params_from_json<S>(load_json_arg(o.params));
  const S R = scalar_arg<S>(o.R), V = scalar_arg<S>(o.V);
  const S zr = scalar_arg<S>(o.zr), zv = scalar_arg<S>(o.zv);
  const BridgeResult<S> b = bridge_params(p, R, V, zr, zv);
  Result r;
  r.body = squared_block(b.params);
  r.body["K"] = scalar_json(b.data.K);
  r.body["denom"] = scalar_json(b.data.denom);
  r.body["M_sq"] = scalar_json(b.data.M_sq);
  r.body["map"] = affine_to_json(
      bridge_map(to_double(R), to_double(V), to_double(zr), to_double(zv), b.data.M()));
  return r;
}

template <Scalar S>
Result condition_cmd(const Options& o) {
  need(o.params, "--params");
  const QHParams<S> p = params_from_json<S>(load_json_arg(o.params));
  const bool future = !o.V.empty() || !o.zv.empty();
  const bool past = !o.R.empty() || !o.zr.empty();
  if (future == past) throw UsageError("condition needs either --V/--zv or --R/--zr (use bridge for both)");
  Result r;
  if (future) {
    need(o.V, "--V");
    need(o.zv, "--zv");
    const S V = scalar_arg<S>(o.V), zv = scalar_arg<S>(o.zv);
    const OneSidedResult<S> c = condition_on_future(p, V, zv);
    r.body = squared_block(c.params);
    r.body["side"] = "future";
    r.body["kappa_sq"] = scalar_json(c.kappa_sq);
    r.body["scale_sq"] = scalar_json(c.scale_sq);
    r.body["map"] = affine_to_json(future_map(to_double(V), to_double(zv), std::sqrt(to_double(c.scale_sq))));
  } else {
    need(o.R, "--R");
    need(o.zr, "--zr");
    const S R = scalar_arg<S>(o.R), zr = scalar_arg<S>(o.zr);
    const OneSidedResult<S> c = condition_on_past(p, R, zr);
    r.body = squared_block(c.params);
    r.body["side"] = "past";
    r.body["kappa_sq"] = scalar_json(c.kappa_sq);
    r.body["scale_sq"] = scalar_json(c.scale_sq);
    r.body["map"] = affine_to_json(past_map(to_double(R), to_double(zr), std::sqrt(to_double(c.scale_sq))));
  }
  return r;
}

template <Scalar S>
Result meixner_cmd(const Options& o) {
  need(o.params, "--params");
  need(o.R, "--R");
  need(o.V, "--V");
  const QHParams<S> p = params_from_json<S>(load_json_arg(o.params));
  const S R = scalar_arg<S>(o.R), V = scalar_arg<S>(o.V);
  const S zr = o.zr.empty() ? S(0) : scalar_arg<S>(o.zr);
  const S zv = o.zv.empty() ? S(0) : scalar_arg<S>(o.zv);
  const DeltaPair<S> d = DeltaPair<S>::from_values(R, V, zr, zv);
  Result r;
  r.body = squared_block(meixner_bridge(p.theta, p.tau, R, V, d.slope));
  r.body["slope"] = scalar_json(d.slope);
  return r;
}

// glue / solve-t1i / identities ---------------------------------------------------

template <Scalar S>
Result glue_cmd(const Options& o) {
  need(o.params, "--params");
  const GlueVerdict<S> v = glue_classify(params_from_json<S>(load_json_arg(o.params)));
  static const std::map<GlueCase, const char*> numbers{
      {GlueCase::Wiener, "i"}, {GlueCase::BiPoisson, "ii"}, {GlueCase::UpperBoundary, "iii"}};
  Result r;
  r.body["case"] = glue_case_name(v.tag);
  r.body["case_number"] = numbers.count(v.tag) ? json(numbers.at(v.tag)) : json(nullptr);
  if (v.tag == GlueCase::Wiener) {
    r.body["V"] = "any";
  } else {
    r.body["V"] = v.v ? scalar_json(*v.v) : json(nullptr);
    r.body["V_squared"] = v.v_squared ? scalar_json(*v.v_squared) : json(nullptr);
  }
  if (v.tag == GlueCase::UpperBoundary) r.body["boundary_sign"] = v.boundary_sign;
  return r;
}

Result solve_t1i_cmd(const Options& o) {
  need(o.params, "--params");
  const QHParams<double> p = params_from_json<double>(load_json_arg(o.params));
  const T1IConstruction c = solve_t1i(p.eta, p.theta, p.sigma, p.tau);
  Result r;
  r.body["meixner"] = {{"theta", c.meixner_theta}, {"tau", c.meixner_tau}};
  r.body["span"] = c.span;
  r.body["slope"] = c.slope;
  r.body["scale"] = c.scale;
  r.body["forward"] = params_to_json(c.forward());
  return r;
}

Result identities_cmd(const Options& o) {
  if (o.trials < 1) throw UsageError("--trials must be positive");
  const auto results = run_identity_suite(o.trials, o.seed, rational(o) ? ScalarMode::Rational : ScalarMode::Float);
  Result r;
  r.body["trials"] = o.trials;
  r.body["seed"] = o.seed;
  json list = json::array();
  for (const auto& x : results) {
    json e = {{"name", x.name}, {"trials", x.trials}, {"failures", x.failures},
              {"verdict", x.passed() ? "PASS" : "FAIL"}};
    if (!x.first_failure.empty()) e["first_failure"] = x.first_failure;
    list.push_back(e);
    r.passed = r.passed && x.passed();
  }
  r.body["identities"] = list;
  r.body["verdict"] = r.passed ? "PASS" : "FAIL";
  return r;
}

// simulate / verify / pipeline -------------------------------------------------------

verify::Prediction prediction_for(const Options& o, const sim::ProcessDescriptor* d, const std::array<double, 3>& stu,
                                  json& cfg) {
  if (!o.params.empty()) {
    const json pj = load_json_arg(o.params);
    cfg["prediction"] = pj;
    return verify::predict(spec_from_json<double>(pj), stu[0], stu[1], stu[2]);
  }
  if (d == nullptr) throw UsageError("verify needs --params or --process for the prediction");
  const HarnessSpec<double> h = sim::harness_spec_for(*d);
  cfg["prediction"] = spec_to_json(h);
  return verify::predict(h, stu[0], stu[1], stu[2]);
}

Result simulate_cmd(const Options& o, json& cfg) {
  need(o.process, "--process");
  need(o.times, "--times");
  if (o.paths < 1) throw UsageError("--paths must be positive");
  const sim::ProcessDescriptor d = sim::parse_process_arg(o.process);
  const std::vector<double> times = double_list(o.times);
  cfg["process"] = sim::descriptor_to_json(d);
  cfg["times"] = times;
  cfg["paths"] = o.paths;
  cfg["seed"] = o.seed;
  const sim::PathEnsemble e = sim::sample_ensemble(d, times, o.paths, o.seed);
  Result r;
  r.body = sim::ensemble_csv(e);
  return r;
}

Result verify_cmd(const Options& o, json& cfg) {
  need(o.ensemble, "--ensemble");
  need(o.stu, "--stu");
  const auto stu = triple_arg(o.stu);
  sim::PathEnsemble e = sim::read_ensemble_csv_file(o.ensemble);
  std::optional<sim::ProcessDescriptor> d;
  if (!o.process.empty()) {
    d = sim::parse_process_arg(o.process);
    cfg["process"] = sim::descriptor_to_json(*d);
  }
  cfg["ensemble"] = o.ensemble;
  cfg["stu"] = stu;
  cfg["tol_sigmas"] = o.tol_sigmas;
  const verify::Prediction pred = prediction_for(o, d ? &*d : nullptr, stu, cfg);
  verify::FitReport fit = verify::fit_conditional_variance(e, stu[0], stu[1], stu[2]);
  verify::compare_to_prediction(fit, pred, stu, o.tol_sigmas);
  Result r;
  r.body = verify::fit_report_json(fit);
  r.passed = fit.passed();
  return r;
}

Result pipeline_cmd(const Options& o, json& cfg) {
  need(o.process, "--process");
  need(o.times, "--times");
  need(o.stu, "--stu");
  if (o.paths < 2) throw UsageError("--paths must be at least 2");
  const sim::ProcessDescriptor base = sim::parse_process_arg(o.process);
  sim::TransformKind kind;
  if (!o.transform.empty()) {
    kind = sim::parse_transform_arg(o.transform);
  } else if (const auto k = sim::default_standardization(base)) {
    kind = *k;
  } else {
    throw UsageError("no default standardization for '" + base.name() + "'; pass --transform");
  }
  const std::vector<double> targets = double_list(o.times);
  const auto stu = triple_arg(o.stu);
  const std::vector<double> src = sim::source_grid(kind, targets);
  cfg["process"] = sim::descriptor_to_json(base);
  cfg["transform"] = sim::transform_to_json(kind);
  cfg["times"] = targets;
  cfg["source_times"] = src;
  cfg["paths"] = o.paths;
  cfg["seed"] = o.seed;
  cfg["stu"] = stu;
  cfg["tol_sigmas"] = o.tol_sigmas;

  const sim::PathEnsemble e = sim::sample_ensemble(base, src, o.paths, o.seed);
  const sim::PathEnsemble y = sim::transform_paths(e, kind, targets);
  const sim::ProcessDescriptor td = sim::transformed(base, kind);
  const verify::Prediction pred = prediction_for(o, &td, stu, cfg);
  verify::FitReport fit = verify::fit_conditional_variance(y, stu[0], stu[1], stu[2]);
  verify::compare_to_prediction(fit, pred, stu, o.tol_sigmas);
  Result r;
  r.body = verify::fit_report_json(fit);
  r.passed = fit.passed();
  return r;
}

template <template <class> class F>
Result by_mode(const Options& o) {
  return rational(o) ? F<Rational>::run(o) : F<double>::run(o);
}

#define QH_MODE_ADAPTER(name, fn)                                \
  template <class S>                                             \
  struct name {                                                  \
    static Result run(const Options& o) { return fn<S>(o); }     \
  };
QH_MODE_ADAPTER(TransformRun, transform_cmd)
QH_MODE_ADAPTER(BridgeRun, bridge_cmd)
QH_MODE_ADAPTER(ConditionRun, condition_cmd)
QH_MODE_ADAPTER(MeixnerRun, meixner_cmd)
QH_MODE_ADAPTER(GlueRun, glue_cmd)
#undef QH_MODE_ADAPTER

void apply_thread_cap() {
  const char* env = std::getenv("QH_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("QH_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic harness toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_params = [&](CLI::App* s) { s->add_option("--params", o.params, "QH parameters or harness spec (JSON or file)"); };
  auto add_mode = [&](CLI::App* s) {
    s->add_option("--mode", o.mode, "float or rational")->check(CLI::IsMember({"float", "rational"}));
  };
  auto add_out = [&](CLI::App* s) { s->add_option("--out", o.out, "output path (default: stdout)"); };
  auto add_times = [&](CLI::App* s) {
    s->add_option("--R", o.R, "left conditioning time");
    s->add_option("--V", o.V, "right conditioning time");
    s->add_option("--zr", o.zr, "value at R");
    s->add_option("--zv", o.zv, "value at V");
  };

  auto* transform = app.add_subcommand("transform", "apply a space-time map or standardize a harness spec");
  add_params(transform);
  transform->add_option("--affine", o.affine, "a,b,c,d,m1,m2");
  transform->add_option("--factors", o.factors, "a,b,c,d with covariance (as+b)(ct+d)");
  add_mode(transform);
  add_out(transform);

  auto* bridge = app.add_subcommand("bridge", "condition on X_R and X_V");
  add_params(bridge);
  add_times(bridge);
  add_mode(bridge);
  add_out(bridge);

  auto* condition = app.add_subcommand("condition", "condition on X_V or on X_R");
  add_params(condition);
  add_times(condition);
  add_mode(condition);
  add_out(condition);

  auto* meixner = app.add_subcommand("meixner-bridge", "bridge of a Meixner process QH(0,theta;0,tau;1)");
  add_params(meixner);
  add_times(meixner);
  add_mode(meixner);
  add_out(meixner);

  auto* glue = app.add_subcommand("glue", "classify a gluing construction");
  add_params(glue);
  add_mode(glue);
  add_out(glue);

  auto* t1i = app.add_subcommand("solve-t1i", "construction data for sigma,tau > 0 targets");
  add_params(t1i);
  add_out(t1i);

  auto* identities = app.add_subcommand("identities", "randomized identity suite");
  identities->add_option("--trials", o.trials, "instances per identity");
  identities->add_option("--seed", o.seed, "seed");
  add_mode(identities);
  add_out(identities);

  auto* simulate = app.add_subcommand("simulate", "sample an ensemble to CSV");
  simulate->add_option("--process", o.process, "process name[:k=v,...] or JSON");
  simulate->add_option("--times", o.times, "comma-separated grid");
  simulate->add_option("--paths", o.paths, "number of paths");
  simulate->add_option("--seed", o.seed, "seed");
  add_out(simulate);

  auto* verify = app.add_subcommand("verify", "fit conditional moments of an ensemble");
  verify->add_option("--ensemble", o.ensemble, "ensemble CSV");
  verify->add_option("--stu", o.stu, "s,t,u");
  verify->add_option("--process", o.process, "process whose harness spec gives the prediction");
  add_params(verify);
  verify->add_option("--tol-sigmas", o.tol_sigmas, "tolerance in standard errors");
  add_out(verify);

  auto* pipeline = app.add_subcommand("pipeline", "simulate, transform pathwise and verify");
  pipeline->add_option("--process", o.process, "base process");
  pipeline->add_option("--transform", o.transform, "pathwise transform (default: standardization)");
  pipeline->add_option("--times", o.times, "target grid");
  pipeline->add_option("--paths", o.paths, "number of paths");
  pipeline->add_option("--seed", o.seed, "seed");
  pipeline->add_option("--stu", o.stu, "s,t,u");
  add_params(pipeline);
  pipeline->add_option("--tol-sigmas", o.tol_sigmas, "tolerance in standard errors");
  add_out(pipeline);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    apply_thread_cap();
    json cfg = base_config(name, o);
    Result r;
    bool csv = false;
    if (name == "transform") {
      r = by_mode<TransformRun>(o);
    } else if (name == "bridge") {
      r = by_mode<BridgeRun>(o);
    } else if (name == "condition") {
      r = by_mode<ConditionRun>(o);
    } else if (name == "meixner-bridge") {
      r = by_mode<MeixnerRun>(o);
    } else if (name == "glue") {
      r = by_mode<GlueRun>(o);
    } else if (name == "solve-t1i") {
      r = solve_t1i_cmd(o);
    } else if (name == "identities") {
      cfg["trials"] = o.trials;
      cfg["seed"] = o.seed;
      r = identities_cmd(o);
    } else if (name == "simulate") {
      r = simulate_cmd(o, cfg);
      csv = true;
    } else if (name == "verify") {
      r = verify_cmd(o, cfg);
    } else {
      r = pipeline_cmd(o, cfg);
    }
    if (!o.params.empty() && !cfg.contains("prediction")) cfg["params"] = load_json_arg(o.params);
    if (!o.R.empty()) cfg["R"] = o.R;
    if (!o.V.empty()) cfg["V"] = o.V;
    if (!o.zr.empty()) cfg["zr"] = o.zr;
    if (!o.zv.empty()) cfg["zv"] = o.zv;
    if (!o.affine.empty()) cfg["affine"] = o.affine;
    if (!o.factors.empty()) cfg["factors"] = o.factors;

    emit(o.out, csv ? r.body.get<std::string>() : dump(r.body), out);
    if (!o.out.empty()) {
      cfg["out"] = o.out;
      write_atomic(config_path(o.out), dump(cfg));
    }
    return r.passed ? 0 : 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
}

}  // namespace qh::cli
