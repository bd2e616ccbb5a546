#include "qh/core/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "qh/core/ops.hpp"

namespace qh {

namespace {

bool is_inf_token(const json& j, int& sign) {
  if (!j.is_string()) return false;
  const std::string s = j.get<std::string>();
  if (s == "inf" || s == "+inf") {
    sign = 1;
    return true;
  }
  if (s == "-inf") {
    sign = -1;
    return true;
  }
  return false;
}

template <Scalar S>
S field_or(const json& j, const char* key, const S& fallback) {
  if (!j.contains(key)) return fallback;
  return parse_scalar<S>(j.at(key));
}

template <Scalar S>
Endpoint<S> endpoint_from_json(const json& j) {
  int sign = 0;
  if (is_inf_token(j, sign)) return sign > 0 ? Endpoint<S>::pos_inf() : Endpoint<S>::neg_inf();
  return Endpoint<S>::finite(parse_scalar<S>(j));
}

template <Scalar S>
json endpoint_to_json(const Endpoint<S>& e) {
  if (e.infinite > 0) return "inf";
  if (e.infinite < 0) return "-inf";
  return scalar_json(e.value);
}

}  // namespace

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char ch : raw) {
    if (!std::isspace(static_cast<unsigned char>(ch))) text.push_back(ch);
  }
  if (text.empty()) raise(ErrorCode::ParseError, "empty number");
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const Rational num = parse_rational(text.substr(0, slash));
    const Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) raise(ErrorCode::ParseError, "zero denominator in '" + raw + "'");
    return num / den;
  }
  // Decimal with optional exponent, read exactly.
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') negative = text[pos++] == '-';
  boost::multiprecision::mpz_int digits = 0;
  long scale = 0;
  bool seen_digit = false;
  bool after_point = false;
  for (; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits = digits * 10 + (ch - '0');
      if (after_point) --scale;
      seen_digit = true;
    } else if (ch == '.' && !after_point) {
      after_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) raise(ErrorCode::ParseError, "not a number: '" + raw + "'");
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') raise(ErrorCode::ParseError, "not a number: '" + raw + "'");
    try {
      std::size_t used = 0;
      scale += std::stol(text.substr(pos + 1), &used);
      if (pos + 1 + used != text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      raise(ErrorCode::ParseError, "bad exponent in '" + raw + "'");
    }
  }
  Rational value(digits);
  const boost::multiprecision::mpz_int ten = 10;
  if (scale > 0) value *= Rational(boost::multiprecision::pow(ten, static_cast<unsigned>(scale)));
  if (scale < 0) value /= Rational(boost::multiprecision::pow(ten, static_cast<unsigned>(-scale)));
  return negative ? Rational(-value) : value;
}

std::string rational_string(const Rational& x) {
  return boost::multiprecision::numerator(x).str() +
         (boost::multiprecision::denominator(x) == 1 ? "" : "/" + boost::multiprecision::denominator(x).str());
}

template <>
double parse_scalar<double>(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    int sign = 0;
    if (is_inf_token(j, sign)) return sign * std::numeric_limits<double>::infinity();
    return parse_rational(j.get<std::string>()).convert_to<double>();
  }
  raise(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

template <>
Rational parse_scalar<Rational>(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return parse_rational(j.dump());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  raise(ErrorCode::ParseError, "expected a number, got " + j.dump());
}

template <>
json scalar_json<double>(const double& x) {
  return x;
}

template <>
json scalar_json<Rational>(const Rational& x) {
  return rational_string(x);
}

json load_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  std::string text = arg;
  if (first == std::string::npos || arg[first] != '{') {
    std::ifstream in(arg);
    if (!in) raise(ErrorCode::ParseError, "cannot read '" + arg + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, e.what());
  }
}

template <Scalar S>
QHParams<S> params_from_json(const json& j) {
  if (!j.is_object()) raise(ErrorCode::ParseError, "parameters must be a JSON object");
  QHParams<S> p;
  p.eta = field_or<S>(j, "eta", S(0));
  p.theta = field_or<S>(j, "theta", S(0));
  p.sigma = field_or<S>(j, "sigma", S(0));
  p.tau = field_or<S>(j, "tau", S(0));
  p.gamma = field_or<S>(j, "gamma", S(1));
  p.standard_infinite_horizon = j.value("standard_infinite_horizon", false);
  p.validate();
  return p;
}

template <Scalar S>
json params_to_json(const QHParams<S>& p) {
  json j;
  j["eta"] = scalar_json(p.eta);
  j["theta"] = scalar_json(p.theta);
  j["sigma"] = scalar_json(p.sigma);
  j["tau"] = scalar_json(p.tau);
  j["gamma"] = scalar_json(p.gamma);
  j["standard_infinite_horizon"] = p.standard_infinite_horizon;
  return j;
}

template <Scalar S>
json squared_to_json(const SquaredQH<S>& q) {
  json j;
  j["sigma"] = scalar_json(q.sigma);
  j["tau"] = scalar_json(q.tau);
  j["gamma"] = scalar_json(q.gamma);
  j["theta_sq"] = scalar_json(q.theta_sq);
  j["eta_sq"] = scalar_json(q.eta_sq);
  j["theta_eta"] = scalar_json(q.theta_eta);
  j["theta_sign"] = q.theta_sign;
  j["eta_sign"] = q.eta_sign;
  return j;
}

template <Scalar S>
HarnessSpec<S> spec_from_json(const json& j) {
  if (!j.is_object()) raise(ErrorCode::ParseError, "spec must be a JSON object");
  HarnessSpec<S> h;
  if (j.contains("mean")) {
    h.mean.slope = field_or<S>(j.at("mean"), "slope", S(0));
    h.mean.intercept = field_or<S>(j.at("mean"), "intercept", S(0));
  }
  if (j.contains("cov")) {
    const json& c = j.at("cov");
    h.cov = {field_or<S>(c, "c0", S(0)), field_or<S>(c, "c1", S(1)), field_or<S>(c, "c2", S(0)),
             field_or<S>(c, "c3", S(0))};
  }
  VarianceForm<S>& v = h.var_form;
  v.chi = field_or<S>(j, "chi", S(1));
  v.lin = {field_or<S>(j, "theta", S(0)), field_or<S>(j, "eta", S(0))};
  const S rho = j.contains("rho") ? parse_scalar<S>(j.at("rho")) : S(field_or<S>(j, "gamma", S(1)) - S(1));
  const S tau = field_or<S>(j, "tau", S(0));
  const S sigma = field_or<S>(j, "sigma", S(0));
  if (j.contains("interval")) {
    const json& iv = j.at("interval");
    if (!iv.is_array() || iv.size() != 2) raise(ErrorCode::ParseError, "interval must be [lo, hi]");
    h.interval = {endpoint_from_json<S>(iv[0]), endpoint_from_json<S>(iv[1])};
  }
  if (j.contains("g12")) {
    const S g12 = parse_scalar<S>(j.at("g12"));
    v.quad = {tau, g12, S(rho - g12), sigma};
    return h;
  }
  v.quad = {tau, S(0), rho, sigma};
  if (!is_zero(S(h.cov.c1 - h.cov.c2))) return normalize_gamma(h);
  return h;
}

template <Scalar S>
json interval_to_json(const Interval<S>& iv) {
  return json::array({endpoint_to_json(iv.lo), endpoint_to_json(iv.hi)});
}

template <Scalar S>
json spec_to_json(const HarnessSpec<S>& h) {
  json j;
  j["mean"] = {{"slope", scalar_json(h.mean.slope)}, {"intercept", scalar_json(h.mean.intercept)}};
  j["cov"] = {{"c0", scalar_json(h.cov.c0)},
              {"c1", scalar_json(h.cov.c1)},
              {"c2", scalar_json(h.cov.c2)},
              {"c3", scalar_json(h.cov.c3)}};
  j["chi"] = scalar_json(h.var_form.chi);
  j["theta"] = scalar_json(h.var_form.theta());
  j["eta"] = scalar_json(h.var_form.eta());
  j["tau"] = scalar_json(h.var_form.tau());
  j["sigma"] = scalar_json(h.var_form.sigma());
  j["rho"] = scalar_json(h.var_form.rho());
  j["g12"] = scalar_json(h.var_form.quad.b);
  j["interval"] = interval_to_json(h.interval);
  return j;
}

template <Scalar S>
AffineMap<S> affine_from_json(const json& j) {
  if (!j.is_object()) raise(ErrorCode::ParseError, "affine map must be a JSON object");
  return {field_or<S>(j, "a", S(1)), field_or<S>(j, "b", S(0)), field_or<S>(j, "c", S(0)),
          field_or<S>(j, "d", S(1)), field_or<S>(j, "m1", S(0)), field_or<S>(j, "m2", S(0))};
}

template <Scalar S>
json affine_to_json(const AffineMap<S>& f) {
  json j;
  j["a"] = scalar_json(f.a);
  j["b"] = scalar_json(f.b);
  j["c"] = scalar_json(f.c);
  j["d"] = scalar_json(f.d);
  j["m1"] = scalar_json(f.m1);
  j["m2"] = scalar_json(f.m2);
  return j;
}

template <Scalar S>
AffineMap<S> affine_from_csv(const std::string& text) {
  std::vector<S> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(parse_scalar<S>(json(item)));
  if (vals.size() != 6) raise(ErrorCode::ParseError, "--affine expects a,b,c,d,m1,m2");
  return {vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]};
}

#define QH_IO_INSTANTIATE(S)                                   \
  template QHParams<S> params_from_json<S>(const json&);       \
  template json params_to_json<S>(const QHParams<S>&);         \
  template json squared_to_json<S>(const SquaredQH<S>&);       \
  template HarnessSpec<S> spec_from_json<S>(const json&);      \
  template json spec_to_json<S>(const HarnessSpec<S>&);        \
  template AffineMap<S> affine_from_json<S>(const json&);      \
  template json affine_to_json<S>(const AffineMap<S>&);        \
  template AffineMap<S> affine_from_csv<S>(const std::string&); \
  template json interval_to_json<S>(const Interval<S>&);

QH_IO_INSTANTIATE(double)
QH_IO_INSTANTIATE(Rational)

#undef QH_IO_INSTANTIATE

}  // namespace qh
