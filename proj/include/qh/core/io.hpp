#pragma once

#include <string>

#include <json.hpp>

#include "qh/core/types.hpp"

// JSON encoding of core values. Scalars are JSON numbers in float mode and
// "p/q" strings in rational mode; both modes accept either form on input.

namespace qh {

using json = nlohmann::ordered_json;

template <Scalar S>
S parse_scalar(const json& j);
template <Scalar S>
json scalar_json(const S& x);

template <>
double parse_scalar<double>(const json& j);
template <>
Rational parse_scalar<Rational>(const json& j);
template <>
json scalar_json<double>(const double& x);
template <>
json scalar_json<Rational>(const Rational& x);

/// Parses "p/q", integers and decimals ("0.25" -> 1/4) exactly.
Rational parse_rational(const std::string& text);
std::string rational_string(const Rational& x);

/// Accepts inline JSON or a path to a JSON file.
json load_json_arg(const std::string& arg);

template <Scalar S>
QHParams<S> params_from_json(const json& j);
template <Scalar S>
json params_to_json(const QHParams<S>& p);

template <Scalar S>
json squared_to_json(const SquaredQH<S>& q);

/// Spec fields: mean, cov, chi, theta, eta, sigma, tau, rho (defaults to
/// gamma - 1 when gamma is given), optional g12, interval.
template <Scalar S>
HarnessSpec<S> spec_from_json(const json& j);
template <Scalar S>
json spec_to_json(const HarnessSpec<S>& h);

template <Scalar S>
AffineMap<S> affine_from_json(const json& j);
template <Scalar S>
json affine_to_json(const AffineMap<S>& f);

/// "a,b,c,d,m1,m2"
template <Scalar S>
AffineMap<S> affine_from_csv(const std::string& text);

template <Scalar S>
json interval_to_json(const Interval<S>& iv);

}  // namespace qh
