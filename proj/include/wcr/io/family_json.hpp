#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcr/families.hpp"

namespace wcr {

/// Built-in base by name: "gaussian", "laplace" or "logistic"; or an object
/// {"cdf_table": {"x": [...], "cdf": [...]}}.
inline BaseDensity base_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "gaussian") return gaussian_base();
    if (name == "laplace") return laplace_base();
    if (name == "logistic") return logistic_base();
    throw DomainError("unknown base density '" + name + "'");
  }
  if (j.is_object() && j.contains("cdf_table")) {
    const auto& t = j.at("cdf_table");
    if (!t.contains("x") || !t.contains("cdf")) throw DomainError("cdf_table needs \"x\" and \"cdf\" arrays");
    return tabulated_base(t.at("x").get<std::vector<double>>(), t.at("cdf").get<std::vector<double>>(),
                          j.value("name", std::string("cdf_table")));
  }
  throw DomainError("base must be a name or a {\"cdf_table\": ...} object");
}

/// Family descriptor:
///   {"kind": "location" | "scale" | "location-scale" | "custom",
///    "base": <base>,
///    "curve": {"mu": [c0, c1, ...], "sigma": [d0, d1, ...]}}   // custom only
/// A custom family is the one-parameter curve t -> (mu(t), sigma(t)) through
/// the location-scale family of the base, with polynomial mu and sigma.
inline ParametricFamily1D family_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.value("kind", std::string("location-scale"));
    const BaseDensity base = base_from_json(j.contains("base") ? j.at("base") : nlohmann::json("gaussian"));
    if (kind == "location") return make_location(base);
    if (kind == "scale") return make_scale(base);
    if (kind == "location-scale") return make_location_scale(base);
    if (kind == "custom") {
      if (!j.contains("curve")) throw DomainError("custom family needs a \"curve\" object");
      const auto& c = j.at("curve");
      return make_curve(base, c.at("mu").get<std::vector<double>>(), c.at("sigma").get<std::vector<double>>());
    }
    throw DomainError("unknown family kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed family descriptor: ") + e.what());
  }
}

/// Inline JSON text, or a path to a file holding it.
inline ParametricFamily1D family_from_descriptor(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  std::string body = text;
  if (first == std::string::npos || text[first] != '{') {
    std::ifstream in(text);
    if (!in) throw DomainError("cannot open family descriptor file '" + text + "'");
    std::ostringstream os;
    os << in.rdbuf();
    body = os.str();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("family descriptor is not valid JSON: ") + e.what());
  }
  return family_from_json(j);
}

}  // namespace wcr
