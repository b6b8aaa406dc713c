#include "cylstokes/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "cylstokes/common.hpp"
#include "cylstokes/stats.hpp"

namespace cylstokes {

using nlohmann::json;

namespace {

std::pair<std::string, std::string> split_path(const std::string& path) {
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size() || path.find('.', dot + 1) != std::string::npos)
    throw ConfigError(path + ": expected a 'section.key' path");
  return {path.substr(0, dot), path.substr(dot + 1)};
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  if (a.is_string() && b.is_string()) return true;
  if (a.is_array() && b.is_array()) {
    for (const auto& v : b)
      if (!v.is_number()) return false;
    return true;
  }
  return false;
}

std::string kind(const json& v) {
  if (v.is_number()) return "a number";
  if (v.is_string()) return "a string";
  if (v.is_array()) return "a list of numbers";
  return "a value";
}

}  // namespace

const json& ExperimentConfig::defaults() {
  static const json d = [] {
    const double pi = kPi;
    json j;
    j["grid"] = {{"lx", pi}, {"ly", pi}, {"nx", 32}, {"ny", 32}};
    j["weight"] = {{"spec", "power:a=0.5,cx=1.5707963267948966,cy=1.5707963267948966"}};
    j["rates"] = {{"beta", 0.5}, {"alpha", 0.5}};
    j["sector"] = {{"fraction", 0.5}};
    j["norm"] = {{"p", 2.0}, {"q", 2.0}, {"r", 2.0}};
    j["eig"] = {{"sizes", {32, 64, 128}}, {"min_order", 1.8}, {"max_rel_error", 0.003}};
    j["ar"] = {{"exponents", {-3.0, -1.0, 0.5, 1.0, 6.0}}, {"r", {2.0, 3.0}}, {"max_depth", 9}};
    j["mode"] = {{"lambda_re", 1.0}, {"lambda_im", 2.0}, {"xi", 1.3}, {"mms_sizes", {16, 32, 64}},
                 {"min_order", 1.8}, {"residual_tolerance", 1e-10}};
    j["sweep"] = {{"radius_min", 1e-2},  {"radius_max", 1e4},
                  {"radius_count", 13},  {"xi_min", 1e-2},
                  {"xi_max", 1e2},       {"xi_count", 9},
                  {"ray_fractions", {-0.9, -0.45, 0.0, 0.45, 0.9}},
                  {"exponents", {2.0, 3.0}}, {"max_over_median", 50.0}};
    j["deriv"] = {{"lambda_re", {1.0, 0.5, -0.2, 2.0, 10.0}},
                  {"lambda_im", {0.0, 1.0, 0.5, -3.0, 5.0}},
                  {"xi", {0.7, -1.3, 0.2, 3.0, -0.05}},
                  {"forcings", 10},
                  {"delta", 1e-3},
                  {"tolerance", 1e-4}};
    j["resolvent"] = {{"nx", 8},
                      {"axial_half_length", 8 * pi},
                      {"axial_points", 32},
                      {"radius_min", 1e-2},
                      {"radius_max", 1e3},
                      {"radius_count", 11},
                      {"ensemble", 8},
                      {"oracle_tolerance", 0.05}};
    j["rbound"] = {{"nx", 16},
                   {"lambda_re", {1.0, -0.3}},
                   {"lambda_im", {0.0, 2.0}},
                   {"xi_count", 9},
                   {"trials", 256},
                   {"terms", 8},
                   {"stability", 0.25},
                   {"sanity_coefficients", {0.3, -1.7, 0.9, 2.4, -0.2, 1.1, 0.5, -2.0}},
                   {"sanity_tolerance", 0.1}};
    j["decay"] = {{"nx", 8},
                  {"axial_half_length", 2 * pi},
                  {"axial_points", 8},
                  {"samples", 200},
                  {"initial_data", 10},
                  {"beta_fractions", {0.2, 0.5, 0.8}},
                  {"fit_from", 1.0},
                  {"margin", 0.05}};
    j["maxreg"] = {{"nx", 8},
                   {"axial_half_length", 2 * pi},
                   {"axial_points", 16},
                   {"steps", 64},
                   {"forcings", 20},
                   {"p", {2.0, 4.0}},
                   {"alpha_t_fraction", 0.5},
                   {"stability", 0.2},
                   {"oracle_tolerance", 0.05}};
    j["run"] = {{"seed", 1}, {"threads", 0}, {"output_dir", ""}};
    return j;
  }();
  return d;
}

ExperimentConfig::ExperimentConfig() : values_(defaults()) {}

void ExperimentConfig::set(const std::string& path, const json& value) {
  const auto [section, key] = split_path(path);
  const json& d = defaults();
  if (!d.contains(section)) throw ConfigError(path + ": unknown section '" + section + "'");
  if (!d[section].contains(key)) throw ConfigError(path + ": unknown key '" + key + "'");
  if (!same_kind(d[section][key], value)) throw ConfigError(path + ": expected " + kind(d[section][key]));
  values_[section][key] = value;
}

void ExperimentConfig::merge_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [name, value] : j.items()) {
    if (name.find('.') != std::string::npos) {
      set(name, value);
    } else {
      if (!value.is_object()) throw ConfigError(name + ": section must be a JSON object");
      for (const auto& [key, v] : value.items()) set(name + "." + key, v);
    }
  }
}

void ExperimentConfig::merge_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON (" + e.what() + ")");
  }
  merge_json(j);
}

void ExperimentConfig::set_flag(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment + ": expected section.key=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  set(path, value);
}

const json& ExperimentConfig::at(const std::string& path) const {
  const auto [section, key] = split_path(path);
  if (!values_.contains(section) || !values_[section].contains(key)) throw ConfigError(path + ": unknown key");
  return values_[section][key];
}

double ExperimentConfig::num(const std::string& path) const {
  const json& v = at(path);
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + ": must be finite");
  return x;
}

int ExperimentConfig::integer(const std::string& path) const {
  const double x = num(path);
  if (x != std::floor(x) || std::abs(x) > 2e9) throw ConfigError(path + ": expected an integer");
  return static_cast<int>(x);
}

std::string ExperimentConfig::str(const std::string& path) const {
  const json& v = at(path);
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> ExperimentConfig::list(const std::string& path) const {
  const json& v = at(path);
  if (!v.is_array()) throw ConfigError(path + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

std::string ExperimentConfig::output_dir() const {
  const std::string configured = str("run.output_dir");
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "reports";
}

std::string ExperimentConfig::hash() const {
  json canonical = values_;
  canonical["run"].erase("output_dir");
  canonical["run"].erase("threads");
  const std::string text = canonical.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

}  // namespace cylstokes
