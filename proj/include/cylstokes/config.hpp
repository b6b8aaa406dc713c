#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cylstokes {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "CYLSTOKES_OUTPUT_DIR";

/// Experiment settings as sections of scalar or numeric-list values. Every key has a default;
/// files and flags may only override known keys with values of the same kind.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static const nlohmann::json& defaults();

  /// Reads a JSON object of sections ({"grid": {"nx": 32}}) or dotted keys ({"grid.nx": 32}).
  void merge_file(const std::string& path);
  void merge_json(const nlohmann::json& j);
  /// "section.key=value"; the value is parsed as JSON, falling back to a plain string.
  void set_flag(const std::string& assignment);
  void set(const std::string& path, const nlohmann::json& value);

  double num(const std::string& path) const;
  int integer(const std::string& path) const;
  std::string str(const std::string& path) const;
  std::vector<double> list(const std::string& path) const;

  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("run.seed")); }
  std::string output_dir() const;
  int threads() const { return integer("run.threads"); }

  const nlohmann::json& values() const { return values_; }
  /// FNV-1a of the canonical dump, excluding keys that do not change results
  /// (output directory and thread count); 16 hex digits.
  std::string hash() const;

 private:
  nlohmann::json values_;
  const nlohmann::json& at(const std::string& path) const;
};

}  // namespace cylstokes
