#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ConfigType { kInt, kReal, kBool, kString };

struct ConfigKey {
  std::string name;
  ConfigType type;
  std::string full_default;
  std::string desk_default;  // empty: same as full_default
  std::string help;
  std::vector<std::string> choices;  // string keys only; empty = free text
  bool list = false;  // comma-separated choices
};

/// Every accepted key, in echo order.
const std::vector<ConfigKey>& config_schema();

/// key=value lines; '#' starts a comment. Unknown keys, malformed values
/// and repeated keys throw ConfigError naming `source` and the line.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  bool desk_scale = false;
};

class RunConfig {
 public:
  /// Schema defaults; desk_scale selects the reduced presets.
  static RunConfig defaults(bool desk_scale);
  /// Defaults, then the file (if any), then overrides. The desk preset is
  /// chosen when either the flag or the file asks for it.
  static RunConfig load(const std::optional<std::filesystem::path>& file, const ConfigOverrides& overrides);

  void set(const std::string& key, const std::string& value);

  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;
  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("seed")); }

  /// Fully resolved key=value text, defaults included.
  std::string resolved() const;
  void write_resolved(const std::filesystem::path& path) const;

 private:
  const std::string& raw(const std::string& key, ConfigType type) const;
  std::map<std::string, std::string> values_;
};

}  // namespace qdn
