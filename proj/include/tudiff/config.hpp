#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tudiff {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class ConfigType { Int, Real, Bool, String };

struct ConfigKey {
  std::string name;
  ConfigType type = ConfigType::String;
  std::string default_value;
  std::string help;
};

/// Every key a config file or --set override may use.
const std::vector<ConfigKey>& config_registry();

// Flat key-value configuration. Files are lines of "key = value" with '#'
// comments; every key must appear in the registry, unknown keys are hard
// errors. Values are kept as strings and parsed by the typed getters.
class Config {
 public:
  Config();  // registry defaults

  void load_file(const std::string& path);
  /// Applies one "key=value" override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  const std::string& get_string(const std::string& key) const;

  /// Comma-separated reals, e.g. "0,0.025,0.05".
  std::vector<double> get_real_list(const std::string& key) const;
  /// Comma-separated ints, e.g. "256,256,256"; empty string -> empty list.
  std::vector<long> get_int_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const ConfigKey& lookup(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace tudiff
