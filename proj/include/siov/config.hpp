#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "siov/strategy.hpp"

namespace siov {

/// Base class of every configuration problem reported to the user.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingFileError : public ConfigError {
 public:
  explicit MissingFileError(const std::string& path)
      : ConfigError("config file not found: " + path) {}
};

class UnknownKeyError : public ConfigError {
 public:
  explicit UnknownKeyError(const std::string& key)
      : ConfigError("unknown config key: " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class OutOfRangeError : public ConfigError {
 public:
  OutOfRangeError(const std::string& key, const std::string& why)
      : ConfigError("value out of range for " + key + ": " + why), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// World cannot be laid out with the requested sizes.
class SetupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SimConfig {
  int grid_size{75};
  int poi_count{15};
  int home_count{500};
  int strong_tie_threshold{5};
  StrategyKind strategy{StrategyKind::AsPlanned};
  int weeks{20};
  int runs{100};
  double step_sigma{0.05};
  std::uint64_t seed{0};
  bool closure_requires_both_strong{false};

  /// Ten percent more vehicles than homes, rounded up.
  int vehicle_count() const { return (home_count * 11 + 9) / 10; }

  /// Checks the fields that shape a single world.
  void validate_world() const {
    require(grid_size >= 1, "grid_size", "must be >= 1");
    require(poi_count >= 1, "poi_count", "must be >= 1");
    require(home_count >= 1, "home_count", "must be >= 1");
    require(strong_tie_threshold >= 1, "threshold", "must be >= 1");
    require(step_sigma > 0.0, "step_sigma", "must be > 0");
  }

  void validate() const {
    validate_world();
    require(weeks >= 1, "weeks", "must be >= 1");
    require(runs >= 1, "runs", "must be >= 1");
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;

 private:
  static void require(bool ok, const char* key, const char* why) {
    if (!ok) throw OutOfRangeError(key, why);
  }
};

}  // namespace siov
