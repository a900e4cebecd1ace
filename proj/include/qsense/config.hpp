#pragma once

// Run configuration files: a flat YAML mapping of AdaptiveConfig fields plus
// harness fields. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsense/protocol.hpp"
#include "qsense/simkit.hpp"

namespace qsense {

struct RunConfig {
  AdaptiveConfig adaptive;
  std::int64_t n_reps = 500;
  std::optional<IndexWindow> fit_window;
  double tail_fraction = 0.6;
  std::optional<std::string> out_prefix;

  /// Field-level messages for both the adaptive and harness fields.
  std::vector<std::string> validate() const;
};

/// Parse or validation failure; one message per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys missing from `text` keep their defaults.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Resolved config as (key, value) pairs in a fixed order. Values are YAML
/// scalars; reals use 17 significant digits, unset optionals are omitted.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

/// config_entries as "key: value" lines; parse_run_config reads them back.
std::string echo_config(const RunConfig& cfg);

/// Formats a double with 17 significant digits.
std::string format_real(double v);

}  // namespace qsense
