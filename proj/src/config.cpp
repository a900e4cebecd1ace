#include "qsense/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace qsense {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

template <class T>
std::function<void(const YAML::Node&)> setter(T& field) {
  return [&field](const YAML::Node& node) { field = node.as<T>(); };
}

template <class T>
std::function<void(const YAML::Node&)> optional_setter(std::optional<T>& field) {
  return [&field](const YAML::Node& node) {
    if (node.IsNull()) field.reset();
    else field = node.as<T>();
  };
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(join(messages)), messages_(std::move(messages)) {}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> RunConfig::validate() const {
  std::vector<std::string> errors = adaptive.validate();
  if (n_reps < 1) errors.push_back("n_reps: must be >= 1");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    errors.push_back("tail_fraction: must lie in (0, 1]");
  if (fit_window && fit_window->first > fit_window->last)
    errors.push_back("fit_first: must not exceed fit_last");
  return errors;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  AdaptiveConfig& a = cfg.adaptive;
  std::optional<std::int64_t> fit_first;
  std::optional<std::int64_t> fit_last;

  const std::map<std::string, std::function<void(const YAML::Node&)>> fields = {
      {"omega_true", setter(a.omega_true)},
      {"omega0", setter(a.omega0)},
      {"delta_omega0", setter(a.delta_omega0)},
      {"lambda", setter(a.lambda)},
      {"nbar", setter(a.nbar)},
      {"c_i", setter(a.c_i)},
      {"kappa_i", setter(a.kappa_i)},
      {"c", setter(a.c)},
      {"kappa", setter(a.kappa)},
      {"max_steps", setter(a.max_steps)},
      {"target_precision", optional_setter(a.target_precision)},
      {"max_total_time", optional_setter(a.max_total_time)},
      {"seed", setter(a.seed)},
      {"span_sigmas", setter(a.span_sigmas)},
      {"n_points", setter(a.n_points)},
      {"regrid_trigger_spacings", setter(a.regrid_trigger_spacings)},
      {"regrid_half_width_sigmas", setter(a.regrid_half_width_sigmas)},
      {"mode_valley_fraction", setter(a.mode_valley_fraction)},
      {"n_reps", setter(cfg.n_reps)},
      {"tail_fraction", setter(cfg.tail_fraction)},
      {"fit_first", optional_setter(fit_first)},
      {"fit_last", optional_setter(fit_last)},
      {"out_prefix", optional_setter(cfg.out_prefix)},
  };

  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError({std::string("syntax: ") + e.what()});
  }
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError({"config: expected a mapping of key: value pairs"});

  std::vector<std::string> errors;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto it = fields.find(key);
    if (it == fields.end()) {
      errors.push_back(key + ": unknown key");
      continue;
    }
    if (!kv.second.IsScalar() && !kv.second.IsNull()) {
      errors.push_back(key + ": expected a scalar value");
      continue;
    }
    try {
      it->second(kv.second);
    } catch (const YAML::Exception&) {
      errors.push_back(key + ": cannot parse '" + kv.second.Scalar() + "'");
    }
  }

  if (fit_first.has_value() != fit_last.has_value()) {
    errors.push_back("fit_first: fit_first and fit_last must be given together");
  } else if (fit_first) {
    if (*fit_first < 0 || *fit_last < 0)
      errors.push_back("fit_first: window indices must be >= 0");
    else
      cfg.fit_window = IndexWindow{static_cast<std::size_t>(*fit_first),
                                   static_cast<std::size_t>(*fit_last)};
  }

  if (errors.empty()) errors = cfg.validate();
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  const AdaptiveConfig& a = cfg.adaptive;
  std::vector<std::pair<std::string, std::string>> out = {
      {"omega_true", format_real(a.omega_true)},
      {"omega0", format_real(a.omega0)},
      {"delta_omega0", format_real(a.delta_omega0)},
      {"lambda", format_real(a.lambda)},
      {"nbar", format_real(a.nbar)},
      {"c_i", format_real(a.c_i)},
      {"kappa_i", format_real(a.kappa_i)},
      {"c", format_real(a.c)},
      {"kappa", format_real(a.kappa)},
      {"max_steps", std::to_string(a.max_steps)},
  };
  if (a.target_precision) out.emplace_back("target_precision", format_real(*a.target_precision));
  if (a.max_total_time) out.emplace_back("max_total_time", format_real(*a.max_total_time));
  out.emplace_back("seed", std::to_string(a.seed));
  out.emplace_back("span_sigmas", format_real(a.span_sigmas));
  out.emplace_back("n_points", std::to_string(a.n_points));
  out.emplace_back("regrid_trigger_spacings", format_real(a.regrid_trigger_spacings));
  out.emplace_back("regrid_half_width_sigmas", format_real(a.regrid_half_width_sigmas));
  out.emplace_back("mode_valley_fraction", format_real(a.mode_valley_fraction));
  out.emplace_back("n_reps", std::to_string(cfg.n_reps));
  out.emplace_back("tail_fraction", format_real(cfg.tail_fraction));
  if (cfg.fit_window) {
    out.emplace_back("fit_first", std::to_string(cfg.fit_window->first));
    out.emplace_back("fit_last", std::to_string(cfg.fit_window->last));
  }
  if (cfg.out_prefix) {
    YAML::Emitter e;
    e << YAML::DoubleQuoted << *cfg.out_prefix;
    out.emplace_back("out_prefix", e.c_str());
  }
  return out;
}

std::string echo_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + ": " + v + "\n";
  return out;
}

}  // namespace qsense
