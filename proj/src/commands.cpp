#include "qsense/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsense/config.hpp"
#include "qsense/information.hpp"
#include "qsense/simkit.hpp"

namespace qsense::cli {

namespace {

using nlohmann::ordered_json;

struct Output {
  std::ofstream file;
  std::ostream* stream = &std::cout;

  explicit Output(const std::string& path) {
    if (path == "-") return;
    file.open(path);
    if (!file) throw IoError("cannot open " + path + " for writing");
    stream = &file;
  }

  std::ostream& operator*() { return *stream; }

  void close(const std::string& path) {
    stream->flush();
    if (!*stream) throw IoError("write to " + path + " failed");
    if (file.is_open()) file.close();
  }
};

std::string row(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ',';
    out += format_real(v);
  }
  return out + '\n';
}

ordered_json real_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json config_json(const RunConfig& cfg) {
  const AdaptiveConfig& a = cfg.adaptive;
  ordered_json j;
  j["omega_true"] = a.omega_true;
  j["omega0"] = a.omega0;
  j["delta_omega0"] = a.delta_omega0;
  j["lambda"] = a.lambda;
  j["nbar"] = a.nbar;
  j["c_i"] = a.c_i;
  j["kappa_i"] = a.kappa_i;
  j["c"] = a.c;
  j["kappa"] = a.kappa;
  j["max_steps"] = a.max_steps;
  j["target_precision"] = a.target_precision ? ordered_json(*a.target_precision) : nullptr;
  j["max_total_time"] = a.max_total_time ? ordered_json(*a.max_total_time) : nullptr;
  j["seed"] = a.seed;
  j["span_sigmas"] = a.span_sigmas;
  j["n_points"] = a.n_points;
  j["regrid_trigger_spacings"] = a.regrid_trigger_spacings;
  j["regrid_half_width_sigmas"] = a.regrid_half_width_sigmas;
  j["mode_valley_fraction"] = a.mode_valley_fraction;
  j["n_reps"] = cfg.n_reps;
  j["tail_fraction"] = cfg.tail_fraction;
  if (cfg.fit_window) {
    j["fit_first"] = cfg.fit_window->first;
    j["fit_last"] = cfg.fit_window->last;
  }
  return j;
}

void write_config_comments(std::ostream& out, const char* title, const RunConfig& cfg) {
  out << "## qsense " << title << '\n';
  for (const auto& [k, v] : config_entries(cfg)) out << "# " << k << ": " << v << '\n';
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("QSENSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw ConfigError({"QSENSE_THREADS: expected a positive integer"});
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// fringes -----------------------------------------------------------------

struct FringesArgs {
  std::int64_t n_units = 50;
  double zeta_min = -10.0;
  double zeta_max = 10.0;
  std::int64_t points = 2001;
  std::string out = "-";
};

int cmd_fringes(const FringesArgs& a) {
  std::vector<std::string> errors;
  if (a.n_units < 2) errors.push_back("--n-units: must be >= 2");
  if (!(a.zeta_min < a.zeta_max)) errors.push_back("--zeta-min: must be below --zeta-max");
  if (a.points < 2) errors.push_back("--points: must be >= 2");
  if (!errors.empty()) throw ConfigError(errors);
  const FringeScan scan = fringe_scan(a.n_units, a.zeta_min, a.zeta_max, a.points);
  Output out(a.out);
  *out << "## qsense fringes\n"
       << "# n_units: " << a.n_units << '\n'
       << "# zeta_min: " << format_real(a.zeta_min) << '\n'
       << "# zeta_max: " << format_real(a.zeta_max) << '\n'
       << "# points: " << a.points << '\n'
       << "zeta,k_over_n,g_finite,g_universal\n";
  for (std::size_t i = 0; i < scan.k_over_n.x_values.size(); ++i)
    *out << row({scan.k_over_n.x_values[i], scan.k_over_n.y_values[i], scan.g_finite.y_values[i],
                 scan.g_universal.y_values[i]});
  out.close(a.out);
  return kOk;
}

// gsq ---------------------------------------------------------------------

struct GsqArgs {
  double min = 0.1;
  double max = 1000.0;
  std::int64_t points = 81;
  double fit_min = 10.0;
  double fit_max = 1000.0;
  std::string out = "-";
  std::string summary;
};

int cmd_gsq(const GsqArgs& a) {
  std::vector<std::string> errors;
  if (!(a.min > 0.0 && a.min < a.max)) errors.push_back("--min: need 0 < --min < --max");
  if (a.points < 2) errors.push_back("--points: must be >= 2");
  if (!errors.empty()) throw ConfigError(errors);
  const ScanResult scan = gsq_scan(log_spaced(a.min, a.max, a.points));
  const auto& x = scan.x_values;

  std::size_t first = x.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= a.fit_min && x[i] <= a.fit_max) {
      first = std::min(first, i);
      last = i;
    }
  }
  double slope = std::nan("");
  if (first < x.size() && last >= first + 2) slope = fit_loglog_slope(x, scan.y_values, {first, last});

  Output out(a.out);
  *out << "## qsense gsq\n"
       << "# min: " << format_real(a.min) << '\n'
       << "# max: " << format_real(a.max) << '\n'
       << "# points: " << a.points << '\n'
       << "delta_zeta,g_sq_mean\n";
  for (std::size_t i = 0; i < x.size(); ++i) *out << row({x[i], scan.y_values[i]});
  out.close(a.out);

  ordered_json j;
  j["command"] = "gsq";
  j["inputs"] = {{"min", a.min}, {"max", a.max}, {"points", a.points},
                 {"fit_min", a.fit_min}, {"fit_max", a.fit_max}};
  j["g_rms_unit_window"] = g_rms(1.0);
  j["fit_slope"] = real_or_null(slope);
  j["fit_points"] = first < x.size() ? last - first + 1 : 0;
  if (a.summary.empty()) {
    std::cerr << j.dump() << '\n';
  } else {
    Output s(a.summary);
    *s << j.dump(2) << '\n';
    s.close(a.summary);
  }
  return kOk;
}

// adapt -------------------------------------------------------------------

struct AdaptArgs {
  std::string config;
  std::optional<std::int64_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_prefix;
  std::optional<std::int64_t> fit_first;
  std::optional<std::int64_t> fit_last;
  std::optional<unsigned> threads;
  std::string posterior_csv;
  bool timing = false;
  bool quiet = false;
};

int cmd_adapt(const AdaptArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (a.reps) cfg.n_reps = *a.reps;
  if (a.seed) cfg.adaptive.seed = *a.seed;
  if (a.out_prefix) cfg.out_prefix = *a.out_prefix;
  if (a.fit_first.has_value() != a.fit_last.has_value())
    throw ConfigError({"--fit-first: --fit-first and --fit-last must be given together"});
  if (a.fit_first) {
    if (*a.fit_first < 0 || *a.fit_last < 0)
      throw ConfigError({"--fit-first: window indices must be >= 0"});
    cfg.fit_window = IndexWindow{static_cast<std::size_t>(*a.fit_first),
                                 static_cast<std::size_t>(*a.fit_last)};
  }
  if (const auto errors = cfg.validate(); !errors.empty()) throw ConfigError(errors);
  const std::string prefix = cfg.out_prefix.value_or("adapt");

  RepetitionOptions opts;
  opts.threads = resolve_threads(a.threads);
  opts.fit_window = cfg.fit_window;
  opts.tail_fraction = cfg.tail_fraction;
  if (!a.quiet) {
    opts.on_progress = [n = cfg.n_reps](std::int64_t done) {
      std::cerr << "\radapt: " << done << '/' << n << std::flush;
      if (done == n) std::cerr << '\n';
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  const AggregateResult agg = run_repetitions(cfg.adaptive, cfg.n_reps, cfg.adaptive.seed, opts);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string steps_path = prefix + "_steps.csv";
  {
    Output out(steps_path);
    write_config_comments(*out, "adapt", cfg);
    *out << "step,stage,n_units,tau,nu,mean_time,mean_delta_omega,mean_zeta,mean_scaled_alpha\n";
    for (std::size_t k = 0; k < agg.size(); ++k) {
      *out << agg.step_axis[k] << ','
           << row({agg.mean_stage[k], agg.mean_n_units[k], agg.mean_tau[k], agg.mean_nu[k],
                   agg.mean_cumulative_time[k], agg.mean_delta_omega[k], agg.mean_zeta[k],
                   agg.mean_scaled_alpha[k]});
    }
    out.close(steps_path);
  }

  ordered_json j;
  j["command"] = "adapt";
  j["config"] = config_json(cfg);
  j["n_repetitions"] = agg.n_repetitions;
  j["n_steps"] = agg.size();
  j["n_truncated"] = agg.n_truncated;
  j["n_aborted"] = agg.n_aborted;
  j["fit_slope"] = real_or_null(agg.fit_slope);
  j["fit_window"] = {agg.fit_window.first, agg.fit_window.last};
  j["final_mean_delta_omega"] = agg.mean_delta_omega.back();
  j["final_mean_time"] = agg.mean_cumulative_time.back();
  if (a.timing) j["wall_clock_seconds"] = wall;
  const std::string summary_path = prefix + "_summary.json";
  {
    Output out(summary_path);
    *out << j.dump(2) << '\n';
    out.close(summary_path);
  }

  if (!a.posterior_csv.empty()) {
    const Trajectory t = run_single(cfg.adaptive, cfg.adaptive.seed, 0);
    Output out(a.posterior_csv);
    write_config_comments(*out, "adapt posterior (repetition 0)", cfg);
    write_posterior_csv(*out, *t.final_posterior);
    out.close(a.posterior_csv);
  }

  if (!a.quiet) {
    std::fprintf(stderr, "adapt: %lld steps, fit slope %s, %.2f s\n",
                 static_cast<long long>(agg.size()), format_real(agg.fit_slope).c_str(), wall);
  }
  if (agg.n_aborted > 0) {
    std::fprintf(stderr, "adapt: %lld repetition(s) aborted\n",
                 static_cast<long long>(agg.n_aborted));
    return kNumericalFailure;
  }
  return kOk;
}

// compare -----------------------------------------------------------------

struct CompareArgs {
  std::string config;
  double k_factor = 1.0;
  double t2 = 1e-3;
  double omega = 2.0 * std::numbers::pi * 1e8;
  std::string out = "-";
};

int cmd_compare(const CompareArgs& a) {
  const RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  std::vector<std::string> errors;
  if (!(a.k_factor > 0.0)) errors.push_back("--k-factor: must be positive");
  if (!(a.t2 > 0.0)) errors.push_back("--t2: must be positive");
  if (!(a.omega > 0.0)) errors.push_back("--omega: must be positive");
  if (!errors.empty()) throw ConfigError(errors);

  const double lt = lambda_tilde_cpmg(cfg.adaptive.lambda, cfg.adaptive.nbar);
  const ComparisonReport r = compare_control(a.k_factor, a.omega, Coupling<double>(cfg.adaptive.lambda),
                                             EffectiveCoupling(lt), a.t2);
  ordered_json j;
  j["command"] = "compare";
  j["inputs"] = {{"k_factor", a.k_factor}, {"omega", a.omega}, {"t2", a.t2},
                 {"lambda", cfg.adaptive.lambda}, {"nbar", cfg.adaptive.nbar},
                 {"lambda_tilde", lt}};
  j["time_cost_ratio"] = r.time_cost_ratio;
  j["sensitivity_controlled"] = r.sensitivity_controlled;
  j["sensitivity_free"] = r.sensitivity_free;
  j["sensitivity_gain"] = r.sensitivity_gain;
  Output out(a.out);
  *out << j.dump(2) << '\n';
  out.close(a.out);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Adaptive frequency estimation with a periodically controlled qubit probe"};
  app.require_subcommand(1);

  FringesArgs fa;
  auto* fringes = app.add_subcommand("fringes", "interference fringes |K|/N and fringe slope g");
  fringes->add_option("--n-units", fa.n_units, "number of control units N")->capture_default_str();
  fringes->add_option("--zeta-min", fa.zeta_min)->capture_default_str();
  fringes->add_option("--zeta-max", fa.zeta_max)->capture_default_str();
  fringes->add_option("--points", fa.points)->capture_default_str();
  fringes->add_option("--out", fa.out, "CSV path, - for stdout")->capture_default_str();

  GsqArgs ga;
  auto* gsq = app.add_subcommand("gsq", "<g^2> over the window [1 - dz, 1 + dz]");
  gsq->add_option("--min", ga.min)->capture_default_str();
  gsq->add_option("--max", ga.max)->capture_default_str();
  gsq->add_option("--points", ga.points, "log-spaced sample count")->capture_default_str();
  gsq->add_option("--fit-min", ga.fit_min)->capture_default_str();
  gsq->add_option("--fit-max", ga.fit_max)->capture_default_str();
  gsq->add_option("--out", ga.out, "CSV path, - for stdout")->capture_default_str();
  gsq->add_option("--summary", ga.summary, "JSON summary path (default: stderr)");

  AdaptArgs aa;
  auto* adapt = app.add_subcommand("adapt", "repeated adaptive runs, averaged step by step");
  adapt->add_option("--config", aa.config, "YAML run config");
  adapt->add_option("--reps", aa.reps);
  adapt->add_option("--seed", aa.seed);
  adapt->add_option("--out-prefix", aa.out_prefix);
  adapt->add_option("--fit-first", aa.fit_first, "first step index (0-based) of the fit window");
  adapt->add_option("--fit-last", aa.fit_last);
  adapt->add_option("--threads", aa.threads, "worker count (default: QSENSE_THREADS or all cores)");
  adapt->add_option("--posterior-csv", aa.posterior_csv, "final posterior of repetition 0");
  adapt->add_flag("--timing", aa.timing, "record wall-clock time in the summary");
  adapt->add_flag("--quiet", aa.quiet, "no progress output");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "controlled vs free-evolution sensitivity");
  compare->add_option("--config", ca.config, "YAML run config (lambda, nbar)");
  compare->add_option("--k-factor", ca.k_factor)->capture_default_str();
  compare->add_option("--t2", ca.t2)->capture_default_str();
  compare->add_option("--omega", ca.omega)->capture_default_str();
  compare->add_option("--out", ca.out, "JSON path, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*fringes) return cmd_fringes(fa);
    if (*gsq) return cmd_gsq(ga);
    if (*adapt) return cmd_adapt(aa);
    if (*compare) return cmd_compare(ca);
  } catch (const ConfigError& e) {
    for (const auto& m : e.messages()) std::cerr << "config error: " << m << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kConfigError;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("qsense");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qsense::cli
