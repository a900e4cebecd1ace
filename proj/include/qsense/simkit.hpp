#pragma once

// Monte Carlo harnesses: multi-seed aggregation of adaptive runs, fringe and
// <g^2> scans, and log-log scaling fits.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsense/protocol.hpp"
#include "qsense/sampling.hpp"

namespace qsense {

/// Inclusive index range [first, last].
struct IndexWindow {
  std::size_t first;
  std::size_t last;
};

/// Per-step means over repetitions, aligned by step index.
struct AggregateResult {
  std::vector<std::int64_t> step_axis;
  std::vector<double> mean_stage;  // 1 = all reps in stage (i), 2 = all in stage (ii)
  std::vector<double> mean_n_units;
  std::vector<double> mean_tau;
  std::vector<double> mean_nu;
  std::vector<double> mean_delta_omega;
  std::vector<double> mean_cumulative_time;
  std::vector<double> mean_zeta;
  std::vector<double> mean_scaled_alpha;
  std::int64_t n_repetitions = 0;
  std::int64_t n_truncated = 0;  // runs longer than the common prefix
  std::int64_t n_aborted = 0;
  double fit_slope = 0.0;
  IndexWindow fit_window{0, 0};

  std::size_t size() const { return step_axis.size(); }
};

struct RepetitionOptions {
  unsigned threads = 1;
  std::optional<IndexWindow> fit_window;
  /// Fraction of stage-(ii) steps, counted from the end, used for the fit.
  double tail_fraction = 0.6;
  /// Called once per finished repetition with the number done so far.
  std::function<void(std::int64_t)> on_progress;
};

struct ScanResult {
  std::vector<double> x_values;
  std::vector<double> y_values;
  std::string label;
};

struct FringeScan {
  ScanResult k_over_n;
  ScanResult g_finite;
  ScanResult g_universal;
};

/// Seed of repetition `index` under `master_seed`.
inline std::uint64_t repetition_seed(std::uint64_t master_seed, std::int64_t index) {
  return split_seed(master_seed, static_cast<std::uint64_t>(index));
}

/// Runs one adaptive trajectory seeded with repetition_seed(master, index).
Trajectory run_single(const AdaptiveConfig& cfg, std::uint64_t master_seed, std::int64_t index);

/// Averages `trajectories` step by step and fits the stage-(ii) tail.
AggregateResult aggregate(const std::vector<Trajectory>& trajectories,
                          const RepetitionOptions& opts = {});

AggregateResult run_repetitions(const AdaptiveConfig& cfg, std::int64_t n_reps,
                                std::uint64_t master_seed, const RepetitionOptions& opts = {});

/// Last `tail_fraction` of the steps on which every repetition is in stage (ii);
/// falls back to the whole range when no such steps exist.
IndexWindow default_fit_window(const std::vector<double>& mean_stage, double tail_fraction);

FringeScan fringe_scan(std::int64_t n_units, double zeta_min, double zeta_max,
                       std::int64_t n_points);
ScanResult gsq_scan(const std::vector<double>& delta_zeta_values);

/// n_points values equally spaced in log10; both endpoints exact.
std::vector<double> log_spaced(double lo, double hi, std::int64_t n_points);

/// Ordinary least squares slope of log y against log x over the window.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                        IndexWindow window);

/// Log-log linear interpolation of y at x0; x must be increasing and x0 inside.
double interpolate_loglog(const std::vector<double>& x, const std::vector<double>& y, double x0);

}  // namespace qsense
