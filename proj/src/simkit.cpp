#include "qsense/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/Dense>

#include "qsense/information.hpp"

namespace qsense {

Trajectory run_single(const AdaptiveConfig& cfg, std::uint64_t master_seed, std::int64_t index) {
  Rng rng(repetition_seed(master_seed, index));
  return run_adaptive(cfg, rng);
}

IndexWindow default_fit_window(const std::vector<double>& mean_stage, double tail_fraction) {
  const std::size_t n = mean_stage.size();
  if (n == 0) throw DimensionError("default_fit_window: empty aggregate");
  std::size_t start = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (mean_stage[k] == 2.0) {
      start = k;
      break;
    }
  }
  if (start == n) start = 0;
  const std::size_t span = n - start;
  const auto skip = static_cast<std::size_t>(std::floor((1.0 - tail_fraction) * static_cast<double>(span)));
  return {std::min(start + skip, n - 1), n - 1};
}

AggregateResult aggregate(const std::vector<Trajectory>& trajectories,
                          const RepetitionOptions& opts) {
  if (trajectories.empty()) throw DimensionError("aggregate: no trajectories");
  AggregateResult agg;
  agg.n_repetitions = static_cast<std::int64_t>(trajectories.size());

  std::size_t len = trajectories.front().records.size();
  for (const auto& t : trajectories) {
    len = std::min(len, t.records.size());
    if (t.abort_reason) ++agg.n_aborted;
  }
  for (const auto& t : trajectories)
    if (t.records.size() > len) ++agg.n_truncated;
  if (len == 0) throw NumericalFailure("aggregate: a repetition produced no steps");

  const double n = static_cast<double>(trajectories.size());
  auto mean_of = [&](std::size_t k, auto field) {
    double sum = 0.0;
    for (const auto& t : trajectories) sum += field(t.records[k]);
    return sum / n;
  };
  for (std::size_t k = 0; k < len; ++k) {
    agg.step_axis.push_back(static_cast<std::int64_t>(k) + 1);
    agg.mean_stage.push_back(
        mean_of(k, [](const StepRecord& r) { return r.plan.stage == Stage::StageI ? 1.0 : 2.0; }));
    agg.mean_n_units.push_back(
        mean_of(k, [](const StepRecord& r) { return static_cast<double>(r.plan.n_units); }));
    agg.mean_tau.push_back(mean_of(k, [](const StepRecord& r) { return r.plan.tau; }));
    agg.mean_nu.push_back(
        mean_of(k, [](const StepRecord& r) { return static_cast<double>(r.plan.repetitions); }));
    agg.mean_delta_omega.push_back(mean_of(k, [](const StepRecord& r) { return r.delta_omega_k; }));
    agg.mean_cumulative_time.push_back(
        mean_of(k, [](const StepRecord& r) { return r.cumulative_time; }));
    agg.mean_zeta.push_back(mean_of(k, [](const StepRecord& r) { return r.zeta_k; }));
    agg.mean_scaled_alpha.push_back(
        mean_of(k, [](const StepRecord& r) { return r.scaled_alpha_k; }));
  }

  agg.fit_window = opts.fit_window ? *opts.fit_window
                                   : default_fit_window(agg.mean_stage, opts.tail_fraction);
  if (agg.fit_window.last >= len || agg.fit_window.first > agg.fit_window.last)
    throw RangeError("aggregate: fit window outside the aligned steps");
  if (agg.fit_window.last - agg.fit_window.first + 1 >= 3)
    agg.fit_slope =
        fit_loglog_slope(agg.mean_cumulative_time, agg.mean_delta_omega, agg.fit_window);
  else
    agg.fit_slope = std::nan("");
  return agg;
}

AggregateResult run_repetitions(const AdaptiveConfig& cfg, std::int64_t n_reps,
                                std::uint64_t master_seed, const RepetitionOptions& opts) {
  if (n_reps < 1) throw DomainError("run_repetitions: n_reps must be >= 1");
  std::vector<Trajectory> runs(static_cast<std::size_t>(n_reps));
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n_reps) return;
      try {
        Trajectory t = run_single(cfg, master_seed, i);
        t.final_posterior.reset();
        runs[static_cast<std::size_t>(i)] = std::move(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
      const std::int64_t finished = ++done;
      if (opts.on_progress) {
        std::lock_guard lock(progress_mutex);
        opts.on_progress(finished);
      }
    }
  };

  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_reps)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(runs, opts);
}

FringeScan fringe_scan(std::int64_t n_units, double zeta_min, double zeta_max,
                       std::int64_t n_points) {
  if (n_points < 2) throw DomainError("fringe_scan: need at least two points");
  if (!(zeta_min < zeta_max)) throw DomainError("fringe_scan: empty zeta range");
  FringeScan scan;
  scan.k_over_n.label = "k_over_n";
  scan.g_finite.label = "g_finite";
  scan.g_universal.label = "g_universal";
  const double n = static_cast<double>(n_units);
  const double step = (zeta_max - zeta_min) / static_cast<double>(n_points - 1);
  for (std::int64_t i = 0; i < n_points; ++i) {
    const double z = i + 1 == n_points ? zeta_max : zeta_min + step * static_cast<double>(i);
    const double omega = 2.0 * std::numbers::pi * (1.0 + z / n);
    const double k = std::abs(interference_factor(n_units, omega, 1.0)) / n;
    for (ScanResult* s : {&scan.k_over_n, &scan.g_finite, &scan.g_universal}) s->x_values.push_back(z);
    scan.k_over_n.y_values.push_back(k);
    scan.g_finite.y_values.push_back(g_finite(n_units, z));
    scan.g_universal.y_values.push_back(g_universal(z));
  }
  return scan;
}

ScanResult gsq_scan(const std::vector<double>& delta_zeta_values) {
  if (delta_zeta_values.empty()) throw DomainError("gsq_scan: no delta_zeta values");
  ScanResult out;
  out.label = "g_sq_mean";
  double prev = 0.0;
  for (double dz : delta_zeta_values) {
    if (!(dz > prev)) throw DomainError("gsq_scan: values must be positive and increasing");
    out.x_values.push_back(dz);
    out.y_values.push_back(g_sq_mean(dz));
    prev = dz;
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, std::int64_t n_points) {
  if (!(lo > 0.0) || !(hi > lo) || n_points < 2)
    throw DomainError("log_spaced: need 0 < lo < hi and at least two points");
  std::vector<double> out;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  const auto last = static_cast<double>(n_points - 1);
  for (std::int64_t i = 0; i < n_points; ++i) {
    if (i == 0) out.push_back(lo);
    else if (i + 1 == n_points) out.push_back(hi);
    else out.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / last));
  }
  return out;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                        IndexWindow window) {
  if (x.size() != y.size()) throw DimensionError("fit_loglog_slope: length mismatch");
  if (window.last >= x.size() || window.first > window.last ||
      window.last - window.first + 1 < 3)
    throw RangeError("fit_loglog_slope: window must hold at least three points");
  const auto m = static_cast<Eigen::Index>(window.last - window.first + 1);
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = window.first + static_cast<std::size_t>(i);
    if (!(x[k] > 0.0) || !(y[k] > 0.0))
      throw DomainError("fit_loglog_slope: values must be positive");
    design(i, 0) = 1.0;
    design(i, 1) = std::log(x[k]);
    rhs[i] = std::log(y[k]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  return coef[1];
}

double interpolate_loglog(const std::vector<double>& x, const std::vector<double>& y, double x0) {
  if (x.size() != y.size() || x.size() < 2)
    throw DimensionError("interpolate_loglog: need matching series of length >= 2");
  if (x0 < x.front() || x0 > x.back()) throw RangeError("interpolate_loglog: x0 outside data");
  const auto it = std::upper_bound(x.begin(), x.end(), x0);
  std::size_t hi = static_cast<std::size_t>(it - x.begin());
  hi = std::clamp<std::size_t>(hi, 1, x.size() - 1);
  const std::size_t lo = hi - 1;
  const double t = (std::log(x0) - std::log(x[lo])) / (std::log(x[hi]) - std::log(x[lo]));
  return std::exp((1.0 - t) * std::log(y[lo]) + t * std::log(y[hi]));
}

}  // namespace qsense
