#pragma once

// Two-stage adaptive controller. Stage (i) runs while the frequency
// uncertainty exceeds the effective coupling and boosts each step with
// repeated measurements; stage (ii) stretches the evolution time as
// 1/sqrt(delta_omega) with a fixed repetition count.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qsense/estimation.hpp"
#include "qsense/model.hpp"

namespace qsense {

using Rng = std::mt19937_64;

struct AdaptiveConfig {
  double omega_true = 50.0;
  double omega0 = 50.5;
  double delta_omega0 = 0.5;
  double lambda = 0.1;
  double nbar = 10.0;
  double c_i = 0.1;
  double kappa_i = 2.0;
  double c = 0.1;
  double kappa = 2.0;
  std::int64_t max_steps = 200;
  std::optional<double> target_precision;
  std::optional<double> max_total_time;
  std::uint64_t seed = 0;

  // Grid policy.
  double span_sigmas = 8.0;
  std::int64_t n_points = 4096;
  double regrid_trigger_spacings = 20.0;  // regrid once delta_omega < this many spacings
  double regrid_half_width_sigmas = 10.0;
  /// delta_omega is the RMS over the MLE's mode, bounded by valleys deeper than
  /// this fraction of its peak; 0 integrates over the whole grid.
  double mode_valley_fraction = 1e-6;

  /// One message per violated field; empty when valid.
  std::vector<std::string> validate() const;
};

enum class Stage { StageI, StageII };

struct StepPlan {
  Stage stage;
  std::int64_t n_units;
  double tau;
  std::int64_t repetitions;
  double lambda_tilde_k;
};

struct StepRecord {
  std::int64_t step_index;
  StepPlan plan;
  std::int64_t n_plus;
  std::int64_t n_minus;
  double omega_k;
  double delta_omega_k;
  double zeta_k;           // at the true frequency
  double scaled_alpha_k;   // sqrt(2 nbar + 1) |alpha| at the true frequency
  double cumulative_time;
  double gain_G_k;         // eta_i lambda_tilde_k / delta_omega in stage (i), eta in stage (ii)
};

struct Trajectory {
  std::vector<StepRecord> records;
  Estimate final_estimate;
  double stage1_time = 0.0;
  double stage2_time = 0.0;
  std::optional<Posterior> final_posterior;
  std::optional<std::string> abort_reason;

  double total_time() const { return stage1_time + stage2_time; }
};

/// Nearest integer, halves away from zero.
std::int64_t nint(double a);

/// lambda sqrt(2 nbar + 1) / pi: the CPMG effective coupling at omega tau = 2 pi.
double lambda_tilde_cpmg(double lambda, double nbar);

/// sqrt(2 nbar + 1) |alpha_1(tau, omega_est)| / tau for an arbitrary unit.
double lambda_tilde_step(const PulseSequence<double>& seq, double lambda, double nbar,
                         double omega_est, double tau);

/// eta_i = 4 pi g_rms / kappa_i^2.
double stage1_information_gain(double kappa_i);

StepPlan stage1_plan(double omega_est, double delta_omega_est, const AdaptiveConfig& cfg);
StepPlan stage2_plan(double omega_est, double delta_omega_est, const AdaptiveConfig& cfg);

/// True once the uncertainty has dropped strictly below the effective coupling.
bool stage_transition(double delta_omega_k, double lambda_tilde_k);

/// P(+1 | omega) on every node of `nodes` for N CPMG units of duration tau.
Eigen::ArrayXd likelihood_plus(const Eigen::ArrayXd& nodes, const StepPlan& plan, double lambda,
                               double nbar);

Trajectory run_adaptive(const AdaptiveConfig& cfg, Rng& rng);

}  // namespace qsense
