#include "qsense/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qsense/information.hpp"
#include "qsense/sampling.hpp"

namespace qsense {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Largest unit count / repetition count the controller will schedule.
constexpr double kMaxCount = 1e15;

std::int64_t checked_count(double raw, const char* what) {
  if (!std::isfinite(raw) || raw > kMaxCount)
    throw NumericalFailure(std::string("controller produced an unusable ") + what);
  return std::max<std::int64_t>(nint(raw), 1);
}

void require_estimate(double omega_est, double delta_omega_est) {
  if (!(omega_est > 0.0) || !(delta_omega_est > 0.0))
    throw DomainError("controller: estimate and uncertainty must be positive");
}

}  // namespace

std::vector<std::string> AdaptiveConfig::validate() const {
  std::vector<std::string> errors;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(std::string(name) + ": must be positive");
  };
  positive("omega_true", omega_true);
  positive("omega0", omega0);
  positive("delta_omega0", delta_omega0);
  positive("lambda", lambda);
  positive("c_i", c_i);
  positive("c", c);
  positive("span_sigmas", span_sigmas);
  positive("regrid_trigger_spacings", regrid_trigger_spacings);
  positive("regrid_half_width_sigmas", regrid_half_width_sigmas);
  if (!(mode_valley_fraction >= 0.0 && mode_valley_fraction < 1.0))
    errors.push_back("mode_valley_fraction: must lie in [0, 1)");
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) errors.push_back("nbar: must be >= 0");
  if (!(kappa_i >= 1.0)) errors.push_back("kappa_i: must be >= 1");
  if (!(kappa > 1.0)) errors.push_back("kappa: must be > 1");
  if (max_steps < 1) errors.push_back("max_steps: must be >= 1");
  if (n_points < Posterior::kMinPoints) errors.push_back("n_points: must be >= 64");
  if (target_precision && !(*target_precision > 0.0))
    errors.push_back("target_precision: must be positive");
  if (max_total_time && !(*max_total_time > 0.0))
    errors.push_back("max_total_time: must be positive");
  if (delta_omega0 > 0.0 && omega0 > 0.0 && !(delta_omega0 < omega0))
    errors.push_back("delta_omega0: must be smaller than omega0");
  return errors;
}

std::int64_t nint(double a) { return static_cast<std::int64_t>(std::llround(a)); }

double lambda_tilde_cpmg(double lambda, double nbar) {
  if (!(lambda > 0.0)) throw DomainError("lambda_tilde_cpmg: lambda must be positive");
  return lambda * std::sqrt(2.0 * nbar + 1.0) / std::numbers::pi;
}

double lambda_tilde_step(const PulseSequence<double>& seq, double lambda, double nbar,
                         double omega_est, double tau) {
  if (!(tau > 0.0)) throw DomainError("lambda_tilde_step: tau must be positive");
  const PulseSequence<double> unit(tau, {seq.pulse_fractions().begin(), seq.pulse_fractions().end()});
  const auto a1 = alpha_single_unit(unit, Coupling<double>(lambda), omega_est);
  return std::sqrt(2.0 * nbar + 1.0) * std::abs(a1) / tau;
}

double stage1_information_gain(double kappa_i) {
  return 4.0 * std::numbers::pi * kGrmsUnitWindow / (kappa_i * kappa_i);
}

StepPlan stage1_plan(double omega_est, double delta_omega_est, const AdaptiveConfig& cfg) {
  require_estimate(omega_est, delta_omega_est);
  StepPlan plan{};
  plan.stage = Stage::StageI;
  plan.n_units = checked_count(omega_est / (cfg.kappa_i * delta_omega_est) - 1.0, "unit count");
  plan.tau = kTwoPi / omega_est * (1.0 + 1.0 / static_cast<double>(plan.n_units));
  plan.lambda_tilde_k = lambda_tilde_step(PulseSequence<double>::cpmg(plan.tau), cfg.lambda,
                                          cfg.nbar, omega_est, plan.tau);
  if (!(plan.lambda_tilde_k > 0.0)) throw NumericalFailure("stage (i): zero effective coupling");
  const double eta = stage1_information_gain(cfg.kappa_i);
  const double ratio = cfg.c_i * delta_omega_est / (plan.lambda_tilde_k * eta);
  plan.repetitions = checked_count(ratio * ratio, "repetition count");
  return plan;
}

StepPlan stage2_plan(double omega_est, double delta_omega_est, const AdaptiveConfig& cfg) {
  require_estimate(omega_est, delta_omega_est);
  StepPlan plan{};
  plan.stage = Stage::StageII;
  plan.lambda_tilde_k = lambda_tilde_cpmg(cfg.lambda, cfg.nbar);
  plan.n_units = checked_count(
      omega_est / (cfg.kappa * std::sqrt(kTwoPi * plan.lambda_tilde_k * delta_omega_est)) - 1.0,
      "unit count");
  plan.tau = kTwoPi / omega_est * (1.0 + 1.0 / static_cast<double>(plan.n_units));
  const double k2 = cfg.kappa * cfg.kappa;
  plan.repetitions = checked_count(cfg.c * cfg.c * k2 * k2 / 4.0, "repetition count");
  return plan;
}

bool stage_transition(double delta_omega_k, double lambda_tilde_k) {
  return delta_omega_k < lambda_tilde_k;
}

Eigen::ArrayXd likelihood_plus(const Eigen::ArrayXd& nodes, const StepPlan& plan, double lambda,
                               double nbar) {
  const double scale = -2.0 * (2.0 * nbar + 1.0);
  return nodes.unaryExpr([&](double w) {
    return 0.5 * (1.0 + std::exp(scale * displacement_sq_cpmg(plan.n_units, lambda, w, plan.tau)));
  });
}

Trajectory run_adaptive(const AdaptiveConfig& cfg, Rng& rng) {
  if (const auto errors = cfg.validate(); !errors.empty())
    throw DomainError("run_adaptive: invalid config: " + errors.front());

  const double root_thermal = std::sqrt(2.0 * cfg.nbar + 1.0);
  const double thermal_scale = -2.0 * root_thermal * root_thermal;
  const auto n_points = static_cast<Eigen::Index>(cfg.n_points);

  Trajectory traj;
  Posterior post = gaussian_prior(cfg.omega0, cfg.delta_omega0, cfg.span_sigmas, n_points);
  double omega_est = cfg.omega0;
  double delta_est = cfg.delta_omega0;

  Stage stage = Stage::StageI;
  if (stage_transition(delta_est, stage1_plan(omega_est, delta_est, cfg).lambda_tilde_k))
    stage = Stage::StageII;

  double elapsed = 0.0;
  for (std::int64_t k = 1; k <= cfg.max_steps; ++k) {
    StepPlan plan;
    try {
      plan = stage == Stage::StageI ? stage1_plan(omega_est, delta_est, cfg)
                                    : stage2_plan(omega_est, delta_est, cfg);
    } catch (const std::exception& e) {
      traj.abort_reason = std::string("step ") + std::to_string(k) + ": " + e.what();
      break;
    }

    const Eigen::ArrayXd p_plus = likelihood_plus(post.nodes(), plan, cfg.lambda, cfg.nbar);
    const double alpha_sq_true =
        displacement_sq_cpmg(plan.n_units, cfg.lambda, cfg.omega_true, plan.tau);
    const double p_true = 0.5 * (1.0 + std::exp(thermal_scale * alpha_sq_true));
    const OutcomeCounts counts = sample_outcomes(p_true, plan.repetitions, rng);

    double omega_k;
    double delta_k;
    try {
      post = bayes_update(post, p_plus, counts.n_plus, counts.n_minus);
      omega_k = mle(post).omega;
      delta_k = mode_uncertainty(post, omega_k, cfg.mode_valley_fraction).value;
      if (delta_k < cfg.regrid_trigger_spacings * post.spacing()) {
        post = regrid(post, omega_k, cfg.regrid_half_width_sigmas * delta_k, n_points);
        omega_k = mle(post).omega;
        delta_k = mode_uncertainty(post, omega_k, cfg.mode_valley_fraction).value;
      }
      if (!std::isfinite(omega_k) || !(omega_k > 0.0) || !(delta_k > 0.0))
        throw NumericalFailure("non-finite estimate");
    } catch (const std::exception& e) {
      traj.abort_reason = std::string("step ") + std::to_string(k) + ": " + e.what();
      break;
    }

    const double step_time =
        static_cast<double>(plan.repetitions) * static_cast<double>(plan.n_units) * plan.tau;
    elapsed += step_time;
    (plan.stage == Stage::StageI ? traj.stage1_time : traj.stage2_time) += step_time;

    StepRecord rec{};
    rec.step_index = k;
    rec.plan = plan;
    rec.n_plus = counts.n_plus;
    rec.n_minus = counts.n_minus;
    rec.omega_k = omega_k;
    rec.delta_omega_k = delta_k;
    rec.zeta_k = zeta(plan.n_units, cfg.omega_true, plan.tau);
    rec.scaled_alpha_k = root_thermal * std::sqrt(alpha_sq_true);
    rec.cumulative_time = elapsed;
    rec.gain_G_k = plan.stage == Stage::StageI
                       ? stage1_information_gain(cfg.kappa_i) * plan.lambda_tilde_k / delta_est
                       : 2.0 / (cfg.kappa * cfg.kappa);
    traj.records.push_back(rec);

    omega_est = omega_k;
    delta_est = delta_k;
    if (stage == Stage::StageI && stage_transition(delta_k, plan.lambda_tilde_k))
      stage = Stage::StageII;

    if (cfg.target_precision && delta_k <= *cfg.target_precision) break;
    if (cfg.max_total_time && elapsed >= *cfg.max_total_time) break;
  }

  traj.final_estimate = {omega_est, delta_est};
  traj.final_posterior = std::move(post);
  return traj;
}

}  // namespace qsense
