#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsense/information.hpp"
#include "qsense/protocol.hpp"
#include "qsense/simkit.hpp"

using namespace qsense;

namespace {

constexpr double kPi = std::numbers::pi;

AdaptiveConfig short_config(std::int64_t steps, double nbar = 10.0) {
  AdaptiveConfig cfg;
  cfg.nbar = nbar;
  cfg.max_steps = steps;
  return cfg;
}

}  // namespace

TEST_CASE("nearest integer") {
  CHECK(nint(49.5) == 50);
  CHECK(nint(2.4) == 2);
  CHECK(nint(-2.5) == -3);
  CHECK(nint(-2.4) == -2);
  CHECK(nint(0.5) == 1);
}

TEST_CASE("effective coupling") {
  CHECK(lambda_tilde_cpmg(0.1, 10.0) == doctest::Approx(0.1 * std::sqrt(21.0) / kPi));
  CHECK(lambda_tilde_cpmg(0.1, 10.0) == doctest::Approx(0.14589).epsilon(1e-4));
  CHECK(lambda_tilde_cpmg(0.1, 0.0) == doctest::Approx(0.03183).epsilon(1e-4));
  CHECK(lambda_tilde_cpmg(0.1, 1000.0) == doctest::Approx(1.4238).epsilon(1e-4));

  const double tau = 2.0 * kPi / 50.0;
  const auto seq = PulseSequence<double>::cpmg(tau);
  CHECK(lambda_tilde_step(seq, 0.1, 10.0, 50.0, tau) ==
        doctest::Approx(lambda_tilde_cpmg(0.1, 10.0)).epsilon(1e-14));
  const double tau1 = tau * (1.0 + 1.0 / 50.0);
  CHECK(lambda_tilde_step(seq, 0.1, 10.0, 50.0, tau1) ==
        doctest::Approx(lambda_tilde_cpmg(0.1, 10.0)).epsilon(0.01));
  CHECK(lambda_tilde_step(seq, 0.2, 10.0, 50.0, tau1) ==
        doctest::Approx(2.0 * lambda_tilde_step(seq, 0.1, 10.0, 50.0, tau1)));
}

TEST_CASE("stage (i) plan") {
  const AdaptiveConfig cfg;
  const StepPlan p = stage1_plan(50.5, 0.5, cfg);
  CHECK(p.stage == Stage::StageI);
  CHECK(p.n_units == 50);
  CHECK(p.tau == doctest::Approx(0.126906).epsilon(1e-5));
  CHECK(p.tau == doctest::Approx(2.0 * kPi / 50.5 * 1.02).epsilon(1e-14));
  CHECK(p.lambda_tilde_k == doctest::Approx(0.1459).epsilon(0.015));
  CHECK(p.repetitions == 1);
  CHECK(stage1_information_gain(2.0) == doctest::Approx(kPi * 0.83544).epsilon(1e-12));

  // Larger c_i lifts the repetition count above the clamp.
  AdaptiveConfig big = cfg;
  big.c_i = 50.0;
  const StepPlan q = stage1_plan(50.5, 0.5, big);
  const double ratio = 50.0 * 0.5 / (q.lambda_tilde_k * stage1_information_gain(2.0));
  CHECK(q.repetitions == nint(ratio * ratio));
  CHECK(q.repetitions > 1);

  const StepPlan half = stage1_plan(50.5, 0.25, cfg);
  CHECK(std::abs(half.n_units - 2 * p.n_units) <= 2);

  // A single unit puts omega tau at 4 pi, a null of the CPMG filter.
  CHECK_THROWS_AS(stage1_plan(50.0, 1e3, cfg), NumericalFailure);
  CHECK_THROWS_AS(stage1_plan(50.0, 0.0, cfg), DomainError);
}

TEST_CASE("stage (ii) plan") {
  const AdaptiveConfig cfg;
  const StepPlan p = stage2_plan(50.0, 0.14589, cfg);
  CHECK(p.stage == Stage::StageII);
  CHECK(p.n_units == 67);
  CHECK(p.repetitions == 1);
  CHECK(p.lambda_tilde_k == doctest::Approx(lambda_tilde_cpmg(0.1, 10.0)));
  CHECK(p.tau == doctest::Approx(2.0 * kPi / 50.0 * (1.0 + 1.0 / 67.0)));

  AdaptiveConfig many = cfg;
  many.c = 1.0;
  many.kappa = 4.0;
  CHECK(stage2_plan(50.0, 0.1, many).repetitions == 64);

  const double t1 = p.n_units * p.tau;
  const StepPlan q = stage2_plan(50.0, 0.14589 / 4.0, cfg);
  CHECK(q.n_units * q.tau == doctest::Approx(2.0 * t1).epsilon(0.02));
  CHECK(stage2_plan(50.0, 1e6, cfg).n_units == 1);
}

TEST_CASE("stage transition") {
  CHECK_FALSE(stage_transition(0.5, 0.1459));
  CHECK(stage_transition(0.5, 1.4238));
  CHECK_FALSE(stage_transition(0.3, 0.3));
  CHECK(stage_transition(0.29, 0.3));
}

TEST_CASE("config validation") {
  AdaptiveConfig cfg;
  CHECK(cfg.validate().empty());
  cfg.delta_omega0 = 60.0;
  cfg.kappa = 1.0;
  cfg.n_points = 10;
  CHECK(cfg.validate().size() == 3);
  Rng rng(1);
  CHECK_THROWS_AS(run_adaptive(cfg, rng), DomainError);
}

TEST_CASE("adaptive run invariants") {
  const AdaptiveConfig cfg = short_config(80);
  int reached_stage2 = 0;
  for (std::int64_t rep = 0; rep < 6; ++rep) {
    const Trajectory t = run_single(cfg, 99, rep);
    REQUIRE_FALSE(t.abort_reason.has_value());
    REQUIRE(t.records.size() == 80);
    bool seen_stage2 = false;
    double accounted = 0.0;
    double prev_time = 0.0;
    double stage1 = 0.0;
    for (const auto& r : t.records) {
      if (r.plan.stage == Stage::StageII) seen_stage2 = true;
      if (seen_stage2) CHECK(r.plan.stage == Stage::StageII);
      CHECK(r.n_plus + r.n_minus == r.plan.repetitions);
      CHECK(r.plan.n_units >= 1);
      CHECK(r.plan.repetitions >= 1);
      const double step = r.plan.repetitions * r.plan.n_units * r.plan.tau;
      accounted += step;
      if (r.plan.stage == Stage::StageI) stage1 += step;
      CHECK(r.cumulative_time == accounted);
      CHECK(r.cumulative_time > prev_time);
      prev_time = r.cumulative_time;
      CHECK(r.delta_omega_k > 0.0);
      CHECK(r.scaled_alpha_k >= 0.0);
      CHECK(r.zeta_k == zeta(r.plan.n_units, cfg.omega_true, r.plan.tau));
    }
    CHECK(t.stage1_time == stage1);
    CHECK(t.total_time() == doctest::Approx(t.records.back().cumulative_time).epsilon(1e-14));
    CHECK(t.final_estimate.omega_hat == t.records.back().omega_k);
    if (seen_stage2) ++reached_stage2;
  }
  CHECK(reached_stage2 > 0);
}

TEST_CASE("first step follows the stage (i) recipe") {
  const AdaptiveConfig cfg = short_config(1);
  const Trajectory t = run_single(cfg, 5, 0);
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].plan.n_units == 50);
  CHECK(t.records[0].plan.stage == Stage::StageI);
}

TEST_CASE("hot oscillator starts in stage (ii)") {
  const Trajectory t = run_single(short_config(5, 1000.0), 5, 0);
  for (const auto& r : t.records) CHECK(r.plan.stage == Stage::StageII);
  CHECK(t.stage1_time == 0.0);
}

TEST_CASE("runs are deterministic") {
  const AdaptiveConfig cfg = short_config(60);
  Rng a(123);
  Rng b(123);
  const Trajectory x = run_adaptive(cfg, a);
  const Trajectory y = run_adaptive(cfg, b);
  REQUIRE(x.records.size() == y.records.size());
  for (std::size_t i = 0; i < x.records.size(); ++i) {
    CHECK(x.records[i].n_plus == y.records[i].n_plus);
    CHECK(x.records[i].omega_k == y.records[i].omega_k);
    CHECK(x.records[i].delta_omega_k == y.records[i].delta_omega_k);
    CHECK(x.records[i].cumulative_time == y.records[i].cumulative_time);
  }
}

TEST_CASE("stopping rules") {
  AdaptiveConfig cfg = short_config(500);
  cfg.target_precision = 1e-3;
  const Trajectory t = run_single(cfg, 1, 0);
  CHECK(t.records.back().delta_omega_k <= 1e-3);
  CHECK(t.records.size() < 500);
  for (std::size_t i = 0; i + 1 < t.records.size(); ++i)
    CHECK(t.records[i].delta_omega_k > 1e-3);

  AdaptiveConfig timed = short_config(500);
  timed.max_total_time = 200.0;
  const Trajectory u = run_single(timed, 1, 0);
  CHECK(u.records.back().cumulative_time >= 200.0);
  CHECK(u.records[u.records.size() - 2].cumulative_time < 200.0);
}

TEST_CASE("likelihood on the grid") {
  StepPlan plan{};
  plan.n_units = 50;
  plan.tau = 2.0 * kPi / 50.0 * 1.02;
  const Eigen::ArrayXd nodes = Eigen::ArrayXd::LinSpaced(101, 49.0, 51.0);
  const Eigen::ArrayXd p = likelihood_plus(nodes, plan, 0.1, 10.0);
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const ControlSchedule<double> s(PulseSequence<double>::cpmg(plan.tau), plan.n_units);
    const auto a = total_displacement(s, Coupling<double>(0.1), nodes[i]);
    const double l = coherence_thermal(a, ThermalState<double>(10.0));
    CHECK(p[i] == doctest::Approx(outcome_probability(l).plus).epsilon(1e-12));
    CHECK(p[i] >= 0.5);
    CHECK(p[i] <= 1.0);
  }
  CHECK(p[50] == doctest::Approx(1.0).epsilon(1e-12));  // node of K at omega = 50
}
