#include <doctest.h>

#include "ews/attack.hpp"
#include "ews/estimator.hpp"
#include "../support.hpp"

using namespace ews;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

AttackSpec ramp_spec(double slope, std::optional<double> budget) {
  AttackSpec spec;
  spec.variant = RampAttack{Vector::Constant(1, -1.0), slope, 7.0};
  spec.k_start = 10;
  spec.alarm_budget_rate = budget;
  return spec;
}

}  // namespace

TEST_CASE("stealth projection examples") {
  const Matrix eye = Matrix::Identity(2, 2);
  const Vector out = stealth_project(v2(10, 0), v2(0, 0), eye, 4.0, 1.0);
  CHECK(out(0) == doctest::Approx(2.0));
  CHECK(out(1) == doctest::Approx(0.0));
  // Already compliant requests pass through unchanged.
  CHECK(stealth_project(v2(1, 1), v2(0, 0), eye, 4.0, 1.0) == v2(1, 1));
  CHECK(stealth_project(v2(0, 0), v2(5, 5), eye, 4.0, 1.0) == v2(0, 0));
  // Nominal residual pointing the other way leaves more room.
  const Vector offset = stealth_project(v2(10, 0), v2(-1, 0), eye, 4.0, 1.0);
  CHECK(offset(0) == doctest::Approx(3.0));
  // No part of the segment is admissible.
  CHECK(stealth_project(v2(0, 1), v2(5, 0), eye, 4.0, 1.0).isZero(0));
}

TEST_CASE("stealth projection properties") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const Matrix s = ews::testing::random_spd(3, rng);
    const Vector d = ews::testing::random_vector(3, rng, 5.0);
    const Vector r0 = ews::testing::random_vector(3, rng, 0.3);
    const double tau = 3.0;
    const Vector once = stealth_project(d, r0, s, tau, 0.95);
    if (chi2_metric(r0, s) <= 0.95 * tau) {
      CHECK(chi2_metric(Vector(r0 + once), s) <= 0.95 * tau);
    }
    const Vector twice = stealth_project(once, r0, s, tau, 0.95);
    CHECK((twice - once).norm() <= 1e-12 * std::max(1.0, once.norm()));
    double prev = 0.0;
    for (double margin : {0.2, 0.5, 0.8, 0.95, 1.0}) {
      const double norm = stealth_project(d, r0, s, tau, margin).norm();
      CHECK(norm >= prev);
      prev = norm;
    }
  }
}

TEST_CASE("steering direction") {
  const auto scalar = LtiModel::create(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1),
                                       Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), 1.0);
  const auto neg = Controller::create(scalar, StaticGain{Matrix::Constant(1, 1, -1.0)},
                                      SetpointSchedule(Vector::Zero(1)));
  const HalfSpace<double> up{Vector::Ones(1), 3.0, "up"};
  // B Kg = -1: a negative sensor bias raises the state.
  CHECK(steer_direction(up, scalar, neg, Matrix::Ones(1, 1))(0) == doctest::Approx(-1.0));

  const auto& d = ews::testing::reactor_design();
  const HalfSpace<double> rate{v2(0, 1), 0.5, "rate"};
  const Vector dir = steer_direction(rate, d.model, d.ctrl, d.kalman.sigma_r);
  CHECK(dir.norm() == doctest::Approx(1.0));
  const Matrix g = d.model.B() * d.ctrl.one_step_gain();
  CHECK(rate.normal.dot(g * dir) > 0.0);
  // B has no level component, so level targets have zero one-step influence.
  const auto cfg = ews::testing::reactor_config();
  for (const auto& h : cfg.unsafe) {
    CHECK_THROWS_AS(steer_direction(h, d.model, d.ctrl, d.kalman.sigma_r), InvariantError);
  }
}

TEST_CASE("attack specification validation") {
  const auto& d = ews::testing::reactor_design();
  auto spec = ramp_spec(0.01, std::nullopt);
  CHECK_NOTHROW(spec.validate(1, 2));
  spec.k_end = 5;
  CHECK_THROWS_AS(spec.validate(1, 2), InvariantError);
  spec = ramp_spec(0.01, 1.0);
  CHECK_THROWS_AS(spec.validate(1, 2), InvariantError);
  spec = ramp_spec(0.01, std::nullopt);
  spec.margin = 0.0;
  CHECK_THROWS_AS(spec.validate(1, 2), InvariantError);
  spec = ramp_spec(0.01, std::nullopt);
  std::get<RampAttack>(spec.variant).g = Vector::Zero(1);
  CHECK_THROWS_AS(AttackRuntime(spec, d.model, d.ctrl, d.kalman.sigma_r, 0.05, 1), InvariantError);
}

TEST_CASE("ramp bias is zero outside the window and respects the detector") {
  const auto& d = ews::testing::reactor_design();
  AttackRuntime rt(ramp_spec(0.01, 0.0), d.model, d.ctrl, d.kalman.sigma_r, 0.05, 1);
  const double tau = d.detector.tau;
  const Vector y = Vector::Constant(1, 16.0);
  const Vector y_hat = Vector::Constant(1, 16.05);
  CHECK(rt.bias(5, y, y_hat, tau).isZero(0));
  CHECK(rt.bias(10, y, y_hat, tau).isZero(0));
  CHECK(rt.bias(11, y, y_hat, tau)(0) == doctest::Approx(-0.01));
  for (Step k = 12; k < 400; ++k) {
    const Vector b = rt.bias(k, y, y_hat, tau);
    CHECK(b(0) <= 0.0);
    CHECK(chi2_metric(Vector(y + b - y_hat), d.kalman.sigma_r) <= 0.95 * tau * (1 + 1e-12));
  }
  CHECK(rt.relaxed_steps() == 0);
}

TEST_CASE("alarm budget is never overspent") {
  const auto& d = ews::testing::reactor_design();
  for (double rate : {0.01, 0.05, 0.2}) {
    AttackRuntime rt(ramp_spec(1.0, rate), d.model, d.ctrl, d.kalman.sigma_r, 0.05, 7);
    const Vector y = Vector::Constant(1, 16.0);
    for (Step k = 10; k < 20000; ++k) {
      rt.bias(k, y, y, d.detector.tau);
      CHECK(static_cast<double>(rt.relaxed_steps()) <= rate * rt.window_steps() + 1.0);
    }
    CHECK(rt.relaxed_steps() > 0);
  }
}

TEST_CASE("zero budget is deterministic and never relaxes") {
  const auto& d = ews::testing::reactor_design();
  AttackRuntime a(ramp_spec(0.01, 0.0), d.model, d.ctrl, d.kalman.sigma_r, 0.05, 1);
  AttackRuntime b(ramp_spec(0.01, 0.0), d.model, d.ctrl, d.kalman.sigma_r, 0.05, 999);
  std::mt19937_64 rng(4);
  for (Step k = 0; k < 3000; ++k) {
    const Vector y = ews::testing::random_vector(1, rng) + Vector::Constant(1, 16.55);
    const Vector yh = Vector::Constant(1, 16.55);
    CHECK(a.bias(k, y, yh, d.detector.tau) == b.bias(k, y, yh, d.detector.tau));
    CHECK_FALSE(a.relaxed_last());
  }
  CHECK(a.relaxed_steps() == 0);
}

TEST_CASE("greedy attack pushes toward its target within the detector bound") {
  const auto& d = ews::testing::reactor_design();
  AttackSpec spec;
  const HalfSpace<double> high{v2(0, 1), 0.5, "rate"};
  spec.variant = GreedyUnsafeAttack{high, 1.0};
  spec.alarm_budget_rate = 0.0;
  AttackRuntime rt(spec, d.model, d.ctrl, d.kalman.sigma_r, 0.05, 1);
  const Vector y = Vector::Constant(1, 16.55);
  const Vector b = rt.bias(0, y, y, d.detector.tau);
  const Vector u_shift = d.ctrl.one_step_gain() * b;
  CHECK(high.normal.dot(d.model.B() * u_shift) > 0.0);
  CHECK(chi2_metric(b, d.kalman.sigma_r) <= 0.95 * d.detector.tau * (1 + 1e-12));
}
