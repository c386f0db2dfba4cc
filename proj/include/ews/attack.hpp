#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>

#include "ews/plant.hpp"

namespace ews {

struct RampAttack {
  Vector g;  // m
  double slope = 0.0;
  double delta_max = std::numeric_limits<double>::infinity();
};

struct GreedyUnsafeAttack {
  HalfSpace<double> target;
  double eta = 1.0;
};

struct AttackSpec {
  std::variant<RampAttack, GreedyUnsafeAttack> variant;
  Step k_start = 0;
  Step k_end = std::numeric_limits<Step>::max();
  std::optional<double> alarm_budget_rate;  // falls back to the detector beta
  double margin = 0.95;

  void validate(int m, int n) const;
};

// One-step steering direction for a sensor bias: unit d with c'G d > 0 where
// G = B * (one-step controller gain).
Vector steer_direction(const HalfSpace<double>& target, const LtiModel& model,
                       const Controller& ctrl, const Matrix& sigma_r);

// Largest s in [0,1] with (r0 + s d)' sigma_r^{-1} (r0 + s d) <= margin * tau.
Vector stealth_project(const Vector& delta_desired, const Vector& r_nominal, const Matrix& sigma_r,
                       double tau, double margin);

class AttackRuntime {
 public:
  AttackRuntime(AttackSpec spec, const LtiModel& model, const Controller& ctrl,
                const Matrix& sigma_r, double beta, std::uint64_t seed);

  const AttackSpec& spec() const { return spec_; }
  double budget_rate() const { return budget_rate_; }
  long relaxed_steps() const { return relaxed_; }
  long window_steps() const { return elapsed_; }
  bool relaxed_last() const { return relaxed_last_; }

  // Bias to add to the true output at step k.
  Vector bias(Step k, const Vector& y_true, const Vector& y_hat, double tau);

 private:
  AttackSpec spec_;
  Matrix sigma_r_;
  Vector steer_;
  double budget_rate_ = 0.0;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  long relaxed_ = 0;
  long elapsed_ = 0;
  bool relaxed_last_ = false;
};

inline Vector attack_bias(AttackRuntime& rt, Step k, const Vector& y_true, const Vector& y_hat,
                          double tau) {
  return rt.bias(k, y_true, y_hat, tau);
}

}  // namespace ews
