#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ews/attack.hpp"
#include "ews/estimator.hpp"
#include "ews/monitor.hpp"
#include "ews/plant.hpp"

namespace ews {

struct SimRecord {
  Step k = 0;
  Vector x;
  Vector y;
  Vector ybar;
  Vector u;
  double z = 0.0;
  bool alarm = false;
  bool relaxed = false;  // attacker spent alarm budget on this step
  Vector x_hat;
  Vector integrator;  // controller state entering the step
  std::optional<int> l_hat;
  double feas = 0.0;
  double prox = 0.0;
  double susp = 0.0;
  WarningLevel warning = WarningLevel::None;
};

struct SimTrace {
  std::uint64_t seed = 0;
  std::string rng_algorithm;
  double dt = 1.0;
  std::vector<SimRecord> records;
};

struct SimInit {
  Vector x;
  Vector x_hat;
  ControllerState ctrl_state;
};

struct SimOptions {
  std::optional<SimInit> init;  // defaults to the set-point equilibrium
  std::function<void(const SimRecord&)> on_record;
  bool keep_records = true;
};

// Seed of the attacker's private stream, derived from the run seed.
std::uint64_t attack_seed(std::uint64_t seed);

SimTrace simulate_closed_loop(const LtiModel& model, const Controller& ctrl,
                              const KalmanDesign& design, const DetectorConfig& detector,
                              AttackRuntime* attack, const EwsConfig* ews, Step steps,
                              std::uint64_t seed, const SimOptions& opts = {});

}  // namespace ews
