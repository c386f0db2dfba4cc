#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ews/ellipsoid.hpp"
#include "ews/types.hpp"

namespace ews {

class LtiModel {
 public:
  // Checks shapes, covariance definiteness and the rank conditions.
  static LtiModel create(Matrix a, Matrix b, Matrix c, Matrix sigma_w, Matrix sigma_v,
                         double dt);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Matrix& sigma_w() const { return sigma_w_; }
  const Matrix& sigma_v() const { return sigma_v_; }
  double dt() const { return dt_; }

  int n() const { return static_cast<int>(a_.rows()); }
  int m() const { return static_cast<int>(c_.rows()); }
  int p() const { return static_cast<int>(b_.cols()); }

  // Noise square-root factors, cached at construction.
  const Matrix& w_factor() const { return w_factor_; }
  const Matrix& v_factor() const { return v_factor_; }

 private:
  Matrix a_, b_, c_, sigma_w_, sigma_v_;
  Matrix w_factor_, v_factor_;
  double dt_ = 1.0;
};

struct StaticGain {
  Matrix kg;  // p x m
};

struct ProportionalIntegral {
  Matrix kp;  // p x m
  Matrix ki;  // p x m
};

using ControlLaw = std::variant<StaticGain, ProportionalIntegral>;

// Piecewise-constant set-point: each entry holds from its start step until the
// next entry begins. The first entry must start at step 0.
class SetpointSchedule {
 public:
  SetpointSchedule() = default;
  explicit SetpointSchedule(Vector constant) { segments_.push_back({0, std::move(constant)}); }
  explicit SetpointSchedule(std::vector<std::pair<Step, Vector>> segments);

  const Vector& at(Step k) const;
  const std::vector<std::pair<Step, Vector>>& segments() const { return segments_; }

 private:
  std::vector<std::pair<Step, Vector>> segments_;
};

struct ControllerState {
  Vector integrator;  // p
  Vector last_u;      // p
};

class Controller {
 public:
  // Rejects laws whose closed loop with `model` has spectral radius >= 1.
  static Controller create(const LtiModel& model, ControlLaw law, SetpointSchedule y_ref);

  const ControlLaw& law() const { return law_; }
  const SetpointSchedule& y_ref() const { return y_ref_; }
  double dt() const { return dt_; }
  bool is_static() const { return std::holds_alternative<StaticGain>(law_); }

  // Gain from the received output error to the input in a single step.
  Matrix one_step_gain() const;
  ControllerState initial_state() const;

 private:
  ControlLaw law_;
  SetpointSchedule y_ref_;
  double dt_ = 1.0;
  int p_ = 0;
};

// State matrix of the plant/controller interconnection (n, or n + p for PI).
Matrix closed_loop_matrix(const LtiModel& model, const ControlLaw& law, double dt);

using UnsafeSet = std::vector<HalfSpace<double>>;

void validate_unsafe_set(const UnsafeSet& su, int n);

class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}

  // factor * N(0, I); zero-size factors consume nothing.
  Vector draw(const Matrix& factor);
  double standard_normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

  static constexpr const char* algorithm() { return "mt19937_64+normal_distribution"; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

struct PlantStep {
  Vector x_next;
  Vector y;
};

// y = C x + v from the current state, then x_next = A x + B u + w.
Vector measure(const LtiModel& model, const Vector& x, NoiseSource& noise);
Vector advance(const LtiModel& model, const Vector& x, const Vector& u, NoiseSource& noise);
PlantStep step_plant(const LtiModel& model, const Vector& x, const Vector& u, NoiseSource& noise);

struct ControlStep {
  Vector u;
  ControllerState next;
};

ControlStep control_output(const Controller& ctrl, const ControllerState& st,
                           const Vector& y_received, Step k);

struct UnsafeCheck {
  bool unsafe = false;
  std::vector<std::string> violated;
};

UnsafeCheck check_unsafe(const Vector& x, const UnsafeSet& su);

// Steady operating point for the set-point in force at step k.
std::pair<Vector, ControllerState> equilibrium(const LtiModel& model, const Controller& ctrl,
                                               Step k = 0);

LtiModel random_stable_system(int n, int m, int p, std::uint64_t seed);

}  // namespace ews
