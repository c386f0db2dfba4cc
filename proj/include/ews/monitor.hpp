#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "ews/ellipsoid.hpp"
#include "ews/plant.hpp"
#include "ews/reach.hpp"

namespace ews {

enum class WarningLevel { None = 0, Low = 1, High = 2 };

const char* to_string(WarningLevel level);
WarningLevel warning_from_string(const std::string& s);

struct EwsCache {
  double log_det_pi = 0.0;
  double volume = 0.0;            // V_E
  std::vector<double> c_norms;    // |c_i|
  std::vector<double> c_widths;   // sqrt(c_i' Pi c_i)
};

struct EwsConfig {
  int K = 500;
  int l1 = 250;
  int l2 = 30;
  double ratio_threshold = 0.5;
  ReachEllipsoid reach;
  UnsafeSet su;
  std::optional<EwsCache> cache;

  void validate(int n) const;
};

EwsCache compute_cache(const ReachEllipsoid& reach, const UnsafeSet& su);
EwsConfig precompute(EwsConfig cfg);

struct SuspicionReport {
  double susp = 0.0;
  double feas = 0.0;
  double prox = 0.0;
  std::optional<int> l_hat;
  std::vector<double> intersect_volumes;  // V_{E,i} at l_hat, 0 where disjoint
  int stop_constraint = -1;               // index attaining FEAS
  double stop_alpha = 0.0;
  double low_ratio = 0.0;   // max volume ratio over [l_hat, l1]
  double high_ratio = 0.0;  // max volume ratio over [l_hat, l2]
  WarningLevel warning = WarningLevel::None;
  std::chrono::nanoseconds wall_time{0};
};

struct SuspicionOptions {
  // Evaluate every predicted step and constraint without early exit.
  bool full_horizon = false;
};

struct PredictStep {
  Vector x_next;
  ControllerState ctrl_state;
};

PredictStep predict_control_flow(const LtiModel& model, const Controller& ctrl,
                                 const Vector& x_pred, const ControllerState& ctrl_state, Step k);

SuspicionReport suspicion_step(const EwsConfig& cfg, const LtiModel& model, const Controller& ctrl,
                               const Vector& x_hat, const ControllerState& ctrl_state, Step k = 0,
                               const SuspicionOptions& opts = {});

WarningLevel classify_warning(const EwsConfig& cfg, std::optional<int> l_hat, double low_ratio,
                              double high_ratio);

inline WarningLevel classify_warning(const EwsConfig& cfg, std::optional<int> l_hat, double ratio) {
  return classify_warning(cfg, l_hat, ratio, ratio);
}

}  // namespace ews
