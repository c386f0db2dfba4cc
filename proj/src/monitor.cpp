#include "ews/monitor.hpp"

#include <cmath>

namespace ews {

const char* to_string(WarningLevel level) {
  switch (level) {
    case WarningLevel::Low:
      return "low";
    case WarningLevel::High:
      return "high";
    default:
      return "none";
  }
}

WarningLevel warning_from_string(const std::string& s) {
  if (s == "none") return WarningLevel::None;
  if (s == "low") return WarningLevel::Low;
  if (s == "high") return WarningLevel::High;
  throw InvariantError("unknown warning level '" + s + "'");
}

void EwsConfig::validate(int n) const {
  if (K < 0) throw InvariantError("ews.K must be non-negative");
  if (!(l2 >= 0 && l2 < l1 && l1 <= K)) throw InvariantError("ews thresholds need 0 <= l2 < l1 <= K");
  if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0)) {
    throw InvariantError("ews.ratio_threshold must lie in (0, 1]");
  }
  require_shape(reach.Pi, n, n, "Pi");
  if (!is_positive_definite(reach.Pi)) throw InvariantError("Pi must be positive definite");
  validate_unsafe_set(su, n);
}

EwsCache compute_cache(const ReachEllipsoid& reach, const UnsafeSet& su) {
  EwsCache cache;
  const Ellipsoid<double> outer(Vector::Zero(reach.Pi.rows()), reach.Pi);
  cache.log_det_pi = log_det_pd(reach.Pi);
  cache.volume = volume(outer);
  cache.c_norms.reserve(su.size());
  cache.c_widths.reserve(su.size());
  for (const auto& h : su) {
    cache.c_norms.push_back(h.normal.norm());
    cache.c_widths.push_back(std::sqrt(h.normal.dot(reach.Pi * h.normal)));
  }
  return cache;
}

EwsConfig precompute(EwsConfig cfg) {
  cfg.cache = compute_cache(cfg.reach, cfg.su);
  return cfg;
}

PredictStep predict_control_flow(const LtiModel& model, const Controller& ctrl,
                                 const Vector& x_pred, const ControllerState& ctrl_state, Step k) {
  require_size(x_pred, model.n(), "predicted state");
  const Vector y_pred = model.C() * x_pred;
  ControlStep cs = control_output(ctrl, ctrl_state, y_pred, k);
  return {model.A() * x_pred + model.B() * cs.u, std::move(cs.next)};
}

WarningLevel classify_warning(const EwsConfig& cfg, std::optional<int> l_hat, double low_ratio,
                              double high_ratio) {
  if (!l_hat) return WarningLevel::None;
  if (*l_hat <= cfg.l2 && high_ratio >= cfg.ratio_threshold) return WarningLevel::High;
  if (*l_hat <= cfg.l1 && low_ratio >= cfg.ratio_threshold) return WarningLevel::Low;
  return WarningLevel::None;
}

SuspicionReport suspicion_step(const EwsConfig& cfg, const LtiModel& model, const Controller& ctrl,
                               const Vector& x_hat, const ControllerState& ctrl_state, Step k,
                               const SuspicionOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  require_size(x_hat, model.n(), "x_hat");
  const EwsCache cache = cfg.cache ? EwsCache{} : compute_cache(cfg.reach, cfg.su);
  const EwsCache& c = cfg.cache ? *cfg.cache : cache;
  const int n = model.n();
  const size_t nc = cfg.su.size();

  SuspicionReport rep;
  rep.intersect_volumes.assign(nc, 0.0);
  Vector x = x_hat;
  ControllerState st = ctrl_state;

  for (int l = 0; l <= cfg.K; ++l) {
    double best = 0.0;
    int best_i = -1;
    double best_alpha = 0.0;
    for (size_t i = 0; i < nc; ++i) {
      const auto& h = cfg.su[i];
      const double cx = h.normal.dot(x);
      const double dist = (h.bound - (cx + c.c_widths[i])) / c.c_norms[i];
      if (dist > 0.0) continue;
      const double alpha = (h.bound - cx) / c.c_widths[i];
      const double ratio = cut_volume_ratio(alpha, n);
      if (best_i < 0 || ratio > best) {
        best = ratio;
        best_i = static_cast<int>(i);
        best_alpha = alpha;
      }
      if (!rep.l_hat) rep.intersect_volumes[i] = ratio * c.volume;
    }

    if (best_i >= 0 && !rep.l_hat) {
      rep.l_hat = l;
      rep.feas = best;
      rep.stop_constraint = best_i;
      rep.stop_alpha = best_alpha;
      rep.prox = 1.0 / (1.0 + l);
      rep.susp = rep.feas * rep.prox;
    }
    if (rep.l_hat) {
      if (l <= cfg.l1) rep.low_ratio = std::max(rep.low_ratio, best);
      if (l <= cfg.l2) rep.high_ratio = std::max(rep.high_ratio, best);
      if (!opts.full_horizon && (l >= cfg.l1 || *rep.l_hat > cfg.l1)) break;
    }
    if (l == cfg.K) break;
    try {
      PredictStep next = predict_control_flow(model, ctrl, x, st, k + l);
      x = std::move(next.x_next);
      st = std::move(next.ctrl_state);
    } catch (const Error& e) {
      throw NumericError("prediction step " + std::to_string(l) + ": " + e.what());
    }
  }
  rep.warning = classify_warning(cfg, rep.l_hat, rep.low_ratio, rep.high_ratio);
  rep.wall_time = std::chrono::steady_clock::now() - start;
  return rep;
}

}  // namespace ews
