#include "ews/attack.hpp"

#include <cmath>

#include "ews/estimator.hpp"

namespace ews {

void AttackSpec::validate(int m, int n) const {
  if (k_start < 0 || k_start > k_end) throw InvariantError("attack needs 0 <= k_start <= k_end");
  if (!(margin > 0.0 && margin <= 1.0)) throw InvariantError("attack margin must lie in (0, 1]");
  if (alarm_budget_rate && !(*alarm_budget_rate >= 0.0 && *alarm_budget_rate < 1.0)) {
    throw InvariantError("alarm_budget_rate must lie in [0, 1)");
  }
  if (const auto* ramp = std::get_if<RampAttack>(&variant)) {
    require_size(ramp->g, m, "ramp direction g");
    if (!(ramp->g.norm() > 0.0)) throw InvariantError("ramp direction g must be non-zero");
    if (!std::isfinite(ramp->slope)) throw InvariantError("ramp slope must be finite");
    if (!(ramp->delta_max >= 0.0)) throw InvariantError("ramp delta_max must be non-negative");
  } else {
    const auto& greedy = std::get<GreedyUnsafeAttack>(variant);
    require_size(greedy.target.normal, n, "greedy target normal");
    if (!(greedy.eta > 0.0 && greedy.eta <= 1.0)) throw InvariantError("eta must lie in (0, 1]");
  }
}

Vector steer_direction(const HalfSpace<double>& target, const LtiModel& model,
                       const Controller& ctrl, const Matrix& sigma_r) {
  require_size(target.normal, model.n(), "target normal");
  const Matrix g = model.B() * ctrl.one_step_gain();  // n x m
  const Vector gc = g.transpose() * target.normal;
  Vector d = sigma_r * gc;
  const double norm = d.norm();
  if (!(norm > 0.0)) {
    throw InvariantError("target '" + target.label + "' is unreachable through the sensor channel");
  }
  d /= norm;
  const double push = target.normal.dot(g * d);
  if (push == 0.0) {
    throw InvariantError("target '" + target.label + "' is unreachable through the sensor channel");
  }
  return push > 0.0 ? d : Vector(-d);
}

Vector stealth_project(const Vector& delta_desired, const Vector& r_nominal, const Matrix& sigma_r,
                       double tau, double margin) {
  if (delta_desired.isZero(0)) return Vector::Zero(delta_desired.size());
  const auto llt = sigma_r.llt();
  const Vector sd = llt.solve(delta_desired);
  // q(s) = a s^2 + 2 b s + c <= 0
  const double a = delta_desired.dot(sd);
  const double b = r_nominal.dot(sd);
  const double c = r_nominal.dot(llt.solve(r_nominal)) - margin * tau;
  if (a + 2.0 * b + c <= 0.0 && c <= 0.0) return delta_desired;
  const double disc = b * b - a * c;
  if (disc < 0.0) return Vector::Zero(delta_desired.size());
  const double root = std::sqrt(disc);
  const double s_hi = (-b + root) / a;
  const double s_lo = (-b - root) / a;
  if (s_hi < 0.0 || s_lo > 1.0) return Vector::Zero(delta_desired.size());
  double s = std::min(s_hi, 1.0);
  Vector out = s * delta_desired;
  // Guard against round-off pushing the result just past the boundary.
  for (int i = 0; i < 4 && chi2_metric(Vector(r_nominal + out), sigma_r) > margin * tau; ++i) {
    s = std::nextafter(s, 0.0) * (1.0 - 1e-15);
    out = s * delta_desired;
  }
  if (chi2_metric(Vector(r_nominal + out), sigma_r) > margin * tau) {
    return Vector::Zero(delta_desired.size());
  }
  return out;
}

AttackRuntime::AttackRuntime(AttackSpec spec, const LtiModel& model, const Controller& ctrl,
                             const Matrix& sigma_r, double beta, std::uint64_t seed)
    : spec_(std::move(spec)), sigma_r_(sigma_r), engine_(seed) {
  spec_.validate(model.m(), model.n());
  budget_rate_ = spec_.alarm_budget_rate.value_or(beta);
  if (const auto* greedy = std::get_if<GreedyUnsafeAttack>(&spec_.variant)) {
    steer_ = steer_direction(greedy->target, model, ctrl, sigma_r_);
  }
}

Vector AttackRuntime::bias(Step k, const Vector& y_true, const Vector& y_hat, double tau) {
  relaxed_last_ = false;
  const Eigen::Index m = y_true.size();
  if (k < spec_.k_start || k > spec_.k_end) return Vector::Zero(m);

  Vector desired;
  if (const auto* ramp = std::get_if<RampAttack>(&spec_.variant)) {
    const double mag = std::min(ramp->slope * static_cast<double>(k - spec_.k_start), ramp->delta_max);
    desired = mag * ramp->g;
  } else {
    desired = std::get<GreedyUnsafeAttack>(spec_.variant).eta * std::sqrt(tau) * steer_;
  }

  ++elapsed_;
  if (budget_rate_ > 0.0) {
    const bool draw = uniform_(engine_) < budget_rate_;
    if (draw && static_cast<double>(relaxed_ + 1) <= budget_rate_ * static_cast<double>(elapsed_) + 1.0) {
      ++relaxed_;
      relaxed_last_ = true;
      return desired;
    }
  }
  return stealth_project(desired, y_true - y_hat, sigma_r_, tau, spec_.margin);
}

}  // namespace ews
