#include "ews/plant.hpp"

#include <algorithm>
#include <sstream>

#include "ews/linalg.hpp"

namespace ews {

LtiModel LtiModel::create(Matrix a, Matrix b, Matrix c, Matrix sigma_w, Matrix sigma_v,
                          double dt) {
  const Eigen::Index n = a.rows();
  if (n < 1) throw DimensionError("A must be non-empty");
  require_shape(a, n, n, "A");
  if (b.rows() != n || b.cols() < 1) {
    throw DimensionError("B must have " + std::to_string(n) + " rows and at least one column, got " +
                         shape_of(b.rows(), b.cols()));
  }
  if (c.cols() != n || c.rows() < 1) {
    throw DimensionError("C must have " + std::to_string(n) + " columns and at least one row, got " +
                         shape_of(c.rows(), c.cols()));
  }
  require_shape(sigma_w, n, n, "sigma_w");
  require_shape(sigma_v, c.rows(), c.rows(), "sigma_v");
  require_finite(a, "A");
  require_finite(b, "B");
  require_finite(c, "C");
  require_finite(sigma_w, "sigma_w");
  require_finite(sigma_v, "sigma_v");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvariantError("dt must be positive");
  if (!is_positive_semidefinite(sigma_w)) {
    throw InvariantError("sigma_w must be symmetric positive semidefinite");
  }
  if (!is_positive_definite(sigma_v)) {
    throw InvariantError("sigma_v must be symmetric positive definite");
  }
  if (!pbh_observable(a, c)) throw InvariantError("(A, C) is not observable");
  if (!pbh_controllable(a, b)) throw InvariantError("(A, B) is not controllable");

  LtiModel model;
  model.a_ = std::move(a);
  model.b_ = std::move(b);
  model.c_ = std::move(c);
  model.sigma_w_ = symmetrized(sigma_w);
  model.sigma_v_ = symmetrized(sigma_v);
  model.w_factor_ = psd_factor(model.sigma_w_);
  model.v_factor_ = model.sigma_v_.llt().matrixL();
  model.dt_ = dt;
  return model;
}

SetpointSchedule::SetpointSchedule(std::vector<std::pair<Step, Vector>> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw InvariantError("set-point schedule is empty");
  if (segments_.front().first != 0) throw InvariantError("set-point schedule must start at step 0");
  for (size_t i = 1; i < segments_.size(); ++i) {
    if (segments_[i].first <= segments_[i - 1].first) {
      throw InvariantError("set-point schedule steps must be strictly increasing");
    }
    require_size(segments_[i].second, segments_[0].second.size(), "set-point");
  }
  for (const auto& s : segments_) require_finite(s.second, "set-point");
}

const Vector& SetpointSchedule::at(Step k) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), k,
                             [](Step v, const auto& seg) { return v < seg.first; });
  if (it == segments_.begin()) return segments_.front().second;
  return std::prev(it)->second;
}

Matrix closed_loop_matrix(const LtiModel& model, const ControlLaw& law, double dt) {
  const Matrix& a = model.A();
  const Matrix& b = model.B();
  const Matrix& c = model.C();
  if (const auto* sg = std::get_if<StaticGain>(&law)) {
    return a + b * sg->kg * c;
  }
  const auto& pi = std::get<ProportionalIntegral>(law);
  const int n = model.n();
  const int p = model.p();
  Matrix cl(n + p, n + p);
  cl.topLeftCorner(n, n) = a + b * (pi.kp + dt * pi.ki) * c;
  cl.topRightCorner(n, p) = b;
  cl.bottomLeftCorner(p, n) = dt * pi.ki * c;
  cl.bottomRightCorner(p, p).setIdentity();
  return cl;
}

Controller Controller::create(const LtiModel& model, ControlLaw law, SetpointSchedule y_ref) {
  const int m = model.m();
  const int p = model.p();
  if (auto* sg = std::get_if<StaticGain>(&law)) {
    require_shape(sg->kg, p, m, "Kg");
    require_finite(sg->kg, "Kg");
  } else {
    auto& pi = std::get<ProportionalIntegral>(law);
    require_shape(pi.kp, p, m, "Kp");
    require_shape(pi.ki, p, m, "Ki");
    require_finite(pi.kp, "Kp");
    require_finite(pi.ki, "Ki");
  }
  if (y_ref.segments().empty()) throw InvariantError("controller needs a set-point");
  require_size(y_ref.segments().front().second, m, "y_ref");

  Matrix cl = closed_loop_matrix(model, law, model.dt());
  if (const auto* pi = std::get_if<ProportionalIntegral>(&law)) {
    // An integrator with a zero Ki row never leaves zero; drop its constant mode.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < model.n(); ++i) keep.push_back(i);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!pi->ki.row(j).isZero(0)) keep.push_back(model.n() + j);
    }
    cl = cl(keep, keep).eval();
  }
  const double rho = spectral_radius(cl);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "closed loop is not asymptotically stable: spectral radius " << rho << " >= 1";
    throw InvariantError(msg.str());
  }
  Controller ctrl;
  ctrl.law_ = std::move(law);
  ctrl.y_ref_ = std::move(y_ref);
  ctrl.dt_ = model.dt();
  ctrl.p_ = p;
  return ctrl;
}

Matrix Controller::one_step_gain() const {
  if (const auto* sg = std::get_if<StaticGain>(&law_)) return sg->kg;
  const auto& pi = std::get<ProportionalIntegral>(law_);
  return pi.kp + dt_ * pi.ki;
}

ControllerState Controller::initial_state() const {
  return {Vector::Zero(p_), Vector::Zero(p_)};
}

void validate_unsafe_set(const UnsafeSet& su, int n) {
  if (su.empty()) throw InvariantError("unsafe set must contain at least one half-space");
  for (const auto& h : su) {
    if (h.normal.size() != n) {
      throw DimensionError("half-space '" + h.label + "' normal must have " + std::to_string(n) +
                           " entries, got " + std::to_string(h.normal.size()));
    }
    if (!h.normal.allFinite() || !std::isfinite(h.bound)) {
      throw NumericError("half-space '" + h.label + "' has non-finite data");
    }
    if (h.normal.isZero(0)) throw InvariantError("half-space '" + h.label + "' has a zero normal");
  }
}

Vector NoiseSource::draw(const Matrix& factor) {
  Vector z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal_(engine_);
  return factor * z;
}

Vector measure(const LtiModel& model, const Vector& x, NoiseSource& noise) {
  require_size(x, model.n(), "x");
  require_finite(x, "x");
  return model.C() * x + noise.draw(model.v_factor());
}

Vector advance(const LtiModel& model, const Vector& x, const Vector& u, NoiseSource& noise) {
  require_size(x, model.n(), "x");
  require_size(u, model.p(), "u");
  require_finite(u, "u");
  return model.A() * x + model.B() * u + noise.draw(model.w_factor());
}

PlantStep step_plant(const LtiModel& model, const Vector& x, const Vector& u, NoiseSource& noise) {
  Vector y = measure(model, x, noise);
  return {advance(model, x, u, noise), std::move(y)};
}

ControlStep control_output(const Controller& ctrl, const ControllerState& st,
                           const Vector& y_received, Step k) {
  const Vector& y_ref = ctrl.y_ref().at(k);
  require_size(y_received, y_ref.size(), "received output");
  const Vector e = y_received - y_ref;
  ControlStep out;
  out.next = st;
  if (const auto* sg = std::get_if<StaticGain>(&ctrl.law())) {
    out.u = sg->kg * e;
  } else {
    const auto& pi = std::get<ProportionalIntegral>(ctrl.law());
    require_size(st.integrator, pi.kp.rows(), "integrator");
    out.next.integrator = st.integrator + pi.ki * e * ctrl.dt();
    out.u = pi.kp * e + out.next.integrator;
  }
  out.next.last_u = out.u;
  return out;
}

UnsafeCheck check_unsafe(const Vector& x, const UnsafeSet& su) {
  UnsafeCheck out;
  for (const auto& h : su) {
    require_size(x, h.normal.size(), "x");
    if (h.contains(x)) {
      out.unsafe = true;
      out.violated.push_back(h.label);
    }
  }
  return out;
}

std::pair<Vector, ControllerState> equilibrium(const LtiModel& model, const Controller& ctrl,
                                               Step k) {
  const int n = model.n();
  const Matrix eye = Matrix::Identity(n, n);
  const Vector& y_ref = ctrl.y_ref().at(k);
  ControllerState st = ctrl.initial_state();
  Vector x;
  if (const auto* sg = std::get_if<StaticGain>(&ctrl.law())) {
    const Matrix lhs = eye - model.A() - model.B() * sg->kg * model.C();
    x = lhs.partialPivLu().solve(-model.B() * sg->kg * y_ref);
    st.last_u = sg->kg * (model.C() * x - y_ref);
  } else {
    const auto lu = (eye - model.A()).partialPivLu();
    const Matrix dc_gain = model.C() * lu.solve(model.B());
    const Vector u = dc_gain.completeOrthogonalDecomposition().solve(y_ref);
    x = lu.solve(model.B() * u);
    st.integrator = u;
    st.last_u = u;
  }
  if (!x.allFinite()) throw NumericError("no finite equilibrium for this set-point");
  return {x, st};
}

LtiModel random_stable_system(int n, int m, int p, std::uint64_t seed) {
  if (n < 1 || m < 1 || p < 1) throw DimensionError("n, m, p must be at least 1");
  constexpr int kRetries = 100;
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(0.3, 0.9);
  auto gaussian = [&](int rows, int cols) {
    Matrix g(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) g(i, j) = normal(engine);
    return g;
  };
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    Matrix a = gaussian(n, n);
    const double rho = spectral_radius(a);
    if (!(rho > 0.0)) continue;
    a *= radius(engine) / rho;
    Matrix b = gaussian(n, p);
    Matrix c = gaussian(m, n);
    if (spectral_radius(a) >= 0.95) continue;
    if (!pbh_controllable(a, b) || !pbh_observable(a, c)) continue;
    return LtiModel::create(std::move(a), std::move(b), std::move(c),
                            0.01 * Matrix::Identity(n, n), 0.01 * Matrix::Identity(m, m), 1.8);
  }
  throw SynthesisError("random_stable_system: no admissible model after " +
                       std::to_string(kRetries) + " attempts (seed " + std::to_string(seed) + ")");
}

}  // namespace ews
