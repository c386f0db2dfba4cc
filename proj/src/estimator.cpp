#include "ews/estimator.hpp"

#include <sstream>

#include "ews/linalg.hpp"

namespace ews {

KalmanDesign design_kalman(const LtiModel& model, const RiccatiOptions& opts) {
  const Matrix& a = model.A();
  const Matrix& c = model.C();
  const Matrix& q = model.sigma_w();
  const Matrix& r = model.sigma_v();
  if (!pbh_observable(a, c)) throw SynthesisError("Kalman design needs (A, C) observable");

  Matrix p = q;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iterations; ++it) {
    const Matrix s = c * p * c.transpose() + r;
    const Matrix apc = a * p * c.transpose();
    Matrix next = a * p * a.transpose() + q - apc * s.llt().solve(apc.transpose());
    next = symmetrized(next);
    if (!next.allFinite()) throw SynthesisError("Riccati iteration diverged");
    const double diff = (next - p).norm();
    p = std::move(next);
    if (diff < opts.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Riccati iteration did not converge within " << opts.max_iterations << " iterations";
    throw SynthesisError(msg.str());
  }

  KalmanDesign d;
  d.P = p;
  d.sigma_r = symmetrized(c * p * c.transpose() + r);
  d.L = d.sigma_r.llt().solve(c * p * a.transpose()).transpose();
  d.iterations = it;
  const double rho = spectral_radius(a - d.L * c);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "estimator error dynamics unstable: spectral radius of A - L C is " << rho;
    throw SynthesisError(msg.str());
  }
  return d;
}

DetectorConfig DetectorConfig::from_beta(double beta, int dof) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvariantError("beta must lie in (0, 1)");
  if (dof < 1) throw InvariantError("detector dof must be at least 1");
  return {beta, chi2_quantile(1.0 - beta, dof), dof};
}

Vector predictor_update(const KalmanDesign& design, const LtiModel& model, const Vector& x_hat,
                        const Vector& u, const Vector& r) {
  return model.A() * x_hat + model.B() * u + design.L * r;
}

KalmanStep kalman_step(const KalmanDesign& design, const EstimatorState& st, const Vector& u_prev,
                       const Vector& y_received_prev, const Vector& y_received_now,
                       const LtiModel& model) {
  require_size(st.x_hat, model.n(), "x_hat");
  require_size(u_prev, model.p(), "u_prev");
  require_size(y_received_prev, model.m(), "previous received output");
  require_size(y_received_now, model.m(), "received output");
  const Vector r_prev = y_received_prev - model.C() * st.x_hat;
  KalmanStep out;
  out.next.x_hat = predictor_update(design, model, st.x_hat, u_prev, r_prev);
  out.y_hat = model.C() * out.next.x_hat;
  out.r = y_received_now - out.y_hat;
  return out;
}

}  // namespace ews
