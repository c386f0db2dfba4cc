#pragma once

#include "ews/chi2.hpp"
#include "ews/plant.hpp"

namespace ews {

struct KalmanDesign {
  Matrix L;        // n x m predictor gain
  Matrix P;        // n x n steady-state prediction error covariance
  Matrix sigma_r;  // m x m innovation covariance
  int iterations = 0;
};

struct RiccatiOptions {
  double tolerance = 1e-10;
  int max_iterations = 100000;
};

KalmanDesign design_kalman(const LtiModel& model, const RiccatiOptions& opts = {});

struct DetectorConfig {
  double beta = 0.05;
  double tau = 0.0;
  int dof = 1;

  static DetectorConfig from_beta(double beta, int dof);
};

struct EstimatorState {
  Vector x_hat;
};

struct KalmanStep {
  EstimatorState next;
  Vector y_hat;
  Vector r;
};

// Advances the predictor with the previous input and received output, then
// forms the residual of the new prediction against `y_received_now`.
KalmanStep kalman_step(const KalmanDesign& design, const EstimatorState& st, const Vector& u_prev,
                       const Vector& y_received_prev, const Vector& y_received_now,
                       const LtiModel& model);

// x_hat(k+1) = A x_hat + B u + L r with r = y_received - C x_hat.
Vector predictor_update(const KalmanDesign& design, const LtiModel& model, const Vector& x_hat,
                        const Vector& u, const Vector& r);

template <typename DerivedR, typename DerivedS>
typename DerivedR::Scalar chi2_metric(const Eigen::MatrixBase<DerivedR>& r,
                                      const Eigen::MatrixBase<DerivedS>& sigma_r) {
  using Scalar = typename DerivedR::Scalar;
  Eigen::LLT<MatrixX<Scalar>> llt(sigma_r);
  if (llt.info() != Eigen::Success) {
    throw NumericError("innovation covariance is not positive definite");
  }
  return r.dot(llt.solve(r.eval()));
}

inline bool alarm(double z, double tau) { return z > tau; }

}  // namespace ews
