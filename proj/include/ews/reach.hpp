#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>

#include "ews/ellipsoid.hpp"
#include "ews/estimator.hpp"
#include "ews/plant.hpp"

namespace ews {

struct NoiseBound {
  double w_bar = 0.0;
  double p = 0.95;
};

NoiseBound noise_energy_bound(const Matrix& sigma_w, double p);

// e+ = A e - L r + w with r' sigma_r^{-1} r <= tau and |w|^2 <= w_bar.
struct ErrorSystem {
  Matrix A;
  Matrix L;
  Matrix sigma_r;
  double tau = 0.0;
  double w_bar = 0.0;

  static ErrorSystem from_design(const LtiModel& model, const KalmanDesign& design,
                                 const DetectorConfig& detector, const NoiseBound& noise);
};

struct ReachEllipsoid {
  Matrix Pi;
  double p = 0.95;
  double a = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double tau = 0.0;
  double w_bar = 0.0;
  double log_det = 0.0;
  double residual = 0.0;
  int grid_resolution = 0;
};

struct InvariantOptions {
  int grid_resolution = 20;
  double min_weight = 0.01;
  double tolerance = 1e-8;
  bool refine = true;
};

// Weighted outer-bound map F(Q) = A Q A'/a + tau L S L'/b1 + w_bar I/b2.
Matrix propagation_map(const ErrorSystem& es, const Matrix& q, double a, double b1, double b2);

// Fixed point of F for fixed weights; empty when a <= rho(A)^2 or no convergence.
std::optional<Matrix> invariant_fixed_point(const ErrorSystem& es, double a, double b1, double b2,
                                            double tolerance = 1e-8);

ReachEllipsoid compute_invariant_ellipsoid(const ErrorSystem& es, const InvariantOptions& opts = {});

inline ReachEllipsoid compute_invariant_ellipsoid(const ErrorSystem& es, int grid_resolution) {
  InvariantOptions opts;
  opts.grid_resolution = grid_resolution;
  return compute_invariant_ellipsoid(es, opts);
}

inline Ellipsoid<double> instantiate(const ReachEllipsoid& re, const Vector& x_hat) {
  require_size(x_hat, re.Pi.rows(), "x_hat");
  return Ellipsoid<double>::unchecked(x_hat, re.Pi);
}

// Supplies the attacked residual for each step of an error trajectory.
class AttackSampler {
 public:
  virtual ~AttackSampler() = default;
  virtual void reset(std::mt19937_64& /*engine*/) {}
  virtual Vector next(const Vector& e, std::mt19937_64& engine) = 0;
};

class ZeroAttackSampler : public AttackSampler {
 public:
  explicit ZeroAttackSampler(int m) : m_(m) {}
  Vector next(const Vector&, std::mt19937_64&) override { return Vector::Zero(m_); }

 private:
  int m_;
};

// Uniform direction on the boundary r' S^{-1} r = tau.
class RandomBoundarySampler : public AttackSampler {
 public:
  RandomBoundarySampler(const Matrix& sigma_r, double tau);
  Vector next(const Vector& e, std::mt19937_64& engine) override;

 private:
  Matrix factor_;
  double radius_;
  std::normal_distribution<double> normal_;
};

// Residual on the boundary chosen to push e+ furthest out in the Pi metric.
class GreedyBoundarySampler : public AttackSampler {
 public:
  GreedyBoundarySampler(const Matrix& A, const Matrix& L, const Matrix& sigma_r, double tau,
                        const Matrix& Pi);
  Vector next(const Vector& e, std::mt19937_64& engine) override;

 private:
  Matrix A_;
  Matrix gain_;    // S^{1/2} L' Pi^{-1}
  Matrix factor_;  // S^{1/2}
  Vector fallback_;
  double radius_;
};

// Fraction of visited error states (steps 1..horizon of every trial) inside E(0, Pi).
double validate_containment(const ReachEllipsoid& re, const LtiModel& model,
                            const KalmanDesign& design, const DetectorConfig& detector,
                            AttackSampler& sampler, int trials, int horizon, std::uint64_t seed);

}  // namespace ews
