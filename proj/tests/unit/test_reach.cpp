#include <doctest.h>

#include <cmath>

#include "ews/reach.hpp"
#include "../support.hpp"

using namespace ews;

namespace {

ErrorSystem reactor_error_system() {
  const auto& d = ews::testing::reactor_design();
  return ErrorSystem::from_design(d.model, d.kalman, d.detector, d.noise);
}

ErrorSystem scalar_system(double a) {
  return {Matrix::Constant(1, 1, a), Matrix::Zero(1, 1), Matrix::Ones(1, 1), 1.0, 1.0};
}

template <typename F>
double golden_section_min(F f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return f((lo + hi) / 2.0);
}

}  // namespace

TEST_CASE("noise energy bound") {
  CHECK(noise_energy_bound(Matrix::Identity(1, 1), 0.95).w_bar == doctest::Approx(3.841458820694124));
  const Matrix s = Eigen::Vector2d(2, 1).asDiagonal();
  CHECK(noise_energy_bound(s, 0.95).w_bar == doctest::Approx(2.0 * 5.991464547107979));
  CHECK_THROWS_AS(noise_energy_bound(s, 1.0), InvariantError);

  std::mt19937_64 rng(8);
  const Matrix cov = ews::testing::random_spd(3, rng);
  const double bound = noise_energy_bound(cov, 0.95).w_bar;
  const Matrix f = cov.llt().matrixL();
  int inside = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    if ((f * ews::testing::random_vector(3, rng)).squaredNorm() <= bound) ++inside;
  }
  CHECK(static_cast<double>(inside) / draws >= 0.95);
}

TEST_CASE("memoryless error gives the unit ball") {
  const ErrorSystem es{Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Ones(1, 1), 1.0, 1.0};
  const auto re = compute_invariant_ellipsoid(es);
  CHECK((re.Pi - Matrix::Identity(2, 2)).norm() < 1e-9);
  CHECK(re.b2 == doctest::Approx(1.0));
}

TEST_CASE("scalar system matches the one-dimensional optimum") {
  const double a_sys = 0.5;
  // q(a) = w_bar / (b2 (1 - a_sys^2 / a)) with b2 = 1 - a.
  const double q_opt = golden_section_min(
      [&](double a) { return 1.0 / ((1.0 - a) * (1.0 - a_sys * a_sys / a)); }, a_sys * a_sys + 1e-9,
      1.0 - 1e-9);
  CHECK(q_opt == doctest::Approx(4.0).epsilon(1e-9));
  const auto re = compute_invariant_ellipsoid(scalar_system(a_sys));
  CHECK(std::abs(re.Pi(0, 0) - q_opt) < 1e-6);
  CHECK(re.a == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("reactor ellipsoid is a fixed point and one-step invariant") {
  const auto es = reactor_error_system();
  const auto& re = ews::testing::reactor_design().reach;
  CHECK(re.residual < 1e-8);
  CHECK((propagation_map(es, re.Pi, re.a, re.b1, re.b2) - re.Pi).norm() / re.Pi.norm() < 1e-8);
  CHECK(re.a + re.b1 + re.b2 == doctest::Approx(1.0));
  CHECK(re.a > std::pow(spectral_radius(es.A), 2));

  std::mt19937_64 rng(31);
  const Matrix pi_half = re.Pi.llt().matrixL();
  const Matrix s_half = es.sigma_r.llt().matrixL();
  const int n = static_cast<int>(es.A.rows());
  const int m = static_cast<int>(es.L.cols());
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vector e = pi_half * ews::testing::random_unit(n, rng);
    const Vector r = s_half * (std::sqrt(es.tau) * ews::testing::random_unit(m, rng));
    const Vector w = std::sqrt(es.w_bar) * ews::testing::random_unit(n, rng);
    const Vector next = es.A * e - es.L * r + w;
    worst = std::max(worst, next.dot(re.Pi.llt().solve(next)));
  }
  CHECK(worst <= 1.0 + 1e-9);
}

TEST_CASE("returned weights beat every converged grid point") {
  const auto es = reactor_error_system();
  InvariantOptions opts;
  opts.grid_resolution = 8;
  const auto re = compute_invariant_ellipsoid(es, opts);
  const int steps = opts.grid_resolution - 1;
  const double span = 1.0 - 3 * opts.min_weight;
  int converged = 0;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const int k = steps - i - j;
      const auto q = invariant_fixed_point(es, opts.min_weight + span * i / steps,
                                           opts.min_weight + span * j / steps,
                                           opts.min_weight + span * k / steps);
      if (!q) continue;
      ++converged;
      CHECK(re.log_det <= log_det_pd(*q) + 1e-12);
    }
  }
  CHECK(converged > 0);
}

TEST_CASE("inadmissible weights have no fixed point") {
  const auto es = reactor_error_system();
  const double rho2 = std::pow(spectral_radius(es.A), 2);
  CHECK_FALSE(invariant_fixed_point(es, rho2 * 0.99, 0.5, 0.5).has_value());
}

TEST_CASE("larger disturbance bounds never shrink the ellipsoid") {
  const auto base = reactor_error_system();
  const double ld = compute_invariant_ellipsoid(base).log_det;
  for (double f : {1.2, 2.0, 5.0}) {
    ErrorSystem more_tau = base;
    more_tau.tau *= f;
    ErrorSystem more_w = base;
    more_w.w_bar *= f;
    CHECK(compute_invariant_ellipsoid(more_tau).log_det >= ld);
    CHECK(compute_invariant_ellipsoid(more_w).log_det >= ld);
  }
}

TEST_CASE("synthesis errors") {
  auto es = scalar_system(1.0);
  CHECK_THROWS_AS(compute_invariant_ellipsoid(es), SynthesisError);
  es = scalar_system(0.5);
  es.tau = 0.0;
  CHECK_THROWS_AS(compute_invariant_ellipsoid(es), SynthesisError);
  es = scalar_system(0.5);
  es.w_bar = 0.0;
  CHECK_THROWS_AS(compute_invariant_ellipsoid(es), SynthesisError);
  // Only weights up to 0.2 on a: rho^2 = 0.81 is never admissible.
  InvariantOptions opts;
  opts.min_weight = 0.4;
  CHECK_THROWS_AS(compute_invariant_ellipsoid(scalar_system(0.9), opts), SynthesisError);
}

TEST_CASE("instantiate") {
  const auto& re = ews::testing::reactor_design().reach;
  const auto e0 = instantiate(re, Vector::Zero(2));
  CHECK(e0.center().isZero(0));
  CHECK(e0.shape() == re.Pi);
  const Vector x = Eigen::Vector2d(16.55, 1.0);
  const Vector t = Eigen::Vector2d(-2.0, 0.5);
  const auto moved = instantiate(re, x + t);
  const auto shifted = instantiate(re, x).translated(t);
  CHECK(moved.center() == shifted.center());
  CHECK(moved.shape() == shifted.shape());
  CHECK(instantiate(re, x).contains(x));
  CHECK_THROWS_AS(instantiate(re, Vector::Zero(3)), DimensionError);
}

TEST_CASE("containment coverage") {
  const auto& d = ews::testing::reactor_design();
  const auto quiet = LtiModel::create(d.model.A(), d.model.B(), d.model.C(), Matrix::Zero(2, 2),
                                      d.model.sigma_v(), d.model.dt());
  ZeroAttackSampler zero(1);
  CHECK(validate_containment(d.reach, quiet, d.kalman, d.detector, zero, 20, 100, 1) == 1.0);

  GreedyBoundarySampler greedy(d.model.A(), d.kalman.L, d.kalman.sigma_r, d.detector.tau,
                               d.reach.Pi);
  const double base = validate_containment(d.reach, d.model, d.kalman, d.detector, greedy, 200, 200, 4);
  CHECK(base >= 0.94);
  ReachEllipsoid inflated = d.reach;
  inflated.Pi *= 1.5;
  GreedyBoundarySampler greedy2(d.model.A(), d.kalman.L, d.kalman.sigma_r, d.detector.tau,
                                d.reach.Pi);
  CHECK(validate_containment(inflated, d.model, d.kalman, d.detector, greedy2, 200, 200, 4) >= base);

  RandomBoundarySampler random(d.kalman.sigma_r, d.detector.tau);
  CHECK(validate_containment(d.reach, d.model, d.kalman, d.detector, random, 200, 200, 5) >= 0.94);
}
