#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ews/ellipsoid.hpp"
#include "../support.hpp"

using namespace ews;
using ews::testing::random_spd;
using ews::testing::random_unit;
using ews::testing::random_vector;

namespace {

Ellipsoid<double> unit_ball(int n) { return {Vector::Zero(n), Matrix::Identity(n, n)}; }

HalfSpace<double> half(Vector c, double b) { return {std::move(c), b, "h"}; }

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

// Uniform point in E(q, Q).
Vector sample_in(const Ellipsoid<double>& e, std::mt19937_64& rng) {
  const int n = e.dim();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Vector dir = random_unit(n, rng);
  const double radius = std::pow(uni(rng), 1.0 / n);
  const Matrix f = e.shape().llt().matrixL();
  return e.center() + f * (radius * dir);
}

}  // namespace

TEST_CASE("support and signed distance on small examples") {
  const auto ball = unit_ball(2);
  CHECK(support(ball, v2(1, 0)) == doctest::Approx(1.0));
  const Ellipsoid<double> e(v2(1, 2), Matrix(Eigen::Vector2d(4, 9).asDiagonal()));
  CHECK(support(e, v2(0, 1)) == doctest::Approx(5.0));
  CHECK(support(e, v2(1, 0)) == doctest::Approx(3.0));

  CHECK(signed_distance(ball, half(v2(1, 0), 2.0)) == doctest::Approx(1.0));
  CHECK(signed_distance(ball, half(v2(1, 0), 0.5)) == doctest::Approx(-0.5));
  CHECK(signed_distance(ball, half(v2(2, 0), 4.0)) == doctest::Approx(1.0));
  CHECK(signed_distance(ball, half(v2(1, 0), 1.0)) == doctest::Approx(0.0));

  CHECK_THROWS_AS(support(ball, v2(0, 0)), DimensionError);
  CHECK_THROWS_AS(signed_distance(ball, half(Vector::Ones(3), 0.0)), DimensionError);
}

TEST_CASE("ellipsoid construction validates its shape") {
  CHECK_THROWS_AS(Ellipsoid<double>(Vector::Zero(2), Matrix::Identity(3, 3)), DimensionError);
  CHECK_THROWS_AS(Ellipsoid<double>(Vector::Zero(2), -Matrix::Identity(2, 2)), NumericError);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(Ellipsoid<double>(Vector::Zero(2), asym), NumericError);
}

TEST_CASE("half-ball cut reproduces the textbook minimum-volume ellipsoid") {
  const auto cut = cut_mve(unit_ball(2), half(v2(1, 0), 0.0));
  REQUIRE(cut.kind == CutKind::Cut);
  CHECK(cut.alpha == 0.0);
  CHECK(std::abs(cut.ellipsoid.center()(0) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(cut.ellipsoid.center()(1)) < 1e-12);
  CHECK(std::abs(cut.ellipsoid.shape()(0, 0) - 4.0 / 9.0) < 1e-12);
  CHECK(std::abs(cut.ellipsoid.shape()(1, 1) - 4.0 / 3.0) < 1e-12);
  CHECK(std::abs(cut.ellipsoid.shape()(0, 1)) < 1e-12);
  const double expected = std::sqrt(16.0 / 27.0);
  CHECK(std::abs(volume_ratio(cut.ellipsoid.shape(), Matrix::Identity(2, 2)) - expected) < 1e-12);
  CHECK(std::abs(cut_volume_ratio(0.0, 2) - expected) < 1e-12);
}

TEST_CASE("cut classification by depth") {
  const auto ball = unit_ball(3);
  CHECK(cut_mve(ball, half(Vector::Unit(3, 0), 1.5)).kind == CutKind::Disjoint);
  const auto shallow = cut_mve(ball, half(Vector::Unit(3, 0), -0.5));
  CHECK(shallow.kind == CutKind::Contained);
  CHECK(shallow.ellipsoid.shape().isApprox(ball.shape()));
  CHECK(cut_volume_ratio(-0.5, 3) == 1.0);
  CHECK(cut_volume_ratio(1.5, 3) == 0.0);
  const auto touching = cut_mve(ball, half(Vector::Unit(3, 0), 1.0));
  CHECK(touching.kind == CutKind::Cut);
  CHECK(touching.alpha == 1.0);
  CHECK(cut_volume_ratio(1.0, 3) == 0.0);
}

TEST_CASE("deep cut determinant identity and strict volume decrease") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    const Ellipsoid<double> e(random_vector(n, rng), random_spd(n, rng));
    const double alpha = -1.0 / n + (1.0 + 1.0 / n) * (0.001 + 0.998 * uni(rng));
    const Vector c = random_unit(n, rng);
    const double width = std::sqrt(c.dot(e.shape() * c));
    const auto cut = cut_mve(e, half(c, c.dot(e.center()) + alpha * width));
    REQUIRE(cut.kind == CutKind::Cut);
    CHECK(std::abs(cut.alpha - alpha) < 1e-9);
    const double nn = n;
    const double delta = nn * nn / (nn * nn - 1.0) * (1.0 - alpha * alpha);
    const double sigma = 2.0 * (1.0 + nn * alpha) / ((nn + 1.0) * (1.0 + alpha));
    const double lhs = cut.ellipsoid.shape().determinant();
    const double rhs = std::pow(delta, n) * (1.0 - sigma) * e.shape().determinant();
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
    const double ratio = volume_ratio(cut.ellipsoid.shape(), e.shape());
    CHECK(ratio < 1.0);
    CHECK(std::abs(ratio - cut_volume_ratio(alpha, n)) < 1e-9);
  }
}

TEST_CASE("cut ellipsoid covers sampled intersection points") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const Ellipsoid<double> e(random_vector(n, rng), random_spd(n, rng));
    const Vector c = random_unit(n, rng);
    const double width = std::sqrt(c.dot(e.shape() * c));
    const auto h = half(c, c.dot(e.center()) + 0.3 * width);
    const auto cut = cut_mve(e, h);
    REQUIRE(cut.kind == CutKind::Cut);
    int inside = 0, total = 0;
    while (total < 2000) {
      const Vector x = sample_in(e, rng);
      if (!h.contains(x)) continue;
      ++total;
      if (cut.ellipsoid.contains(x, 1e-12)) ++inside;
    }
    CHECK(inside == total);
  }
}

TEST_CASE("cut is equivariant under affine maps") {
  std::mt19937_64 rng(13);
  const int n = 3;
  const Ellipsoid<double> e(random_vector(n, rng), random_spd(n, rng));
  const Vector c = random_unit(n, rng);
  const double b = c.dot(e.center()) + 0.2 * std::sqrt(c.dot(e.shape() * c));
  const Matrix m = random_spd(n, rng) + Matrix::Identity(n, n);
  const Vector t = random_vector(n, rng);
  const auto base = cut_mve(e, half(c, b));

  const Ellipsoid<double> mapped(m * e.center() + t, m * e.shape() * m.transpose());
  const Vector c_mapped = m.transpose().lu().solve(c);
  const auto cut = cut_mve(mapped, half(c_mapped, b + c_mapped.dot(t)));
  CHECK(cut.ellipsoid.center().isApprox(m * base.ellipsoid.center() + t, 1e-10));
  CHECK(cut.ellipsoid.shape().isApprox(m * base.ellipsoid.shape() * m.transpose(), 1e-10));
}

TEST_CASE("one-dimensional cuts are exact intervals") {
  const Ellipsoid<double> seg(Vector::Zero(1), Matrix::Identity(1, 1));
  const auto right = cut_mve(seg, half(Vector::Ones(1), 0.0));
  REQUIRE(right.kind == CutKind::Cut);
  CHECK(right.ellipsoid.center()(0) == doctest::Approx(0.5));
  CHECK(right.ellipsoid.shape()(0, 0) == doctest::Approx(0.25));
  CHECK(cut_volume_ratio(0.0, 1) == doctest::Approx(0.5));

  const auto left = cut_mve(seg, half(-Vector::Ones(1), -0.5));
  REQUIRE(left.kind == CutKind::Cut);
  CHECK(left.ellipsoid.center()(0) == doctest::Approx(-0.25));
  CHECK(left.ellipsoid.shape()(0, 0) == doctest::Approx(0.75 * 0.75));
  CHECK(cut_mve(seg, half(Vector::Ones(1), -2.0)).kind == CutKind::Contained);
  CHECK(cut_mve(seg, half(Vector::Ones(1), 1.5)).kind == CutKind::Disjoint);
}

TEST_CASE("volumes") {
  CHECK(volume(unit_ball(2)) == doctest::Approx(std::numbers::pi));
  CHECK(volume(unit_ball(3)) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  const Ellipsoid<double> e(Vector::Zero(2), Matrix(Eigen::Vector2d(4, 9).asDiagonal()));
  CHECK(volume(e) == doctest::Approx(6.0 * std::numbers::pi));
  CHECK(volume_ratio(e.shape(), e.shape()) == doctest::Approx(1.0));
}

TEST_CASE("geometry runs in long double") {
  using LMat = MatrixX<long double>;
  using LVec = VectorX<long double>;
  const Ellipsoid<long double> ball(LVec::Zero(2), LMat::Identity(2, 2));
  const HalfSpace<long double> h{LVec::Unit(2, 0), 0.0L, "h"};
  const auto cut = cut_mve(ball, h);
  CHECK(std::abs(cut.ellipsoid.shape()(0, 0) - 4.0L / 9.0L) < 1e-15L);
  CHECK(std::abs(cut_volume_ratio(0.0L, 2) - std::sqrt(16.0L / 27.0L)) < 1e-15L);
}

TEST_CASE("translation") {
  const auto ball = unit_ball(2);
  const auto moved = ball.translated(v2(3, -1));
  CHECK(moved.center().isApprox(v2(3, -1)));
  CHECK(moved.contains(v2(3.5, -1)));
  CHECK_FALSE(moved.contains(v2(0, 0)));
}
