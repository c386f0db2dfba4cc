#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "ews/chi2.hpp"

using namespace ews;

TEST_CASE("chi-squared quantiles at the detector level") {
  CHECK(std::abs(chi2_quantile(0.95, 1) - 3.841458820694124) < 1e-9);
  // Two degrees of freedom is an exponential with mean 2.
  CHECK(std::abs(chi2_quantile(0.95, 2) - (-2.0 * std::log(0.05))) < 1e-9);
  CHECK(std::abs(chi2_quantile(0.99, 2) - (-2.0 * std::log(0.01))) < 1e-9);
}

TEST_CASE("incomplete gamma agrees with an independent implementation") {
  for (double a : {0.5, 1.0, 1.5, 2.5, 5.0, 12.5, 40.0}) {
    for (double x : {1e-3, 0.1, 0.7, 1.0, 2.0, 5.0, 9.5, 30.0, 80.0}) {
      const double ref = boost::math::gamma_p(a, x);
      CHECK(std::abs(regularized_gamma_p(a, x) - ref) < 1e-13);
    }
  }
  for (int dof : {1, 2, 3, 7, 20, 100}) {
    for (double prob : {0.01, 0.5, 0.9, 0.95, 0.999}) {
      const double ref = 2.0 * boost::math::gamma_p_inv(dof / 2.0, prob);
      CHECK(std::abs(chi2_quantile(prob, dof) - ref) <= 1e-9 * std::max(1.0, ref));
    }
  }
}

TEST_CASE("quantile exceedance matches Monte Carlo") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const double tau = chi2_quantile(0.95, 3);
  const int draws = 400000;
  int over = 0;
  for (int i = 0; i < draws; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double v = normal(rng);
      s += v * v;
    }
    if (s > tau) ++over;
  }
  const double rate = static_cast<double>(over) / draws;
  CHECK(std::abs(rate - 0.05) < 4.0 * std::sqrt(0.05 * 0.95 / draws));
}

TEST_CASE("quantile is monotone in probability and degrees of freedom") {
  double prev = 0.0;
  for (double prob = 0.05; prob < 0.999; prob += 0.05) {
    const double q = chi2_quantile(prob, 4);
    CHECK(q > prev);
    prev = q;
  }
  prev = 0.0;
  for (int dof = 1; dof < 30; ++dof) {
    const double q = chi2_quantile(0.95, dof);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("quantile domain") {
  CHECK_THROWS(chi2_quantile(0.0, 1));
  CHECK_THROWS(chi2_quantile(1.0, 1));
  CHECK_THROWS(chi2_quantile(0.5, 0));
  CHECK(chi2_cdf(0.0, 3) == 0.0);
  CHECK(chi2_cdf(std::numeric_limits<double>::infinity(), 3) == 1.0);
}
