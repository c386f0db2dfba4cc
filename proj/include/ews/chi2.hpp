#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ews {

// Regularized lower incomplete gamma P(a, x): power series below a + 1,
// Lentz continued fraction for Q(a, x) above.
template <typename Scalar>
Scalar regularized_gamma_p(Scalar a, Scalar x) {
  using std::abs;
  using std::exp;
  using std::lgamma;
  using std::log;
  if (!(a > Scalar(0))) throw std::domain_error("gamma shape must be positive");
  if (x <= Scalar(0)) return Scalar(0);
  if (std::isinf(x)) return Scalar(1);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar log_prefix = a * log(x) - x - lgamma(a);

  if (x < a + Scalar(1)) {
    Scalar term = Scalar(1) / a;
    Scalar sum = term;
    Scalar ap = a;
    for (int i = 0; i < 10000; ++i) {
      ap += Scalar(1);
      term *= x / ap;
      sum += term;
      if (abs(term) < abs(sum) * eps) break;
    }
    return std::min(Scalar(1), sum * exp(log_prefix));
  }

  const Scalar tiny = std::numeric_limits<Scalar>::min() / eps;
  Scalar b = x + Scalar(1) - a;
  Scalar c = Scalar(1) / tiny;
  Scalar d = Scalar(1) / b;
  Scalar h = d;
  for (int i = 1; i < 10000; ++i) {
    const Scalar an = -Scalar(i) * (Scalar(i) - a);
    b += Scalar(2);
    d = an * d + b;
    if (abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (abs(c) < tiny) c = tiny;
    d = Scalar(1) / d;
    const Scalar delta = d * c;
    h *= delta;
    if (abs(delta - Scalar(1)) < eps) break;
  }
  return std::max(Scalar(0), Scalar(1) - exp(log_prefix) * h);
}

template <typename Scalar>
Scalar chi2_cdf(Scalar x, int dof) {
  return regularized_gamma_p(Scalar(dof) / Scalar(2), x / Scalar(2));
}

// Inverse chi-squared CDF by bisection. The bracket is shrunk to the last
// representable step, which is far tighter than 1e-10 on the CDF.
template <typename Scalar = double>
Scalar chi2_quantile(Scalar prob, int dof) {
  if (!(prob > Scalar(0) && prob < Scalar(1))) {
    throw std::domain_error("chi-squared quantile needs prob in (0,1)");
  }
  if (dof < 1) throw std::domain_error("chi-squared quantile needs dof >= 1");
  Scalar lo = 0;
  Scalar hi = std::max(Scalar(1), Scalar(dof));
  while (chi2_cdf(hi, dof) < prob) {
    lo = hi;
    hi *= Scalar(2);
  }
  for (int i = 0; i < 400; ++i) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;
    if (chi2_cdf(mid, dof) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / Scalar(2);
}

}  // namespace ews
