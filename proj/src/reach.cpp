#include "ews/reach.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "ews/linalg.hpp"

namespace ews {

NoiseBound noise_energy_bound(const Matrix& sigma_w, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvariantError("confidence p must lie in (0, 1)");
  if (!is_positive_semidefinite(sigma_w)) throw InvariantError("sigma_w must be PSD");
  const Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_w, Eigen::EigenvaluesOnly);
  const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
  return {lmax * chi2_quantile(p, static_cast<int>(sigma_w.rows())), p};
}

ErrorSystem ErrorSystem::from_design(const LtiModel& model, const KalmanDesign& design,
                                     const DetectorConfig& detector, const NoiseBound& noise) {
  ErrorSystem es{model.A(), design.L, design.sigma_r, detector.tau, noise.w_bar};
  const double rho = spectral_radius(es.A);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "open-loop spectral radius of A is " << rho << "; the reachable ellipsoid needs rho(A) < 1";
    throw SynthesisError(msg.str());
  }
  return es;
}

namespace {

struct Terms {
  bool dyn = false;
  bool att = false;
  bool noise = false;
  Matrix m_att;    // tau L S L'
  Matrix m_noise;  // w_bar I
  double rho2 = 0.0;
};

Terms active_terms(const ErrorSystem& es) {
  const Eigen::Index n = es.A.rows();
  Terms t;
  t.dyn = !es.A.isZero(0);
  t.m_att = symmetrized(es.tau * es.L * es.sigma_r * es.L.transpose());
  t.att = !t.m_att.isZero(0);
  t.m_noise = es.w_bar * Matrix::Identity(n, n);
  t.noise = es.w_bar > 0.0;
  t.rho2 = t.dyn ? std::pow(spectral_radius(es.A), 2) : 0.0;
  return t;
}

Matrix forcing(const Terms& t, double b1, double b2, Eigen::Index n) {
  Matrix m = Matrix::Zero(n, n);
  if (t.att) m += t.m_att / b1;
  if (t.noise) m += t.m_noise / b2;
  return m;
}

std::optional<Matrix> fixed_point(const ErrorSystem& es, const Terms& t, double a, double b1,
                                  double b2, double tolerance) {
  const Eigen::Index n = es.A.rows();
  const Matrix m = forcing(t, b1, b2, n);
  if (!t.dyn) return m;
  if (!(a > t.rho2)) return std::nullopt;

  // Smith doubling: S_{2k} = S_k + Phi^k S_k Phi^k'.
  Matrix phi = es.A / std::sqrt(a);
  Matrix s = m;
  for (int i = 0; i < 17; ++i) {
    const Matrix term = phi * s * phi.transpose();
    s += term;
    if (!s.allFinite()) return std::nullopt;
    if (term.norm() <= std::numeric_limits<double>::epsilon() * s.norm()) break;
    phi = phi * phi;
  }
  const Matrix phi1 = es.A / std::sqrt(a);
  for (int i = 0; i < 100; ++i) {
    Matrix next = symmetrized(phi1 * s * phi1.transpose() + m);
    const double change = (next - s).norm();
    s = std::move(next);
    if (change <= 4.0 * std::numeric_limits<double>::epsilon() * s.norm()) break;
  }
  const double residual = (propagation_map(es, s, a, b1, b2) - s).norm() / s.norm();
  if (!(residual < tolerance)) return std::nullopt;
  if (!is_positive_definite(s)) return std::nullopt;
  return s;
}

struct Candidate {
  std::array<double, 3> w{};  // a, b1, b2
  Matrix q;
  double log_det = std::numeric_limits<double>::infinity();
};

}  // namespace

Matrix propagation_map(const ErrorSystem& es, const Matrix& q, double a, double b1, double b2) {
  const Eigen::Index n = es.A.rows();
  Matrix out = Matrix::Zero(n, n);
  if (a > 0.0) out += es.A * q * es.A.transpose() / a;
  if (b1 > 0.0) out += es.tau * es.L * es.sigma_r * es.L.transpose() / b1;
  if (b2 > 0.0) out += es.w_bar * Matrix::Identity(n, n) / b2;
  return symmetrized(out);
}

std::optional<Matrix> invariant_fixed_point(const ErrorSystem& es, double a, double b1, double b2,
                                            double tolerance) {
  return fixed_point(es, active_terms(es), a, b1, b2, tolerance);
}

ReachEllipsoid compute_invariant_ellipsoid(const ErrorSystem& es, const InvariantOptions& opts) {
  const Eigen::Index n = es.A.rows();
  require_shape(es.A, n, n, "A");
  if (es.L.rows() != n) throw DimensionError("L must have as many rows as A");
  require_shape(es.sigma_r, es.L.cols(), es.L.cols(), "sigma_r");
  if (!(es.tau > 0.0)) throw SynthesisError("tau must be positive");
  if (!(es.w_bar >= 0.0)) throw SynthesisError("w_bar must be non-negative");
  if (opts.grid_resolution < 2) throw SynthesisError("grid resolution must be at least 2");
  const double rho = spectral_radius(es.A);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "open-loop spectral radius of A is " << rho << "; the reachable ellipsoid needs rho(A) < 1";
    throw SynthesisError(msg.str());
  }

  const Terms t = active_terms(es);
  if (!t.att && !t.noise) {
    throw SynthesisError("error system has no disturbance input; the invariant set is degenerate");
  }
  std::vector<int> active;
  if (t.dyn) active.push_back(0);
  if (t.att) active.push_back(1);
  if (t.noise) active.push_back(2);
  const int d = static_cast<int>(active.size());
  const double mw = opts.min_weight;
  const double span = 1.0 - mw * d;
  if (!(span >= 0.0)) throw SynthesisError("minimum weight too large for the simplex");

  auto evaluate = [&](const std::array<double, 3>& w) {
    Candidate c;
    c.w = w;
    auto q = fixed_point(es, t, w[0], w[1], w[2], opts.tolerance);
    if (!q) return c;
    c.log_det = log_det_pd(*q);
    c.q = std::move(*q);
    return c;
  };
  auto weights_from = [&](const std::vector<double>& free) {
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) w[active[i]] = free[i];
    return w;
  };

  const int steps = opts.grid_resolution - 1;
  Candidate best;
  std::vector<int> idx(d, 0);
  // Enumerate integer compositions of `steps` into d parts.
  auto visit = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == d - 1) {
      idx[pos] = remaining;
      std::vector<double> free(d);
      for (int i = 0; i < d; ++i) free[i] = mw + span * idx[i] / steps;
      Candidate c = evaluate(weights_from(free));
      if (c.log_det < best.log_det) best = std::move(c);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      idx[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  visit(visit, 0, steps);

  if (!std::isfinite(best.log_det)) {
    std::ostringstream msg;
    msg << "no admissible weights on the grid (rho(A)^2 = " << t.rho2
        << ", largest grid a = " << (t.dyn ? mw + span : 0.0) << ")";
    throw SynthesisError(msg.str());
  }

  if (opts.refine && d > 1) {
    std::vector<double> cur(d);
    for (int i = 0; i < d; ++i) cur[i] = best.w[active[i]];
    double step = span / steps;
    int evals = 0;
    while (step > 1e-10 && evals < 5000) {
      bool improved = false;
      for (int i = 0; i < d && !improved; ++i) {
        for (int j = 0; j < d && !improved; ++j) {
          if (i == j) continue;
          std::vector<double> trial = cur;
          trial[i] += step;
          trial[j] -= step;
          if (trial[j] < mw) continue;
          Candidate c = evaluate(weights_from(trial));
          ++evals;
          if (c.log_det < best.log_det) {
            best = std::move(c);
            cur = trial;
            improved = true;
          }
        }
      }
      if (!improved) step /= 2.0;
    }
  }

  ReachEllipsoid re;
  re.Pi = best.q;
  re.a = best.w[0];
  re.b1 = best.w[1];
  re.b2 = best.w[2];
  re.tau = es.tau;
  re.w_bar = es.w_bar;
  re.log_det = best.log_det;
  re.residual = (propagation_map(es, re.Pi, re.a, re.b1, re.b2) - re.Pi).norm() / re.Pi.norm();
  re.grid_resolution = opts.grid_resolution;
  if (!(re.residual < opts.tolerance)) {
    std::ostringstream msg;
    msg << "fixed-point residual " << re.residual << " exceeds " << opts.tolerance;
    throw SynthesisError(msg.str());
  }
  return re;
}

RandomBoundarySampler::RandomBoundarySampler(const Matrix& sigma_r, double tau)
    : factor_(sigma_r.llt().matrixL()), radius_(std::sqrt(tau)) {}

Vector RandomBoundarySampler::next(const Vector&, std::mt19937_64& engine) {
  Vector v(factor_.cols());
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal_(engine);
  } while (v.norm() == 0.0);
  return factor_ * (radius_ / v.norm() * v);
}

GreedyBoundarySampler::GreedyBoundarySampler(const Matrix& A, const Matrix& L,
                                             const Matrix& sigma_r, double tau, const Matrix& Pi)
    : A_(A), factor_(sigma_r.llt().matrixL()), radius_(std::sqrt(tau)) {
  gain_ = (Pi.llt().solve(L * factor_)).transpose();
  // With no linear preference, take the direction of largest quadratic growth.
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(gain_ * L * factor_));
  fallback_ = radius_ * es.eigenvectors().col(es.eigenvectors().cols() - 1);
}

Vector GreedyBoundarySampler::next(const Vector& e, std::mt19937_64&) {
  const Vector g = gain_ * (A_ * e);
  const double norm = g.norm();
  if (!(norm > 0.0)) return factor_ * fallback_;
  return factor_ * (-radius_ / norm * g);
}

double validate_containment(const ReachEllipsoid& re, const LtiModel& model,
                            const KalmanDesign& design, const DetectorConfig& detector,
                            AttackSampler& sampler, int trials, int horizon, std::uint64_t seed) {
  if (trials < 1) throw InvariantError("validate_containment needs at least one trial");
  if (horizon < 1) throw InvariantError("validate_containment needs a positive horizon");
  if (detector.dof != model.m()) throw DimensionError("detector dof must equal m");
  require_shape(re.Pi, model.n(), model.n(), "Pi");
  const auto pi_llt = re.Pi.llt();
  if (pi_llt.info() != Eigen::Success) throw NumericError("Pi is not positive definite");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal;
  const Matrix& wf = model.w_factor();
  long inside = 0;
  long total = 0;
  Vector e(model.n());
  Vector z(wf.cols());
  for (int t = 0; t < trials; ++t) {
    sampler.reset(engine);
    e.setZero();
    for (int k = 0; k < horizon; ++k) {
      const Vector r = sampler.next(e, engine);
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(engine);
      e = model.A() * e - design.L * r + wf * z;
      if (e.dot(pi_llt.solve(e)) <= 1.0) ++inside;
      ++total;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

}  // namespace ews
