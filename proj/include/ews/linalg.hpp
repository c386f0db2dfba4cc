#pragma once

// Small dense helpers shared by the synthesis and geometry code. Everything is
// templated on the scalar so the geometry can run in long double for oracles.

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ews/error.hpp"
#include "ews/types.hpp"

namespace ews {

template <typename Derived>
typename Derived::RealScalar spectral_radius(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  if (a.rows() == 0) return Real(0);
  Eigen::EigenSolver<MatrixX<Real>> solver(a.eval(), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue computation did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m,
                  typename Derived::RealScalar rel_tol = 1e-9) {
  if (m.rows() != m.cols()) return false;
  const auto scale = std::max(typename Derived::RealScalar(1), m.cwiseAbs().maxCoeff());
  return ((m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale);
}

template <typename Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived>& m) {
  if (!is_symmetric(m)) return false;
  Eigen::LLT<MatrixX<typename Derived::Scalar>> llt(m);
  return llt.info() == Eigen::Success;
}

template <typename Derived>
bool is_positive_semidefinite(const Eigen::MatrixBase<Derived>& m,
                              typename Derived::RealScalar tol = 1e-12) {
  using Real = typename Derived::RealScalar;
  if (!is_symmetric(m)) return false;
  if (m.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<MatrixX<Real>> es(m, Eigen::EigenvaluesOnly);
  const Real scale = std::max(Real(1), m.cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

/// log det of a symmetric positive definite matrix via its Cholesky factor.
template <typename Derived>
typename Derived::RealScalar log_det_pd(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  Eigen::LLT<MatrixX<Real>> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericError("matrix is not positive definite (Cholesky failed)");
  }
  const auto diag = llt.matrixLLT().diagonal();
  return Real(2) * diag.array().log().sum();
}

/// Square-root factor F with F F' = m for a PSD matrix; Cholesky when
/// possible, symmetric eigen-decomposition for singular inputs.
template <typename Derived>
MatrixX<typename Derived::RealScalar> psd_factor(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  Eigen::LLT<MatrixX<Real>> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<MatrixX<Real>> es(m);
  const VectorX<Real> roots = es.eigenvalues().cwiseMax(Real(0)).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal();
}

/// Popov-Belevitch-Hautus test: rank [lambda I - A, B] = n for every eigenvalue.
/// Numerically far better behaved than the Krylov matrix for larger n.
template <typename DerivedA, typename DerivedB>
bool pbh_controllable(const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b, double rel_tol = 1e-9) {
  using Complex = std::complex<double>;
  const Eigen::Index n = a.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Matrix> solver(a.template cast<double>(), false);
  if (solver.info() != Eigen::Success) return false;
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  MatrixX<Complex> test(n, n + b.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = solver.eigenvalues()(i);
    test.leftCols(n) = lambda * MatrixX<Complex>::Identity(n, n) - a.template cast<Complex>();
    test.rightCols(b.cols()) = b.template cast<Complex>();
    Eigen::JacobiSVD<MatrixX<Complex>> svd(test);
    if (svd.singularValues()(n - 1) <= rel_tol * scale) return false;
  }
  return true;
}

template <typename DerivedA, typename DerivedC>
bool pbh_observable(const Eigen::MatrixBase<DerivedA>& a,
                    const Eigen::MatrixBase<DerivedC>& c, double rel_tol = 1e-9) {
  return pbh_controllable(a.transpose(), c.transpose(), rel_tol);
}

/// Symmetric part, used to scrub round-off asymmetry after products.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

}  // namespace ews
