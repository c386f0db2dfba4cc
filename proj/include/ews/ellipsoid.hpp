#pragma once

// Ellipsoid primitives used by the online emptiness checks.
//
// An ellipsoid E(q, Q) is the set {x : (x - q)' Q^{-1} (x - q) <= 1} with Q
// symmetric positive definite. A half-space H(c, b) is {x : c'x >= b}; in this
// library half-spaces describe *unsafe* operation, so "intersecting" means the
// ellipsoid reaches into the unsafe side.
//
// All routines are templated on the scalar type and accept Eigen expressions.
// Determinants are taken from Cholesky log-determinants; no explicit inverse
// is formed.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "ews/error.hpp"
#include "ews/linalg.hpp"
#include "ews/types.hpp"

namespace ews {

template <typename Scalar>
struct HalfSpace {
  VectorX<Scalar> normal;  // c
  Scalar bound{0};         // b
  std::string label;

  int dim() const { return static_cast<int>(normal.size()); }

  /// True when x lies in the closed half-space c'x >= b.
  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return normal.dot(x) >= bound;
  }
};

template <typename Scalar>
class Ellipsoid {
 public:
  Ellipsoid() = default;

  /// Validates that the shape is square, symmetric, positive definite and
  /// matches the center dimension.
  Ellipsoid(VectorX<Scalar> center, MatrixX<Scalar> shape)
      : center_(std::move(center)), shape_(std::move(shape)) {
    require_shape(shape_, center_.size(), center_.size(), "ellipsoid shape");
    require_finite(center_, "ellipsoid center");
    require_finite(shape_, "ellipsoid shape");
    if (!is_positive_definite(shape_)) {
      throw NumericError("ellipsoid shape is not symmetric positive definite");
    }
  }

  /// Skips validation; used for the touching-cut degenerate result and in hot
  /// paths where the shape is already known to be valid.
  static Ellipsoid unchecked(VectorX<Scalar> center, MatrixX<Scalar> shape) {
    Ellipsoid e;
    e.center_ = std::move(center);
    e.shape_ = std::move(shape);
    return e;
  }

  const VectorX<Scalar>& center() const { return center_; }
  const MatrixX<Scalar>& shape() const { return shape_; }
  int dim() const { return static_cast<int>(center_.size()); }

  /// (x - q)' Q^{-1} (x - q)
  template <typename Derived>
  Scalar quadratic_form(const Eigen::MatrixBase<Derived>& x) const {
    const VectorX<Scalar> d = x - center_;
    return d.dot(shape_.llt().solve(d));
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x, Scalar tol = Scalar(0)) const {
    return quadratic_form(x) <= Scalar(1) + tol;
  }

  template <typename Derived>
  Ellipsoid translated(const Eigen::MatrixBase<Derived>& t) const {
    return unchecked(center_ + t, shape_);
  }

 private:
  VectorX<Scalar> center_;
  MatrixX<Scalar> shape_;
};

enum class CutKind { Disjoint, Contained, Cut };

template <typename Scalar>
struct CutResult {
  CutKind kind{CutKind::Disjoint};
  Ellipsoid<Scalar> ellipsoid;  // unused for Disjoint
  Scalar alpha{0};
};

/// log of the volume of the unit n-ball, pi^{n/2} / Gamma(n/2 + 1).
template <typename Scalar>
Scalar unit_ball_log_volume(int n) {
  using std::lgamma;
  using std::log;
  const Scalar half_n = Scalar(n) / Scalar(2);
  return half_n * log(std::numbers::pi_v<Scalar>) - lgamma(half_n + Scalar(1));
}

/// max over x in e of c'x.
template <typename Scalar, typename Derived>
Scalar support(const Ellipsoid<Scalar>& e, const Eigen::MatrixBase<Derived>& c) {
  require_size(c, e.dim(), "support direction");
  if (c.isZero(0)) throw DimensionError("support direction must be non-zero");
  using std::sqrt;
  return c.dot(e.center()) + sqrt(c.dot(e.shape() * c));
}

/// Signed distance from the ellipsoid to the unsafe half-space c'x >= b,
/// normalised by |c|. Negative or zero means the two sets meet.
template <typename Scalar>
Scalar signed_distance(const Ellipsoid<Scalar>& e, const HalfSpace<Scalar>& h) {
  require_size(h.normal, e.dim(), "half-space normal");
  if (h.normal.isZero(0)) throw DimensionError("half-space normal must be non-zero");
  return (h.bound - support(e, h.normal)) / h.normal.norm();
}

/// Depth of the cut: alpha = (b - c'q) / sqrt(c'Qc). alpha > 1 is disjoint,
/// alpha <= -1/n leaves the minimum-volume ellipsoid unchanged.
template <typename Scalar>
Scalar cut_depth(const Ellipsoid<Scalar>& e, const HalfSpace<Scalar>& h) {
  using std::sqrt;
  return (h.bound - h.normal.dot(e.center())) / sqrt(h.normal.dot(e.shape() * h.normal));
}

/// log(det Q+ / det Q) for a deep cut of depth alpha in dimension n >= 2,
/// i.e. n log(delta) + log(1 - sigma). Returns -inf for a touching cut.
template <typename Scalar>
Scalar cut_log_det_ratio(Scalar alpha, int n) {
  using std::log;
  if (n == 1) {
    // Interval [max(q - r, boundary), q + r]: half-length ratio (1 - alpha)/2.
    if (alpha <= Scalar(-1)) return Scalar(0);
    return Scalar(2) * log((Scalar(1) - alpha) / Scalar(2));
  }
  if (alpha <= Scalar(-1) / Scalar(n)) return Scalar(0);
  const Scalar nn = Scalar(n);
  const Scalar delta = nn * nn / (nn * nn - Scalar(1)) * (Scalar(1) - alpha * alpha);
  const Scalar sigma = Scalar(2) * (Scalar(1) + nn * alpha) / ((nn + Scalar(1)) * (Scalar(1) + alpha));
  return nn * log(delta) + log(Scalar(1) - sigma);
}

/// Volume ratio vol(cut MVE) / vol(E) as a closed form in the cut depth.
template <typename Scalar>
Scalar cut_volume_ratio(Scalar alpha, int n) {
  using std::exp;
  if (alpha > Scalar(1)) return Scalar(0);
  return exp(cut_log_det_ratio(alpha, n) / Scalar(2));
}

/// Minimum-volume ellipsoid covering e ∩ {c'x >= b} (deep-cut Löwner-John).
template <typename Scalar>
CutResult<Scalar> cut_mve(const Ellipsoid<Scalar>& e, const HalfSpace<Scalar>& h) {
  using std::sqrt;
  require_size(h.normal, e.dim(), "half-space normal");
  if (h.normal.isZero(0)) throw DimensionError("half-space normal must be non-zero");
  const int n = e.dim();
  const VectorX<Scalar> qc = e.shape() * h.normal;
  const Scalar width = sqrt(h.normal.dot(qc));
  const Scalar alpha = (h.bound - h.normal.dot(e.center())) / width;

  CutResult<Scalar> out;
  out.alpha = alpha;
  if (alpha > Scalar(1)) {
    out.kind = CutKind::Disjoint;
    return out;
  }
  if (n == 1) {
    if (alpha <= Scalar(-1)) {
      out.kind = CutKind::Contained;
      out.ellipsoid = e;
      return out;
    }
    // 1-D: the intersection is an interval and is its own MVE.
    const Scalar q = e.center()(0);
    const Scalar r = sqrt(e.shape()(0, 0));
    const Scalar cut_point = h.bound / h.normal(0);
    Scalar lo = q - r;
    Scalar hi = q + r;
    if (h.normal(0) > Scalar(0)) {
      lo = std::max(lo, cut_point);
    } else {
      hi = std::min(hi, cut_point);
    }
    const Scalar half = (hi - lo) / Scalar(2);
    out.kind = CutKind::Cut;
    out.ellipsoid = Ellipsoid<Scalar>::unchecked(VectorX<Scalar>::Constant(1, (lo + hi) / Scalar(2)),
                                                 MatrixX<Scalar>::Constant(1, 1, half * half));
    return out;
  }
  if (alpha <= Scalar(-1) / Scalar(n)) {
    out.kind = CutKind::Contained;
    out.ellipsoid = e;
    return out;
  }

  const Scalar nn = Scalar(n);
  const VectorX<Scalar> dir = qc / width;  // Q c / sqrt(c'Qc)
  const Scalar step = (Scalar(1) + nn * alpha) / (nn + Scalar(1));
  const Scalar sigma = Scalar(2) * (Scalar(1) + nn * alpha) / ((nn + Scalar(1)) * (Scalar(1) + alpha));
  const Scalar delta = nn * nn / (nn * nn - Scalar(1)) * (Scalar(1) - alpha * alpha);

  VectorX<Scalar> center = e.center() + step * dir;
  MatrixX<Scalar> shape = symmetrized(delta * (e.shape() - sigma * dir * dir.transpose()));
  out.kind = CutKind::Cut;
  if (alpha == Scalar(1)) {
    // Touching: the intersection is the single support point.
    out.ellipsoid = Ellipsoid<Scalar>::unchecked(std::move(center), std::move(shape));
    return out;
  }
  Eigen::LLT<MatrixX<Scalar>> llt(shape);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(e.shape(), Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "cut ellipsoid lost positive definiteness (alpha=" << alpha
        << ", cond(Q)=" << es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() << ")";
    throw NumericError(msg.str());
  }
  out.ellipsoid = Ellipsoid<Scalar>::unchecked(std::move(center), std::move(shape));
  return out;
}

template <typename Scalar>
Scalar log_volume(const Ellipsoid<Scalar>& e) {
  return unit_ball_log_volume<Scalar>(e.dim()) + log_det_pd(e.shape()) / Scalar(2);
}

template <typename Scalar>
Scalar volume(const Ellipsoid<Scalar>& e) {
  using std::exp;
  return exp(log_volume(e));
}

/// sqrt(det inner / det outer); the unit-ball constant cancels.
template <typename DerivedI, typename DerivedO>
typename DerivedI::RealScalar volume_ratio(const Eigen::MatrixBase<DerivedI>& inner,
                                           const Eigen::MatrixBase<DerivedO>& outer) {
  using Real = typename DerivedI::RealScalar;
  using std::exp;
  if (inner.rows() != outer.rows()) {
    throw DimensionError("volume_ratio operands differ in dimension");
  }
  return exp((log_det_pd(inner) - log_det_pd(outer)) / Real(2));
}

}  // namespace ews
