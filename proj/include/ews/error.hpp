#pragma once

#include <stdexcept>
#include <string>

#include "ews/types.hpp"

namespace ews {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition failed (non-finite data, lost definiteness, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A model or configuration violates one of its construction invariants.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Offline synthesis (Riccati, invariant ellipsoid) could not produce a result.
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the closed-loop simulation, tagged with the step index.
class SimulationError : public Error {
 public:
  SimulationError(Step step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  Step step() const { return step_; }

 private:
  Step step_;
};

inline std::string shape_of(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename Derived>
void require_shape(const Eigen::MatrixBase<Derived>& m, Eigen::Index rows,
                   Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " must be " + shape_of(rows, cols) +
                         ", got " + shape_of(m.rows(), m.cols()));
  }
}

template <typename Derived>
void require_size(const Eigen::MatrixBase<Derived>& v, Eigen::Index size,
                  const char* name) {
  if (v.size() != size) {
    throw DimensionError(std::string(name) + " must have " + std::to_string(size) +
                         " entries, got " + std::to_string(v.size()));
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* name) {
  if (!m.allFinite()) {
    throw NumericError(std::string(name) + " contains non-finite entries");
  }
}

}  // namespace ews
