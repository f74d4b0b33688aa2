#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nnlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Frobenius inner product <A, B> = tr(A^T B).
inline double inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

inline double min_entry(const Matrix& a) { return a.size() == 0 ? 0.0 : a.minCoeff(); }

/// Entrywise projection onto the nonnegative orthant.
inline Matrix clamp_nonneg(const Matrix& a) { return a.cwiseMax(0.0); }

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when serialized data does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a critical cone contains only the zero direction.
class EmptyConeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_shape(const Matrix& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidArgument(std::string(name) + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + shape_str(m));
  }
}

}  // namespace detail

}  // namespace nnlr
