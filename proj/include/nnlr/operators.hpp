#pragma once

#include <optional>
#include <vector>

#include "nnlr/linalg.hpp"

namespace nnlr {

/// Parameters of the structured kernel H = A*A.
///
/// perm_cols lists the identity columns forming Q = [Q1 Q2]; the first r_star
/// columns are Q1 (ground-truth support), the remaining r are Q2.
struct KernelParams {
  int n = 0;
  int r = 0;
  int r_star = 0;
  double eps = 0.0;
  double alpha = 0.0;
  std::vector<int> perm_cols;

  bool operator==(const KernelParams&) const = default;
};

/// Upper end of the open interval of admissible alpha, (r/r* + 2 eps^2 r)^(-1/4).
double alpha_upper_bound(int r, int r_star, double eps);

/// Closed-form isometry constant alpha^2 sqrt(r/r* + 2 eps^2 r).
double rip_constant(int r, int r_star, double eps, double alpha);

/// Self-adjoint kernel operator
///
///   H(X) = X + Q C Q^T <B, Q^T X Q> + Q B Q^T <C, Q^T X Q>
///
/// with
///
///   B = [ 0            -eps 1 1^T ]      C = alpha^2 / r* [ I  0 ]
///       [ -eps 1 1^T    I_r       ]                        [ 0  0 ]
///
/// Stored by parameters; application costs O(n^2) and never forms the
/// n^2 x n^2 matrix.
class KernelOperator {
 public:
  /// Validates the parameters. An empty perm_cols selects the first r*+r columns.
  static KernelOperator build(int n, int r, int r_star, double eps, double alpha,
                              std::vector<int> perm_cols = {});
  static KernelOperator build(const KernelParams& params);

  const KernelParams& params() const { return params_; }
  int n() const { return params_.n; }
  int r() const { return params_.r; }
  int r_star() const { return params_.r_star; }
  double eps() const { return params_.eps; }
  double alpha() const { return params_.alpha; }
  const std::vector<int>& perm_cols() const { return params_.perm_cols; }

  Matrix apply(const Matrix& x) const;

  double rip_constant() const;

  /// {1 + delta, 1 - delta, 1 (n^2 - 2 times)}, sorted descending.
  std::vector<double> eigenvalues() const;

  /// (r*+r) x (r*+r) blocks B and C.
  const Matrix& block_b() const { return b_; }
  const Matrix& block_c() const { return c_; }

  /// Q B Q^T and Q C Q^T as n x n matrices.
  Matrix embedded_b() const;
  Matrix embedded_c() const;

  /// Columns of I_n selected as Q1 (n x r*) and Q2 (n x r).
  Matrix q1() const;
  Matrix q2() const;

  /// Dense matrix of vec(X) -> vec(H(X)) under column-major vec. Debug path, n <= 8.
  Matrix dense_vec_form() const;

  /// Eigenvalues of dense_vec_form() from a symmetric eigensolver, sorted descending.
  std::vector<double> dense_eigenvalues() const;

  // Submatrix Q^T X Q and its scatter-add counterpart.
  Matrix gather(const Matrix& x) const;
  void scatter_add(Matrix& y, const Matrix& block, double scale) const;

 private:
  KernelOperator(KernelParams params, Matrix b, Matrix c);

  KernelParams params_;
  Matrix b_;
  Matrix c_;
};

/// Explicit square realization A with A*A = H:
///
///   vec(A(X)) = [I + (b + gamma c) c^T] vec(X),   b = vec(QBQ^T), c = vec(QCQ^T)
///
/// gamma = (-1 + sqrt(1 - delta^2)) / ||c||^2. Requires delta < 1.
class MeasurementMap {
 public:
  static MeasurementMap build(const KernelOperator& kernel);

  const KernelOperator& kernel() const { return kernel_; }
  double gamma() const { return gamma_; }

  Matrix apply(const Matrix& x) const;
  Matrix adjoint(const Matrix& y) const;

  /// A*A(X), evaluated through the kernel's structured form.
  Matrix compose_adjoint(const Matrix& x) const { return kernel_.apply(x); }

 private:
  MeasurementMap(KernelOperator kernel, double gamma);

  KernelOperator kernel_;
  double gamma_;
};

/// Measurement operator used by an instance: either the identity (delta = 0)
/// or the structured realization. Immutable and thread-safe.
class SensingOperator {
 public:
  SensingOperator() = default;
  explicit SensingOperator(MeasurementMap map) : map_(std::move(map)) {}

  static SensingOperator identity() { return SensingOperator(); }

  bool is_identity() const { return !map_.has_value(); }
  const MeasurementMap& map() const;

  Matrix apply(const Matrix& x) const;
  Matrix adjoint(const Matrix& y) const;
  Matrix kernel(const Matrix& x) const;

  /// ||A(X)||^2 without materializing more than one temporary.
  double squared_norm(const Matrix& x) const;

  double rip_constant() const;

  /// Side length of the square domain for the structured case; nullopt for identity.
  std::optional<int> domain_size() const;

 private:
  std::optional<MeasurementMap> map_;
};

}  // namespace nnlr
