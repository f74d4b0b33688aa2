#pragma once

#include <functional>
#include <string_view>

#include "nnlr/linalg.hpp"
#include "nnlr/operators.hpp"

namespace nnlr {

enum class Variant { Symmetric, Asymmetric };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

/// Problem description for
///
///   symmetric:   min f(U) = 1/2 ||A(UU^T - U*U*^T)||^2           s.t. U >= 0
///   asymmetric:  min g([L;R]) + lambda h([L;R])                  s.t. L, R >= 0
///                g = 1/2 ||A(LR^T - L*R*^T)||^2,  h = 1/2 ||L^T L - R^T R||^2
///
/// Factors of the asymmetric variant are stacked as U = [L; R].
class Instance {
 public:
  static Instance symmetric(SensingOperator op, Matrix u_star, int r);
  static Instance asymmetric(SensingOperator op, Matrix l_star, Matrix r_star, int r,
                             double lambda);

  Variant variant() const { return variant_; }
  bool is_symmetric() const { return variant_ == Variant::Symmetric; }
  const SensingOperator& op() const { return op_; }
  int r() const { return r_; }
  double lambda() const { return lambda_; }

  /// Ground truth U* (symmetric only).
  const Matrix& u_star() const;
  const Matrix& l_star() const;
  const Matrix& r_star_factor() const;
  int true_rank() const;

  /// M* = U*U*^T or L*R*^T.
  const Matrix& target() const { return target_; }

  /// Row counts of L and R; both equal n for the symmetric variant.
  Index n1() const { return n1_; }
  Index n2() const { return n2_; }

  /// Rows of the stacked factor: n (symmetric) or n1 + n2 (asymmetric).
  Index stacked_rows() const { return variant_ == Variant::Symmetric ? n1_ : n1_ + n2_; }

  void require_point_shape(const Matrix& stacked) const;

 private:
  Instance() = default;

  Variant variant_ = Variant::Symmetric;
  SensingOperator op_;
  Matrix u_star_;
  Matrix l_star_;
  Matrix r_star_;
  Matrix target_;
  Index n1_ = 0;
  Index n2_ = 0;
  int r_ = 0;
  double lambda_ = 0.0;
};

/// Candidate factor point, held in stacked form.
class FactorPoint {
 public:
  static FactorPoint symmetric(Matrix u);
  static FactorPoint asymmetric(const Matrix& l, const Matrix& r);
  /// Interprets a stacked matrix according to the instance variant.
  static FactorPoint from_stacked(const Instance& inst, Matrix stacked);

  Variant variant() const { return variant_; }
  const Matrix& stacked() const { return stacked_; }
  const Matrix& u() const { return stacked_; }
  Index n1() const { return n1_; }
  auto l() const { return stacked_.topRows(n1_); }
  auto r() const { return stacked_.bottomRows(stacked_.rows() - n1_); }

 private:
  FactorPoint(Variant v, Matrix stacked, Index n1)
      : variant_(v), stacked_(std::move(stacked)), n1_(n1) {}

  Variant variant_;
  Matrix stacked_;
  Index n1_;
};

// Symmetric objective f.
double eval_f(const Instance& inst, const Matrix& u);
Matrix grad_f(const Instance& inst, const Matrix& u);
double hess_quad_f(const Instance& inst, const Matrix& u, const Matrix& du);
Matrix hess_vec_f(const Instance& inst, const Matrix& u, const Matrix& du);

// Asymmetric data-fit term g. Gradients and Hessian-vector products are stacked [d/dL; d/dR].
double eval_g(const Instance& inst, const Matrix& l, const Matrix& r);
Matrix grad_g(const Instance& inst, const Matrix& l, const Matrix& r);
/// <Hess g [dU1], dU2>, symmetric in its two directions.
double hess_cross_g(const Instance& inst, const Matrix& l, const Matrix& r, const Matrix& dl1,
                    const Matrix& dr1, const Matrix& dl2, const Matrix& dr2);
double hess_quad_g(const Instance& inst, const Matrix& l, const Matrix& r, const Matrix& dl,
                   const Matrix& dr);
Matrix hess_vec_g(const Instance& inst, const Matrix& l, const Matrix& r, const Matrix& dl,
                  const Matrix& dr);

// Balancing regularizer h = 1/2 ||L^T L - R^T R||^2.
double eval_h(const Matrix& l, const Matrix& r);
Matrix grad_h(const Matrix& l, const Matrix& r);
double hess_quad_h(const Matrix& l, const Matrix& r, const Matrix& dl, const Matrix& dr);
Matrix hess_vec_h(const Matrix& l, const Matrix& r, const Matrix& dl, const Matrix& dr);

// Variant-dispatching objective (f, or g + lambda h) over stacked points.
double eval_objective(const Instance& inst, const Matrix& stacked);
Matrix grad_objective(const Instance& inst, const Matrix& stacked);
double hess_quad_objective(const Instance& inst, const Matrix& stacked, const Matrix& direction);
Matrix hess_vec_objective(const Instance& inst, const Matrix& stacked, const Matrix& direction);

inline double eval_objective(const Instance& inst, const FactorPoint& p) {
  return eval_objective(inst, p.stacked());
}

/// Gram matrix of a point: UU^T (symmetric) or LR^T (asymmetric).
Matrix gram(const Instance& inst, const Matrix& stacked);

using ScalarFn = std::function<double(const Matrix&)>;
using GradientFn = std::function<Matrix(const Matrix&)>;

/// Worst entrywise relative error between an analytic gradient and central differences.
/// Entries where both values are at most 1e-8 in magnitude are skipped.
double fd_gradient_check(const ScalarFn& fn, const GradientFn& grad, const Matrix& point,
                         double step = 1e-5);

}  // namespace nnlr
