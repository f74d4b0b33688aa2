#include "nnlr/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nnlr {

std::string_view to_string(Variant v) {
  return v == Variant::Symmetric ? "symmetric" : "asymmetric";
}

Variant variant_from_string(std::string_view s) {
  if (s == "symmetric") return Variant::Symmetric;
  if (s == "asymmetric") return Variant::Asymmetric;
  throw InvalidArgument("unknown variant '" + std::string(s) + "'");
}

namespace {

void require_ground_truth(const Matrix& m, const char* name) {
  detail::require(m.rows() >= 1, std::string(name) + " must have at least one row");
  detail::require(all_finite(m), std::string(name) + " has non-finite entries");
  detail::require(m.size() == 0 || m.minCoeff() >= 0.0,
                  std::string(name) + " must be entrywise nonnegative");
}

void require_domain(const SensingOperator& op, Index rows, Index cols) {
  if (auto n = op.domain_size()) {
    detail::require(rows == *n && cols == *n,
                    "structured operator acts on " + std::to_string(*n) + "x" + std::to_string(*n) +
                        " matrices, instance needs " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  }
}

}  // namespace

Instance Instance::symmetric(SensingOperator op, Matrix u_star, int r) {
  require_ground_truth(u_star, "U_star");
  detail::require(r >= 1, "search rank r must be >= 1");
  require_domain(op, u_star.rows(), u_star.rows());
  Instance inst;
  inst.variant_ = Variant::Symmetric;
  inst.op_ = std::move(op);
  inst.target_ = u_star * u_star.transpose();
  inst.n1_ = inst.n2_ = u_star.rows();
  inst.u_star_ = std::move(u_star);
  inst.r_ = r;
  return inst;
}

Instance Instance::asymmetric(SensingOperator op, Matrix l_star, Matrix r_star, int r,
                              double lambda) {
  require_ground_truth(l_star, "L_star");
  require_ground_truth(r_star, "R_star");
  detail::require(l_star.cols() == r_star.cols(), "L_star and R_star must have equal column counts");
  detail::require(r >= 1, "search rank r must be >= 1");
  detail::require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
  require_domain(op, l_star.rows(), r_star.rows());
  Instance inst;
  inst.variant_ = Variant::Asymmetric;
  inst.op_ = std::move(op);
  inst.target_ = l_star * r_star.transpose();
  inst.n1_ = l_star.rows();
  inst.n2_ = r_star.rows();
  inst.l_star_ = std::move(l_star);
  inst.r_star_ = std::move(r_star);
  inst.r_ = r;
  inst.lambda_ = lambda;
  return inst;
}

const Matrix& Instance::u_star() const {
  detail::require(is_symmetric(), "U_star requested on an asymmetric instance");
  return u_star_;
}

const Matrix& Instance::l_star() const {
  detail::require(!is_symmetric(), "L_star requested on a symmetric instance");
  return l_star_;
}

const Matrix& Instance::r_star_factor() const {
  detail::require(!is_symmetric(), "R_star requested on a symmetric instance");
  return r_star_;
}

int Instance::true_rank() const {
  return static_cast<int>(is_symmetric() ? u_star_.cols() : l_star_.cols());
}

void Instance::require_point_shape(const Matrix& stacked) const {
  detail::require_shape(stacked, stacked_rows(), r_, "factor point");
}

FactorPoint FactorPoint::symmetric(Matrix u) {
  const Index n = u.rows();
  return FactorPoint(Variant::Symmetric, std::move(u), n);
}

FactorPoint FactorPoint::asymmetric(const Matrix& l, const Matrix& r) {
  detail::require(l.cols() == r.cols(), "L and R must have equal column counts");
  Matrix stacked(l.rows() + r.rows(), l.cols());
  stacked << l, r;
  return FactorPoint(Variant::Asymmetric, std::move(stacked), l.rows());
}

FactorPoint FactorPoint::from_stacked(const Instance& inst, Matrix stacked) {
  inst.require_point_shape(stacked);
  return FactorPoint(inst.variant(), std::move(stacked), inst.n1());
}

// ---------------------------------------------------------------------------
// f

namespace {

void require_symmetric(const Instance& inst) {
  detail::require(inst.is_symmetric(), "operation requires a symmetric instance");
}

void require_asymmetric(const Instance& inst) {
  detail::require(!inst.is_symmetric(), "operation requires an asymmetric instance");
}

Matrix residual_sym(const Instance& inst, const Matrix& u) {
  detail::require_shape(u, inst.n1(), inst.r(), "U");
  Matrix e = u * u.transpose();
  e -= inst.target();
  return e;
}

}  // namespace

double eval_f(const Instance& inst, const Matrix& u) {
  require_symmetric(inst);
  return 0.5 * inst.op().squared_norm(residual_sym(inst, u));
}

Matrix grad_f(const Instance& inst, const Matrix& u) {
  require_symmetric(inst);
  const Matrix s = inst.op().kernel(residual_sym(inst, u));
  return (s + s.transpose()) * u;
}

double hess_quad_f(const Instance& inst, const Matrix& u, const Matrix& du) {
  require_symmetric(inst);
  detail::require_shape(du, u.rows(), u.cols(), "dU");
  const Matrix s = inst.op().kernel(residual_sym(inst, u));
  const Matrix w = u * du.transpose() + du * u.transpose();
  return 2.0 * inner(s, du * du.transpose()) + inst.op().squared_norm(w);
}

Matrix hess_vec_f(const Instance& inst, const Matrix& u, const Matrix& du) {
  require_symmetric(inst);
  detail::require_shape(du, u.rows(), u.cols(), "dU");
  const Matrix s = inst.op().kernel(residual_sym(inst, u));
  const Matrix p = inst.op().kernel(u * du.transpose() + du * u.transpose());
  return (s + s.transpose()) * du + (p + p.transpose()) * u;
}

// ---------------------------------------------------------------------------
// g

namespace {

Matrix residual_asym(const Instance& inst, const Matrix& l, const Matrix& r) {
  detail::require_shape(l, inst.n1(), inst.r(), "L");
  detail::require_shape(r, inst.n2(), inst.r(), "R");
  Matrix e = l * r.transpose();
  e -= inst.target();
  return e;
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

double eval_g(const Instance& inst, const Matrix& l, const Matrix& r) {
  require_asymmetric(inst);
  return 0.5 * inst.op().squared_norm(residual_asym(inst, l, r));
}

Matrix grad_g(const Instance& inst, const Matrix& l, const Matrix& r) {
  require_asymmetric(inst);
  const Matrix s = inst.op().kernel(residual_asym(inst, l, r));
  return stack(s * r, s.transpose() * l);
}

double hess_cross_g(const Instance& inst, const Matrix& l, const Matrix& r, const Matrix& dl1,
                    const Matrix& dr1, const Matrix& dl2, const Matrix& dr2) {
  require_asymmetric(inst);
  for (const Matrix* d : {&dl1, &dl2}) detail::require_shape(*d, l.rows(), l.cols(), "dL");
  for (const Matrix* d : {&dr1, &dr2}) detail::require_shape(*d, r.rows(), r.cols(), "dR");
  const Matrix s = inst.op().kernel(residual_asym(inst, l, r));
  const Matrix w1 = l * dr1.transpose() + dl1 * r.transpose();
  const Matrix w2 = l * dr2.transpose() + dl2 * r.transpose();
  const double curvature = inner(s, dl1 * dr2.transpose() + dl2 * dr1.transpose());
  if (inst.op().is_identity()) return curvature + inner(w1, w2);
  return curvature + inner(inst.op().apply(w1), inst.op().apply(w2));
}

double hess_quad_g(const Instance& inst, const Matrix& l, const Matrix& r, const Matrix& dl,
                   const Matrix& dr) {
  return hess_cross_g(inst, l, r, dl, dr, dl, dr);
}

Matrix hess_vec_g(const Instance& inst, const Matrix& l, const Matrix& r, const Matrix& dl,
                  const Matrix& dr) {
  require_asymmetric(inst);
  detail::require_shape(dl, l.rows(), l.cols(), "dL");
  detail::require_shape(dr, r.rows(), r.cols(), "dR");
  const Matrix s = inst.op().kernel(residual_asym(inst, l, r));
  const Matrix sp = inst.op().kernel(dl * r.transpose() + l * dr.transpose());
  return stack(sp * r + s * dr, sp.transpose() * l + s.transpose() * dl);
}

// ---------------------------------------------------------------------------
// h

namespace {

Matrix imbalance(const Matrix& l, const Matrix& r) {
  detail::require(l.cols() == r.cols(), "L and R must have equal column counts");
  return l.transpose() * l - r.transpose() * r;
}

}  // namespace

double eval_h(const Matrix& l, const Matrix& r) { return 0.5 * imbalance(l, r).squaredNorm(); }

Matrix grad_h(const Matrix& l, const Matrix& r) {
  const Matrix d = imbalance(l, r);
  return stack(2.0 * l * d, -2.0 * r * d);
}

double hess_quad_h(const Matrix& l, const Matrix& r, const Matrix& dl, const Matrix& dr) {
  detail::require_shape(dl, l.rows(), l.cols(), "dL");
  detail::require_shape(dr, r.rows(), r.cols(), "dR");
  const Matrix d = imbalance(l, r);
  const Matrix k = l.transpose() * dl - r.transpose() * dr;
  const Matrix ksym = k + k.transpose();
  return 2.0 * inner(d, dl.transpose() * dl - dr.transpose() * dr) + ksym.squaredNorm();
}

Matrix hess_vec_h(const Matrix& l, const Matrix& r, const Matrix& dl, const Matrix& dr) {
  detail::require_shape(dl, l.rows(), l.cols(), "dL");
  detail::require_shape(dr, r.rows(), r.cols(), "dR");
  const Matrix d = imbalance(l, r);
  const Matrix k = l.transpose() * dl - r.transpose() * dr;
  const Matrix dd = k + k.transpose();
  return stack(2.0 * (dl * d + l * dd), -2.0 * (dr * d + r * dd));
}

// ---------------------------------------------------------------------------
// dispatch

double eval_objective(const Instance& inst, const Matrix& x) {
  inst.require_point_shape(x);
  if (inst.is_symmetric()) return eval_f(inst, x);
  const auto l = x.topRows(inst.n1());
  const auto r = x.bottomRows(inst.n2());
  double value = eval_g(inst, l, r);
  if (inst.lambda() != 0.0) value += inst.lambda() * eval_h(l, r);
  return value;
}

Matrix grad_objective(const Instance& inst, const Matrix& x) {
  inst.require_point_shape(x);
  if (inst.is_symmetric()) return grad_f(inst, x);
  const Matrix l = x.topRows(inst.n1());
  const Matrix r = x.bottomRows(inst.n2());
  Matrix g = grad_g(inst, l, r);
  if (inst.lambda() != 0.0) g += inst.lambda() * grad_h(l, r);
  return g;
}

double hess_quad_objective(const Instance& inst, const Matrix& x, const Matrix& d) {
  inst.require_point_shape(x);
  inst.require_point_shape(d);
  if (inst.is_symmetric()) return hess_quad_f(inst, x, d);
  const Matrix l = x.topRows(inst.n1()), r = x.bottomRows(inst.n2());
  const Matrix dl = d.topRows(inst.n1()), dr = d.bottomRows(inst.n2());
  double value = hess_quad_g(inst, l, r, dl, dr);
  if (inst.lambda() != 0.0) value += inst.lambda() * hess_quad_h(l, r, dl, dr);
  return value;
}

Matrix hess_vec_objective(const Instance& inst, const Matrix& x, const Matrix& d) {
  inst.require_point_shape(x);
  inst.require_point_shape(d);
  if (inst.is_symmetric()) return hess_vec_f(inst, x, d);
  const Matrix l = x.topRows(inst.n1()), r = x.bottomRows(inst.n2());
  const Matrix dl = d.topRows(inst.n1()), dr = d.bottomRows(inst.n2());
  Matrix hv = hess_vec_g(inst, l, r, dl, dr);
  if (inst.lambda() != 0.0) hv += inst.lambda() * hess_vec_h(l, r, dl, dr);
  return hv;
}

Matrix gram(const Instance& inst, const Matrix& x) {
  inst.require_point_shape(x);
  if (inst.is_symmetric()) return x * x.transpose();
  return x.topRows(inst.n1()) * x.bottomRows(inst.n2()).transpose();
}

double fd_gradient_check(const ScalarFn& fn, const GradientFn& grad, const Matrix& point,
                         double step) {
  detail::require(step > 0.0, "finite-difference step must be positive");
  constexpr double kFloor = 1e-8;
  const Matrix analytic = grad(point);
  detail::require_shape(analytic, point.rows(), point.cols(), "gradient");
  Matrix probe = point;
  double worst = 0.0;
  for (Index j = 0; j < point.cols(); ++j) {
    for (Index i = 0; i < point.rows(); ++i) {
      const double x0 = probe(i, j);
      probe(i, j) = x0 + step;
      const double up = fn(probe);
      probe(i, j) = x0 - step;
      const double down = fn(probe);
      probe(i, j) = x0;
      const double numeric = (up - down) / (2.0 * step);
      const double scale = std::max(std::abs(numeric), std::abs(analytic(i, j)));
      if (scale <= kFloor) continue;
      worst = std::max(worst, std::abs(numeric - analytic(i, j)) / std::max(scale, kFloor));
    }
  }
  return worst;
}

}  // namespace nnlr
