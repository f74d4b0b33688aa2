#include "nnlr/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>

namespace nnlr {

double alpha_upper_bound(int r, int r_star, double eps) {
  const double ratio = static_cast<double>(r) / r_star + 2.0 * eps * eps * r;
  return std::pow(ratio, -0.25);
}

double rip_constant(int r, int r_star, double eps, double alpha) {
  const double ratio = static_cast<double>(r) / r_star + 2.0 * eps * eps * r;
  return alpha * alpha * std::sqrt(ratio);
}

KernelOperator::KernelOperator(KernelParams params, Matrix b, Matrix c)
    : params_(std::move(params)), b_(std::move(b)), c_(std::move(c)) {}

KernelOperator KernelOperator::build(int n, int r, int r_star, double eps, double alpha,
                                     std::vector<int> perm_cols) {
  using detail::require;
  require(r_star >= 1, "kernel: r_star must be >= 1");
  require(r >= r_star, "kernel: r must be >= r_star");
  require(r + r_star <= n, "kernel: r + r_star = " + std::to_string(r + r_star) +
                               " exceeds n = " + std::to_string(n));
  require(std::isfinite(eps) && eps > 0.0, "kernel: eps must be positive");
  require(std::isfinite(alpha) && alpha > 0.0, "kernel: alpha must be positive");

  const int k = r_star + r;
  if (perm_cols.empty()) {
    perm_cols.resize(k);
    for (int i = 0; i < k; ++i) perm_cols[i] = i;
  }
  require(static_cast<int>(perm_cols.size()) == k,
          "kernel: perm_cols must list r_star + r = " + std::to_string(k) + " columns");
  std::set<int> seen;
  for (int col : perm_cols) {
    require(col >= 0 && col < n, "kernel: perm_cols entry " + std::to_string(col) +
                                     " outside [0, " + std::to_string(n) + ")");
    require(seen.insert(col).second, "kernel: duplicate perm_cols entry " + std::to_string(col));
  }

  Matrix b = Matrix::Zero(k, k);
  b.topRightCorner(r_star, r).setConstant(-eps);
  b.bottomLeftCorner(r, r_star).setConstant(-eps);
  b.bottomRightCorner(r, r).setIdentity();

  Matrix c = Matrix::Zero(k, k);
  c.topLeftCorner(r_star, r_star).diagonal().setConstant(alpha * alpha / r_star);

  return KernelOperator(KernelParams{n, r, r_star, eps, alpha, std::move(perm_cols)}, std::move(b),
                        std::move(c));
}

KernelOperator KernelOperator::build(const KernelParams& p) {
  return build(p.n, p.r, p.r_star, p.eps, p.alpha, p.perm_cols);
}

Matrix KernelOperator::gather(const Matrix& x) const {
  const auto& p = params_.perm_cols;
  const Index k = static_cast<Index>(p.size());
  Matrix block(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) block(i, j) = x(p[i], p[j]);
  return block;
}

void KernelOperator::scatter_add(Matrix& y, const Matrix& block, double scale) const {
  const auto& p = params_.perm_cols;
  const Index k = static_cast<Index>(p.size());
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) y(p[i], p[j]) += scale * block(i, j);
}

Matrix KernelOperator::apply(const Matrix& x) const {
  detail::require_shape(x, n(), n(), "kernel apply");
  const Matrix xp = gather(x);
  const double along_b = inner(b_, xp);
  const double along_c = inner(c_, xp);
  Matrix y = x;
  scatter_add(y, c_, along_b);
  scatter_add(y, b_, along_c);
  return y;
}

double KernelOperator::rip_constant() const {
  return nnlr::rip_constant(r(), r_star(), eps(), alpha());
}

std::vector<double> KernelOperator::eigenvalues() const {
  const double delta = rip_constant();
  std::vector<double> eig(static_cast<std::size_t>(n()) * n(), 1.0);
  eig[0] = 1.0 + delta;
  eig.back() = 1.0 - delta;
  return eig;
}

Matrix KernelOperator::embedded_b() const {
  Matrix out = Matrix::Zero(n(), n());
  scatter_add(out, b_, 1.0);
  return out;
}

Matrix KernelOperator::embedded_c() const {
  Matrix out = Matrix::Zero(n(), n());
  scatter_add(out, c_, 1.0);
  return out;
}

Matrix KernelOperator::q1() const {
  Matrix q = Matrix::Zero(n(), r_star());
  for (int j = 0; j < r_star(); ++j) q(params_.perm_cols[j], j) = 1.0;
  return q;
}

Matrix KernelOperator::q2() const {
  Matrix q = Matrix::Zero(n(), r());
  for (int j = 0; j < r(); ++j) q(params_.perm_cols[r_star() + j], j) = 1.0;
  return q;
}

Matrix KernelOperator::dense_vec_form() const {
  detail::require(n() <= 8, "dense_vec_form is limited to n <= 8");
  const Index nn = static_cast<Index>(n()) * n();
  Matrix dense(nn, nn);
  Matrix unit = Matrix::Zero(n(), n());
  for (Index col = 0; col < nn; ++col) {
    unit(col % n(), col / n()) = 1.0;
    const Matrix image = apply(unit);
    dense.col(col) = image.reshaped();
    unit(col % n(), col / n()) = 0.0;
  }
  return dense;
}

std::vector<double> KernelOperator::dense_eigenvalues() const {
  const Matrix dense = dense_vec_form();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense, Eigen::EigenvaluesOnly);
  std::vector<double> eig(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

MeasurementMap::MeasurementMap(KernelOperator kernel, double gamma)
    : kernel_(std::move(kernel)), gamma_(gamma) {}

MeasurementMap MeasurementMap::build(const KernelOperator& kernel) {
  const double delta = kernel.rip_constant();
  detail::require(delta < 1.0, "realization requires delta < 1, got delta = " +
                                   std::to_string(delta));
  const double a2 = kernel.alpha() * kernel.alpha();
  const double c_norm2 = a2 * a2 / kernel.r_star();
  // -1 + sqrt(1 - d^2) rewritten without cancellation.
  const double root = std::sqrt(1.0 - delta * delta);
  const double gamma = -(delta * delta) / (1.0 + root) / c_norm2;
  return MeasurementMap(kernel, gamma);
}

Matrix MeasurementMap::apply(const Matrix& x) const {
  detail::require_shape(x, kernel_.n(), kernel_.n(), "measurement apply");
  const double t = inner(kernel_.block_c(), kernel_.gather(x));
  Matrix y = x;
  kernel_.scatter_add(y, kernel_.block_b() + gamma_ * kernel_.block_c(), t);
  return y;
}

Matrix MeasurementMap::adjoint(const Matrix& y) const {
  detail::require_shape(y, kernel_.n(), kernel_.n(), "measurement adjoint");
  const double s = inner(kernel_.block_b() + gamma_ * kernel_.block_c(), kernel_.gather(y));
  Matrix x = y;
  kernel_.scatter_add(x, kernel_.block_c(), s);
  return x;
}

const MeasurementMap& SensingOperator::map() const {
  if (!map_) throw InvalidArgument("identity operator has no structured map");
  return *map_;
}

Matrix SensingOperator::apply(const Matrix& x) const { return map_ ? map_->apply(x) : x; }

Matrix SensingOperator::adjoint(const Matrix& y) const { return map_ ? map_->adjoint(y) : y; }

Matrix SensingOperator::kernel(const Matrix& x) const {
  return map_ ? map_->compose_adjoint(x) : x;
}

double SensingOperator::squared_norm(const Matrix& x) const {
  return map_ ? map_->apply(x).squaredNorm() : x.squaredNorm();
}

double SensingOperator::rip_constant() const {
  return map_ ? map_->kernel().rip_constant() : 0.0;
}

std::optional<int> SensingOperator::domain_size() const {
  if (!map_) return std::nullopt;
  return map_->kernel().n();
}

}  // namespace nnlr
