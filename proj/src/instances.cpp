#include "nnlr/instances.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nnlr {

const Candidate& NamedInstance::candidate(const std::string& name) const {
  for (const auto& c : candidates)
    if (c.name == name) return c;
  std::string known;
  for (const auto& c : candidates) known += (known.empty() ? "" : ", ") + c.name;
  throw InvalidArgument("unknown candidate '" + name + "' (available: " + known + ")");
}

bool NamedInstance::has_candidate(const std::string& name) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const Candidate& c) { return c.name == name; });
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

KernelOperator thm1_kernel(int n, int r, int r_star, double eps, double alpha,
                           std::vector<int> perm_cols) {
  detail::require(r_star >= 1 && r >= r_star, "ranks must satisfy r >= r_star >= 1");
  detail::require(eps > 0.0, "eps must be positive");
  const double bound = alpha_upper_bound(r, r_star, eps);
  detail::require(alpha > 0.0 && alpha < bound,
                  "alpha = " + fmt(alpha) + " outside the admissible interval (0, " + fmt(bound) + ")");
  return KernelOperator::build(n, r, r_star, eps, alpha, std::move(perm_cols));
}

nlohmann::json thm1_params(const KernelOperator& k) {
  return {{"n", k.n()},         {"r", k.r()},         {"r_star", k.r_star()},
          {"eps", k.eps()},     {"alpha", k.alpha()}, {"perm_cols", k.perm_cols()},
          {"delta", k.rip_constant()}, {"alpha_bound", alpha_upper_bound(k.r(), k.r_star(), k.eps())}};
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Matrix pad_columns(const Matrix& m, Index cols) {
  Matrix out = Matrix::Zero(m.rows(), cols);
  out.leftCols(std::min(cols, m.cols())) = m.leftCols(std::min(cols, m.cols()));
  return out;
}

}  // namespace

NamedInstance make_thm1_symmetric(int n, int r, int r_star, double eps, double alpha,
                                  std::vector<int> perm_cols) {
  const KernelOperator kernel = thm1_kernel(n, r, r_star, eps, alpha, std::move(perm_cols));
  const Matrix q1 = kernel.q1();
  const Matrix u0 = alpha * kernel.q2();
  NamedInstance out{Instance::symmetric(SensingOperator(MeasurementMap::build(kernel)), q1, r), {}, {}, {}};
  out.candidates.push_back({"Ustar", pad_columns(q1, r), Classification::GlobalMin, std::nullopt, "ground truth"});
  out.candidates.push_back({"U0", u0, Classification::SpuriousCandidate, alpha * alpha,
                            "strict local minimum; cone curvature >= alpha^2"});
  out.provenance = {"thm1-sym", thm1_params(kernel)};
  return out;
}

NamedInstance make_thm1_asymmetric(int n, int r, int r_star, double eps, double alpha,
                                   double lambda, std::vector<int> perm_cols) {
  detail::require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
  const KernelOperator kernel = thm1_kernel(n, r, r_star, eps, alpha, std::move(perm_cols));
  const Matrix q1 = kernel.q1();
  const Matrix u0 = alpha * kernel.q2();
  NamedInstance out{
      Instance::asymmetric(SensingOperator(MeasurementMap::build(kernel)), q1, q1, r, lambda), {}, {}, {}};
  const Matrix g = pad_columns(q1, r);
  out.candidates.push_back({"Ustar", stack(g, g), Classification::GlobalMin, std::nullopt, "ground truth"});
  if (lambda > 0.0) {
    out.candidates.push_back({"U0", stack(u0, u0), Classification::SpuriousCandidate,
                              std::min(lambda, 0.25) * alpha * alpha,
                              "strict local minimum; cone curvature >= min(lambda, 1/4) alpha^2"});
  } else {
    out.candidates.push_back({"U0", stack(u0, u0), Classification::SpuriousCandidate, 0.0,
                              "second-order critical; cone curvature infimum is 0"});
  }
  nlohmann::json params = thm1_params(kernel);
  params["lambda"] = lambda;
  out.provenance = {"thm1-asym", params};
  return out;
}

double spu2_radius(int m, int r) { return 1.0 / (4.0 * r * std::sqrt(static_cast<double>(m))); }

NamedInstance make_spu2(int m, int k, int r, Variant variant, double lambda) {
  detail::require(r >= 1, "search rank r must be >= 1");
  detail::require(k >= 1, "k must be >= 1");
  detail::require(m > r, "spu2 requires m > r (got m = " + std::to_string(m) + ", r = " +
                             std::to_string(r) + ")");
  detail::require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
  const int n = m + k;
  const int true_rank = k + 1;

  Matrix u0 = Matrix::Zero(n, r);
  u0.topRows(m).setConstant(1.0 / std::sqrt(static_cast<double>(r)));
  Matrix u_star = Matrix::Zero(n, true_rank);
  u_star.block(0, 0, m, 1).setOnes();
  u_star.block(m, 1, k, k).setIdentity();

  NamedInstance out{variant == Variant::Symmetric
                        ? Instance::symmetric(SensingOperator::identity(), u_star, r)
                        : Instance::asymmetric(SensingOperator::identity(), u_star, u_star, r, lambda),
                    {}, {}, {}};
  const bool sym = variant == Variant::Symmetric;
  const std::string u0_note = sym ? "local minimum with objective gap k/2"
                                  : "balanced local minimum; persists for every lambda >= 0";
  out.candidates.push_back({"U0", sym ? u0 : stack(u0, u0), Classification::SpuriousCandidate,
                            std::nullopt, u0_note});
  if (r >= true_rank) {
    const Matrix g = pad_columns(u_star, r);
    out.candidates.push_back({"Ustar", sym ? g : stack(g, g), Classification::GlobalMin, std::nullopt,
                              "ground truth"});
  } else {
    out.warnings.push_back("r = " + std::to_string(r) + " < k + 1 = " + std::to_string(true_rank) +
                           ": the ground truth is not representable at this rank");
  }
  nlohmann::json params = {{"m", m}, {"k", k}, {"r", r}, {"rho", spu2_radius(m, r)}};
  if (!sym) params["lambda"] = lambda;
  out.provenance = {"spu2", params};
  return out;
}

Matrix rank1_global_point(const Instance& inst) {
  detail::require(inst.true_rank() == 1, "rank-one global point needs a rank-one truth");
  if (inst.is_symmetric()) return pad_columns(inst.u_star(), inst.r());
  return stack(pad_columns(inst.l_star(), inst.r()), pad_columns(inst.r_star_factor(), inst.r()));
}

NamedInstance make_benign_rank1(const Vector& u_star, int r, Variant variant,
                                std::optional<Index> split) {
  detail::require(u_star.size() >= 1, "u_star must be nonempty");
  detail::require(r >= 1, "search rank r must be >= 1");
  const Matrix u = u_star;
  const bool sym = variant == Variant::Symmetric;
  NamedInstance out{Instance::symmetric(SensingOperator::identity(), u, r), {}, {}, {}};
  nlohmann::json params = {{"n", u_star.size()}, {"r", r},
                           {"u_star", std::vector<double>(u_star.data(), u_star.data() + u_star.size())}};
  bool nonzero_target = u_star.squaredNorm() > 0.0;

  if (!sym) {
    const Index n1 = split.value_or(u_star.size() / 2);
    detail::require(n1 >= 1 && n1 < u_star.size(), "split must leave both L and R nonempty");
    const Matrix a = u.topRows(n1);
    const Matrix b = u.bottomRows(u_star.size() - n1);
    out.instance = Instance::asymmetric(SensingOperator::identity(), a, b, r, 0.25);
    if (std::abs(a.norm() - b.norm()) > 1e-12) {
      out.warnings.push_back("||a|| = " + fmt(a.norm()) + " differs from ||b|| = " + fmt(b.norm()) +
                             "; the zero-escape argument assumes equal norms");
    }
    params["split"] = n1;
    params["lambda"] = 0.25;
    nonzero_target = a.squaredNorm() > 0.0 && b.squaredNorm() > 0.0;
  }

  out.candidates.push_back({"Ustar", rank1_global_point(out.instance), Classification::GlobalMin,
                            std::nullopt, "ground truth"});
  if (nonzero_target) {
    out.candidates.push_back({"zero", Matrix::Zero(out.instance.stacked_rows(), r), Classification::Saddle,
                              std::nullopt, "escape direction along the ground truth"});
  }
  out.provenance = {"benign-r1", params};
  return out;
}

}  // namespace nnlr
