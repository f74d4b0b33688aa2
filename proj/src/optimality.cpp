#include "nnlr/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nnlr/parallel.hpp"

namespace nnlr {

std::string_view to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::Zero: return "Zero";
    case ConeStatus::Nonneg: return "Nonneg";
    case ConeStatus::Free: return "Free";
  }
  return "?";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::GlobalMin: return "GlobalMin";
    case Classification::SpuriousCandidate: return "SpuriousCandidate";
    case Classification::Saddle: return "Saddle";
    case Classification::NotCritical: return "NotCritical";
  }
  return "?";
}

Classification classification_from_string(std::string_view s) {
  for (auto c : {Classification::GlobalMin, Classification::SpuriousCandidate,
                 Classification::Saddle, Classification::NotCritical}) {
    if (to_string(c) == s) return c;
  }
  throw InvalidArgument("unknown classification '" + std::string(s) + "'");
}

std::string_view to_string(BenignBranch b) {
  switch (b) {
    case BenignBranch::Zero: return "zero";
    case BenignBranch::Global: return "global";
    case BenignBranch::Neither: return "neither";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ConeMask

ConeMask::ConeMask(Index rows, Index cols, double tol)
    : rows_(rows), cols_(cols), tol_(tol),
      status_(static_cast<std::size_t>(rows * cols), ConeStatus::Free) {}

Index ConeMask::count(ConeStatus s) const {
  return static_cast<Index>(std::count(status_.begin(), status_.end(), s));
}

bool ConeMask::contains(const Matrix& d) const {
  if (d.rows() != rows_ || d.cols() != cols_) return false;
  for (Index j = 0; j < cols_; ++j) {
    for (Index i = 0; i < rows_; ++i) {
      switch ((*this)(i, j)) {
        case ConeStatus::Zero:
          if (d(i, j) != 0.0) return false;
          break;
        case ConeStatus::Nonneg:
          if (!(d(i, j) >= 0.0)) return false;
          break;
        case ConeStatus::Free: break;
      }
    }
  }
  return true;
}

Matrix ConeMask::project(const Matrix& d) const {
  detail::require_shape(d, rows_, cols_, "cone projection");
  Matrix out = d;
  for (Index j = 0; j < cols_; ++j) {
    for (Index i = 0; i < rows_; ++i) {
      switch ((*this)(i, j)) {
        case ConeStatus::Zero: out(i, j) = 0.0; break;
        case ConeStatus::Nonneg: out(i, j) = std::max(out(i, j), 0.0); break;
        case ConeStatus::Free: break;
      }
    }
  }
  return out;
}

ConeMask critical_cone(const Matrix& u, const Matrix& g, double tol) {
  detail::require_shape(g, u.rows(), u.cols(), "gradient");
  ConeMask mask(u.rows(), u.cols(), tol);
  for (Index j = 0; j < u.cols(); ++j) {
    for (Index i = 0; i < u.rows(); ++i) {
      if (g(i, j) > tol) {
        mask.set(i, j, ConeStatus::Zero);
      } else if (u(i, j) <= tol) {
        mask.set(i, j, ConeStatus::Nonneg);
      } else {
        mask.set(i, j, ConeStatus::Free);
      }
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Direction sampling

namespace {

struct Coord {
  Index i;
  Index j;
  ConeStatus status;
};

std::vector<Coord> open_coords(const ConeMask& mask) {
  std::vector<Coord> coords;
  for (Index j = 0; j < mask.cols(); ++j)
    for (Index i = 0; i < mask.rows(); ++i)
      if (mask(i, j) != ConeStatus::Zero) coords.push_back({i, j, mask(i, j)});
  return coords;
}

double signed_for(ConeStatus s, double value) { return s == ConeStatus::Nonneg ? std::abs(value) : value; }

Matrix draw_direction(const ConeMask& mask, const std::vector<Coord>& coords, std::mt19937_64& rng,
                      DirectionKind kind) {
  if (coords.empty()) throw EmptyConeError("critical cone is {0}: no nonzero direction exists");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, coords.size() - 1);
  std::bernoulli_distribution coin(0.5);
  Matrix d = Matrix::Zero(mask.rows(), mask.cols());

  if (kind == DirectionKind::Pair && coords.size() < 2) kind = DirectionKind::ExtremeRay;

  switch (kind) {
    case DirectionKind::Dense: {
      // Gaussian draw projected onto the cone; redraw the (rare) all-zero projection.
      do {
        for (const Coord& c : coords) {
          const double z = gauss(rng);
          d(c.i, c.j) = c.status == ConeStatus::Nonneg ? std::max(z, 0.0) : z;
        }
      } while (d.squaredNorm() == 0.0);
      break;
    }
    case DirectionKind::ExtremeRay: {
      const Coord& c = coords[pick(rng)];
      d(c.i, c.j) = signed_for(c.status, coin(rng) ? 1.0 : -1.0);
      break;
    }
    case DirectionKind::Pair: {
      const std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      while (b == a) b = pick(rng);
      double wa, wb;
      if (coin(rng)) {
        wa = coin(rng) ? 1.0 : -1.0;
        wb = coin(rng) ? 1.0 : -1.0;
      } else {
        const double theta = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
        wa = std::cos(theta);
        wb = std::sin(theta);
      }
      d(coords[a].i, coords[a].j) = signed_for(coords[a].status, wa);
      d(coords[b].i, coords[b].j) = signed_for(coords[b].status, wb);
      if (d.squaredNorm() == 0.0) d(coords[a].i, coords[a].j) = 1.0;
      break;
    }
  }
  d /= d.norm();
  return d;
}

DirectionKind random_kind(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return DirectionKind::Dense;
    case 1: return DirectionKind::ExtremeRay;
    default: return DirectionKind::Pair;
  }
}

}  // namespace

Matrix sample_cone_direction(const ConeMask& mask, std::mt19937_64& rng, DirectionKind kind) {
  return draw_direction(mask, open_coords(mask), rng, kind);
}

Matrix sample_cone_direction(const ConeMask& mask, std::mt19937_64& rng, DirectionKind* kind_out) {
  const auto coords = open_coords(mask);
  if (coords.empty()) throw EmptyConeError("critical cone is {0}: no nonzero direction exists");
  const DirectionKind kind = random_kind(rng);
  if (kind_out) *kind_out = kind;
  return draw_direction(mask, coords, rng, kind);
}

// ---------------------------------------------------------------------------
// First order

FirstOrderReport first_order_check(const Instance& inst, const Matrix& point, double tol) {
  inst.require_point_shape(point);
  const Matrix g = grad_objective(inst, point);
  FirstOrderReport rep;
  rep.feasibility_margin = min_entry(point);
  rep.gradient_margin = min_entry(g);
  rep.complementarity = inner(g, point);
  rep.tol = tol;
  rep.passed = rep.feasibility_margin >= -tol && rep.gradient_margin >= -tol &&
               std::abs(rep.complementarity) <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Second order

namespace {

double rayleigh(const Instance& inst, const Matrix& point, const Matrix& d) {
  return hess_quad_objective(inst, point, d) / d.squaredNorm();
}

// Projected descent of the Rayleigh quotient over cone ∩ sphere.
double refine_direction(const Instance& inst, const Matrix& point, const ConeMask& mask,
                        Matrix& d, int iters) {
  double q = rayleigh(inst, point, d);
  double step = 0.1;
  for (int it = 0; it < iters; ++it) {
    const Matrix hv = hess_vec_objective(inst, point, d);
    const Matrix grad = 2.0 * (hv - inner(hv, d) * d);
    if (grad.norm() < 1e-14) break;
    bool improved = false;
    for (int ls = 0; ls < 40 && !improved; ++ls) {
      Matrix cand = mask.project(d - step * grad);
      const double norm = cand.norm();
      if (norm > 0.0) {
        cand /= norm;
        const double qc = rayleigh(inst, point, cand);
        if (qc < q) {
          d = std::move(cand);
          q = qc;
          improved = true;
          step *= 2.0;
          break;
        }
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return q;
}

}  // namespace

ScanResult second_order_scan(const Instance& inst, const Matrix& point, const ConeMask& mask,
                             const ScanOptions& options) {
  inst.require_point_shape(point);
  detail::require(mask.rows() == point.rows() && mask.cols() == point.cols(),
                  "cone mask shape does not match the point");
  detail::require(options.num_samples > 0, "second-order scan needs at least one sample");
  const auto coords = open_coords(mask);
  if (coords.empty()) throw EmptyConeError("critical cone is {0}: no nonzero direction exists");

  const int workers = options.workers > 0 ? options.workers : worker_count();
  auto draw = [&](std::size_t i) {
    auto rng = sample_engine(options.seed, i);
    const DirectionKind kind = random_kind(rng);
    return draw_direction(mask, coords, rng, kind);
  };

  std::vector<double> quotients(options.num_samples);
  parallel_for(options.num_samples,
               [&](std::size_t i) { quotients[i] = rayleigh(inst, point, draw(i)); }, workers);

  std::vector<std::size_t> order(options.num_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(options.refine_top, 0)), order.size());
  std::partial_sort(order.begin(), order.begin() + std::max<std::size_t>(top, 1), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return quotients[a] < quotients[b] || (quotients[a] == quotients[b] && a < b);
                    });

  ScanResult res;
  res.samples = options.num_samples;
  res.argmin_sample = order.front();
  res.sampled_min = quotients[order.front()];
  res.direction = draw(order.front());
  res.min_quotient = res.sampled_min;

  std::vector<Matrix> refined(top);
  std::vector<double> refined_q(top);
  parallel_for(top, [&](std::size_t k) {
    refined[k] = draw(order[k]);
    refined_q[k] = refine_direction(inst, point, mask, refined[k], options.refine_iters);
  }, workers);
  for (std::size_t k = 0; k < top; ++k) {
    if (refined_q[k] < res.min_quotient) {
      res.min_quotient = refined_q[k];
      res.direction = refined[k];
      res.from_refinement = true;
    }
  }
  // Report exactly what hess_quad reproduces for the returned direction.
  res.min_quotient = rayleigh(inst, point, res.direction);
  return res;
}

// ---------------------------------------------------------------------------
// Certificates

bool Certificate::checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ClosedFormCheck& c) { return c.passed; });
}

bool Certificate::strict_evidence(double curvature_tol) const {
  if (empty_cone) return true;
  return second_order && second_order->min_quotient > curvature_tol;
}

Certificate certify_point(const Instance& inst, const Matrix& point, const ScanOptions& scan,
                          const Tolerances& tol) {
  Certificate cert;
  cert.seed = scan.seed;
  cert.objective = eval_objective(inst, point);
  cert.objective_gap = cert.objective;
  cert.first_order = first_order_check(inst, point, tol.feasibility);

  if (cert.first_order.passed) {
    const ConeMask mask = critical_cone(point, grad_objective(inst, point), tol.cone);
    if (mask.admits_nonzero()) {
      cert.second_order = second_order_scan(inst, point, mask, scan);
    } else {
      cert.empty_cone = true;
    }
  }

  const bool feasible = cert.first_order.feasibility_margin >= -tol.feasibility;
  if (feasible && cert.objective_gap <= tol.objective) {
    cert.classification = Classification::GlobalMin;
  } else if (!cert.first_order.passed) {
    cert.classification = Classification::NotCritical;
  } else if (cert.second_order && cert.second_order->min_quotient < -tol.curvature) {
    cert.classification = Classification::Saddle;
  } else {
    cert.classification = Classification::SpuriousCandidate;
  }
  return cert;
}

Classification classify_point(const Instance& inst, const Matrix& point, const ScanOptions& scan,
                              const Tolerances& tol) {
  return certify_point(inst, point, scan, tol).classification;
}

namespace {

ClosedFormCheck equal_check(std::string name, double expected, double actual, double tol) {
  return {std::move(name), expected, actual, tol, std::abs(actual - expected) <= tol};
}

ClosedFormCheck at_least_check(std::string name, double bound, double actual, double tol) {
  return {std::move(name), bound, actual, tol, actual >= bound - tol};
}

}  // namespace

Certificate structured_certificate_thm1(const Instance& inst, const Matrix& point,
                                        const ScanOptions& scan, const Tolerances& tol) {
  detail::require(!inst.op().is_identity(),
                  "structured certificate requires a kernel-operator instance");
  const KernelOperator& kernel = inst.op().map().kernel();
  const Matrix q1 = kernel.q1();
  const Matrix q2 = kernel.q2();
  const double alpha = kernel.alpha(), eps = kernel.eps();
  const int r = kernel.r(), rs = kernel.r_star();
  const bool sym = inst.is_symmetric();

  detail::require(inst.r() == r, "instance search rank does not match the kernel");
  if (sym) {
    detail::require(inst.u_star() == q1, "instance ground truth is not Q1");
  } else {
    detail::require(inst.l_star() == q1 && inst.r_star_factor() == q1,
                    "instance ground truths are not L* = R* = Q1");
  }
  const Matrix u0 = alpha * q2;
  Matrix expected_point = u0;
  if (!sym) {
    expected_point.resize(2 * u0.rows(), u0.cols());
    expected_point << u0, u0;
  }
  inst.require_point_shape(point);
  detail::require((point - expected_point).cwiseAbs().maxCoeff() <= 1e-14,
                  "point is not the structured candidate alpha Q2");

  constexpr double kExact = 1e-12;
  const double delta = kernel.rip_constant();
  Certificate cert = certify_point(inst, point, scan, tol);
  cert.basis = "closed-form-backed";

  cert.checks.push_back(
      equal_check("objective_closed_form", 0.5 * (rs - std::pow(alpha, 4) * r), cert.objective, kExact));
  cert.checks.push_back(
      at_least_check("objective_lower_bound", 0.5 * rs * (1.0 - delta * delta), cert.objective, kExact));

  const Matrix g = grad_objective(inst, point);
  const double block_value = (sym ? 2.0 : 1.0) * std::pow(alpha, 3) * eps;
  Matrix g_expected = Matrix::Zero(point.rows(), point.cols());
  for (int j = 0; j < rs; ++j) {
    const Index row = kernel.perm_cols()[j];
    g_expected.row(row).setConstant(block_value);
    if (!sym) g_expected.row(row + kernel.n()).setConstant(block_value);
  }
  cert.checks.push_back(
      equal_check("gradient_pattern_max_deviation", 0.0, (g - g_expected).cwiseAbs().maxCoeff(), kExact));
  cert.checks.push_back(equal_check("gradient_block_value", block_value,
                                    g(kernel.perm_cols()[0], 0), kExact));
  cert.checks.push_back(at_least_check("gradient_nonnegative", 0.0, min_entry(g), kExact));
  cert.checks.push_back(equal_check("complementarity", 0.0, inner(g, point), kExact));

  // Cone {[0; Y; Z]}: Q1 rows fixed, Y diagonal free, Y off-diagonal and Z nonnegative.
  ConeMask expected_mask(point.rows(), point.cols(), tol.cone);
  const int blocks = sym ? 1 : 2;
  for (int b = 0; b < blocks; ++b) {
    const Index offset = b * kernel.n();
    for (Index i = 0; i < kernel.n(); ++i)
      for (Index j = 0; j < r; ++j) expected_mask.set(offset + i, j, ConeStatus::Nonneg);
    for (int j = 0; j < rs; ++j)
      for (Index c = 0; c < r; ++c) expected_mask.set(offset + kernel.perm_cols()[j], c, ConeStatus::Zero);
    for (int j = 0; j < r; ++j) expected_mask.set(offset + kernel.perm_cols()[rs + j], j, ConeStatus::Free);
  }
  const ConeMask mask = critical_cone(point, g, tol.cone);
  cert.checks.push_back(equal_check("cone_pattern", 1.0, mask == expected_mask ? 1.0 : 0.0, 0.0));

  const double bound = sym ? alpha * alpha : std::min(inst.lambda(), 0.25) * alpha * alpha;
  const double min_q = cert.second_order ? cert.second_order->min_quotient
                                         : std::numeric_limits<double>::infinity();
  cert.checks.push_back(at_least_check("cone_curvature_bound", bound, min_q, tol.curvature));
  return cert;
}

Certificate structured_certificate_spu2(const Instance& inst, const Matrix& point, int k, double rho,
                                        std::size_t ball_samples, const ScanOptions& scan,
                                        const Tolerances& tol) {
  detail::require(inst.op().is_identity(), "spu2 certificate requires the identity operator");
  detail::require(k >= 1 && inst.true_rank() == k + 1, "ground truth rank must be k + 1");
  Certificate cert = certify_point(inst, point, scan, tol);
  cert.basis = "closed-form-backed";
  cert.checks.push_back(equal_check("objective_gap_closed_form", 0.5 * k, cert.objective, 1e-12));
  cert.checks.push_back(equal_check("complementarity", 0.0, cert.first_order.complementarity, 1e-12));
  const BallTestResult ball =
      local_min_ball_test(inst, point, rho, ball_samples, scan.seed, scan.workers);
  cert.checks.push_back(at_least_check("ball_min_gap", 0.0, ball.min_gap, 1e-12));
  return cert;
}

// ---------------------------------------------------------------------------
// Rank-one benign case

BenignReport benign_rank1_classifier(const Instance& inst, const Matrix& point, double tol) {
  detail::require(inst.op().is_identity(), "benign classifier requires the identity operator");
  detail::require(inst.true_rank() == 1, "benign classifier requires a rank-one ground truth");
  inst.require_point_shape(point);

  Vector u_star;
  if (inst.is_symmetric()) {
    u_star = inst.u_star().col(0);
  } else {
    u_star.resize(inst.n1() + inst.n2());
    u_star << inst.l_star().col(0), inst.r_star_factor().col(0);
  }
  const Matrix& u = point;
  const Matrix err = u * u.transpose() - u_star * u_star.transpose();
  const Matrix grad = 2.0 * err * u;

  BenignReport rep;
  rep.curvature_hypothesis = inner(grad, u_star * (u_star.transpose() * u));
  rep.complementarity_hypothesis = inner(grad, u);
  rep.first_order_critical = rep.curvature_hypothesis >= -tol && rep.complementarity_hypothesis <= tol;
  rep.norm = u.norm();
  rep.gram_error = err.norm();
  if (rep.norm <= tol) {
    rep.branch = BenignBranch::Zero;
  } else if (rep.gram_error <= tol) {
    rep.branch = BenignBranch::Global;
  } else {
    rep.branch = BenignBranch::Neither;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ball test

BallTestResult local_min_ball_test(const Instance& inst, const Matrix& point, double radius,
                                   std::size_t num_samples, std::uint64_t seed, int workers) {
  detail::require(radius > 0.0, "ball radius must be positive");
  detail::require(num_samples > 0, "ball test needs at least one sample");
  inst.require_point_shape(point);
  const double base = eval_objective(inst, point);

  auto draw = [&](std::size_t i, std::size_t& rejected) {
    auto rng = sample_engine(seed, i);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
      Matrix dir = point.unaryExpr([&](double) { return gauss(rng); });
      const double norm = dir.norm();
      if (norm == 0.0) continue;
      Matrix cand = clamp_nonneg(point + (radius * unif(rng) / norm) * dir);
      if ((cand - point).norm() <= radius) return cand;
      ++rejected;
    }
  };

  std::vector<double> gaps(num_samples);
  std::vector<std::size_t> rejected(num_samples, 0);
  parallel_for(num_samples, [&](std::size_t i) {
    gaps[i] = eval_objective(inst, draw(i, rejected[i])) - base;
  }, workers > 0 ? workers : worker_count());

  BallTestResult res;
  res.samples = num_samples;
  std::size_t best = 0;
  for (std::size_t i = 1; i < num_samples; ++i)
    if (gaps[i] < gaps[best]) best = i;
  res.min_gap = gaps[best];
  std::size_t dummy = 0;
  res.argmin = draw(best, dummy);
  res.rejected = std::accumulate(rejected.begin(), rejected.end(), std::size_t{0});
  return res;
}

}  // namespace nnlr
