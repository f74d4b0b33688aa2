#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nnlr/objectives.hpp"

namespace nnlr {

/// Default thresholds. Instances are O(1)-scaled, so absolute values are used throughout.
struct Tolerances {
  double feasibility = 1e-9;  // feasibility and complementarity
  double objective = 1e-8;    // global-optimality gap
  double cone = 1e-9;         // activity threshold for the critical cone
  double curvature = 1e-9;    // a quotient below -curvature counts as negative
};

// ---------------------------------------------------------------------------
// Critical cone

enum class ConeStatus : std::uint8_t {
  Zero,    // G_ij > tol: direction entry forced to 0
  Nonneg,  // U_ij <= tol and G_ij <= tol: direction entry >= 0
  Free,
};

std::string_view to_string(ConeStatus s);

class ConeMask {
 public:
  ConeMask(Index rows, Index cols, double tol);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  double tol() const { return tol_; }

  ConeStatus operator()(Index i, Index j) const { return status_[j * rows_ + i]; }
  void set(Index i, Index j, ConeStatus s) { status_[j * rows_ + i] = s; }

  Index count(ConeStatus s) const;
  /// False when every entry is Zero, i.e. the cone is {0}.
  bool admits_nonzero() const { return count(ConeStatus::Zero) < rows_ * cols_; }

  /// Exact membership: Zero entries identically 0, Nonneg entries >= 0.
  bool contains(const Matrix& d) const;
  /// Euclidean projection onto the cone.
  Matrix project(const Matrix& d) const;

  bool operator==(const ConeMask&) const = default;

 private:
  Index rows_;
  Index cols_;
  double tol_;
  std::vector<ConeStatus> status_;
};

/// C(U, G) = { D : D_ij = 0 where G_ij > tol, D_ij >= 0 where U_ij <= tol }.
ConeMask critical_cone(const Matrix& u, const Matrix& g, double tol = Tolerances{}.cone);

enum class DirectionKind { Dense, ExtremeRay, Pair };

/// Unit-norm direction inside the cone. Throws EmptyConeError when the cone is {0}.
Matrix sample_cone_direction(const ConeMask& mask, std::mt19937_64& rng, DirectionKind kind);
/// As above with the draw type chosen uniformly at random.
Matrix sample_cone_direction(const ConeMask& mask, std::mt19937_64& rng,
                             DirectionKind* kind_out = nullptr);

// ---------------------------------------------------------------------------
// First- and second-order checks

struct FirstOrderReport {
  double feasibility_margin = 0.0;  // min entry of U
  double gradient_margin = 0.0;     // min entry of grad
  double complementarity = 0.0;     // <grad, U>
  double tol = 0.0;
  bool passed = false;
};

FirstOrderReport first_order_check(const Instance& inst, const Matrix& point,
                                   double tol = Tolerances{}.feasibility);

struct ScanOptions {
  std::size_t num_samples = 10000;
  std::uint64_t seed = 0;
  /// Best sampled directions polished by projected descent of the Rayleigh quotient.
  int refine_top = 8;
  int refine_iters = 200;
  int workers = 0;  // 0: worker_count()
};

struct ScanResult {
  double min_quotient = 0.0;  // over sampled and refined directions
  double sampled_min = 0.0;   // over raw samples only
  Matrix direction;           // unit-norm argmin, inside the cone
  std::size_t samples = 0;
  std::size_t argmin_sample = 0;
  bool from_refinement = false;
};

/// Minimum of <Hess F(U)[D], D> / ||D||^2 over sampled cone directions. A positive
/// value is evidence for strict second-order sufficiency, not a proof; a negative
/// value comes with its witness direction.
ScanResult second_order_scan(const Instance& inst, const Matrix& point, const ConeMask& mask,
                             const ScanOptions& options);

// ---------------------------------------------------------------------------
// Certificates and classification

enum class Classification { GlobalMin, SpuriousCandidate, Saddle, NotCritical };

std::string_view to_string(Classification c);
Classification classification_from_string(std::string_view s);

struct ClosedFormCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tol = 0.0;
  bool passed = false;
};

struct Certificate {
  FirstOrderReport first_order;
  std::optional<ScanResult> second_order;
  bool empty_cone = false;
  double objective = 0.0;
  double objective_gap = 0.0;  // objective - global value (0 for every supported instance)
  Classification classification = Classification::NotCritical;
  /// "evidence" for sampling-only certificates, "closed-form-backed" when a proved
  /// bound for this construction was checked.
  std::string basis = "evidence";
  std::vector<ClosedFormCheck> checks;
  std::uint64_t seed = 0;

  bool checks_passed() const;
  /// Scan found no quotient below +curvature tolerance.
  bool strict_evidence(double curvature_tol = Tolerances{}.curvature) const;
};

/// Runs first-order and sampled second-order checks and classifies the point:
/// GlobalMin iff objective <= tol; Saddle iff first-order passes and a negative
/// quotient is found; SpuriousCandidate iff first-order passes with positive
/// objective and no negative quotient; NotCritical otherwise.
Certificate certify_point(const Instance& inst, const Matrix& point, const ScanOptions& scan = {},
                          const Tolerances& tol = {});

Classification classify_point(const Instance& inst, const Matrix& point,
                              const ScanOptions& scan = {}, const Tolerances& tol = {});

/// Certificate for the structured spurious point alpha Q2 (or alpha [Q2; Q2]) of a
/// kernel-operator instance. Checks every closed-form identity of the construction
/// and the cone-restricted curvature bound (alpha^2, or min(lambda, 1/4) alpha^2).
/// Throws InvalidArgument when the instance or point is not of that form.
Certificate structured_certificate_thm1(const Instance& inst, const Matrix& point,
                                        const ScanOptions& scan = {}, const Tolerances& tol = {});

/// Certificate for the fully observed point U0 = [1_m 1_r^T / sqrt(r); 0] (or its
/// balanced pair): checks the objective gap k/2 and samples the feasible ball of
/// radius rho for a lower objective value.
Certificate structured_certificate_spu2(const Instance& inst, const Matrix& point, int k, double rho,
                                        std::size_t ball_samples, const ScanOptions& scan = {},
                                        const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Rank-one, fully observed case

enum class BenignBranch { Zero, Global, Neither };
std::string_view to_string(BenignBranch b);

struct BenignReport {
  double curvature_hypothesis = 0.0;      // <grad f(U), u* u*^T U>, must be >= -tol
  double complementarity_hypothesis = 0.0;  // <grad f(U), U>, must be <= tol
  bool first_order_critical = false;
  double norm = 0.0;        // ||U||
  double gram_error = 0.0;  // ||UU^T - u* u*^T||
  BenignBranch branch = BenignBranch::Neither;
};

/// For an identity-operator instance with a rank-one truth, checks the two
/// hypotheses under which a point must satisfy U = 0 or UU^T = u* u*^T, and reports
/// which holds. Asymmetric instances are checked on the stacked U = [L; R] against
/// u* = [L*; R*].
BenignReport benign_rank1_classifier(const Instance& inst, const Matrix& point,
                                     double tol = 1e-6);

// ---------------------------------------------------------------------------
// Feasible-ball sampling

struct BallTestResult {
  double min_gap = 0.0;  // min over samples of F(U) - F(point)
  Matrix argmin;
  std::size_t samples = 0;
  std::size_t rejected = 0;
};

/// Samples U = max(point + t D, 0) with D uniform on the sphere and t uniform in
/// [0, radius]; clamped samples farther than `radius` from the point are redrawn.
BallTestResult local_min_ball_test(const Instance& inst, const Matrix& point, double radius,
                                   std::size_t num_samples, std::uint64_t seed, int workers = 0);

}  // namespace nnlr
