#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nnlr/instances.hpp"
#include "nnlr/optimality.hpp"

namespace nnlr {

enum class StepRule { Fixed, Backtracking };

struct SolverConfig {
  std::size_t max_iters = 100000;
  StepRule step_rule = StepRule::Backtracking;
  /// Fixed step, or the initial trial step of each backtracking search.
  /// 0 selects 1 / (1 + delta) from the instance operator.
  double step = 0.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  /// Stop when ||U - max(U - grad, 0)|| <= tol.
  double tol = 1e-9;
  std::uint64_t seed = 0;
  /// Trajectory sampling period; the first and last iterates are always recorded.
  std::size_t record_every = 100;
  /// Cone samples used to classify the final point.
  std::size_t classify_samples = 2000;
  int workers = 0;

  void validate() const;
};

struct TrajectoryPoint {
  std::size_t iter = 0;
  double objective = 0.0;
  double residual = 0.0;
};

struct RunResult {
  Matrix point;
  std::size_t iterations = 0;
  double objective = 0.0;
  double residual = 0.0;
  bool converged = false;
  Classification classification = Classification::NotCritical;
  std::vector<TrajectoryPoint> trajectory;
  int restarts = 0;
  /// Set by saddle_escape_restart when no negative-curvature direction was found.
  bool escape_failed = false;
};

/// Projected-gradient residual ||U - max(U - grad F(U), 0)||.
double projected_residual(const Instance& inst, const Matrix& point);

/// Projected gradient descent U+ = max(U - s grad F(U), 0) from a feasible start.
RunResult pgd(const Instance& inst, const Matrix& init, const SolverConfig& config);

/// Restarts a result that stalled at a saddle: moves 1e-2 along the scan's negative
/// curvature witness, clamps, and reruns. Global results are returned unchanged;
/// when no negative direction exists the input comes back with escape_failed set.
RunResult saddle_escape_restart(const Instance& inst, const RunResult& result,
                                const SolverConfig& config);

/// pgd followed by up to `max_restarts` escape attempts while the result is a saddle.
RunResult pgd_with_escapes(const Instance& inst, const Matrix& init, const SolverConfig& config,
                           int max_restarts);

// ---------------------------------------------------------------------------
// Basin experiments

enum class Basin { Global, Spurious, Other };
std::string_view to_string(Basin b);

struct InitDistribution {
  enum class Kind { Uniform, NearCandidate };
  Kind kind = Kind::Uniform;
  /// Uniform: entries in (0, u_max]; 0 selects 2 * max entry of the ground truth.
  double u_max = 0.0;
  /// NearCandidate: candidate plus a nonnegative perturbation of norm `radius`.
  std::string candidate;
  double radius = 1e-3;
};

struct BasinOptions {
  std::size_t trials = 50;
  InitDistribution init;
  SolverConfig config;
  int escape_restarts = 0;
  double gram_tol = 1e-4;
  int workers = 0;
};

struct TrialRecord {
  std::size_t trial = 0;
  Matrix init;
  RunResult result;
  Basin basin = Basin::Other;
  double global_gram_distance = 0.0;
  std::string matched_candidate;  // spurious candidate within gram_tol, if any
};

struct BasinSummary {
  std::size_t trials = 0;
  std::size_t global = 0;
  std::size_t spurious = 0;
  std::size_t other = 0;
  std::vector<TrialRecord> records;

  double fraction(Basin b) const;
};

/// Draws the initial point of trial `trial` deterministically from the seed.
Matrix draw_init(const NamedInstance& named, const InitDistribution& dist, std::uint64_t seed,
                 std::size_t trial);

BasinSummary basin_experiment(const NamedInstance& named, const BasinOptions& options);

// ---------------------------------------------------------------------------
// Alpha sweep

struct SweepOptions {
  std::size_t scan_samples = 10000;
  std::size_t probe_trials = 10;
  double probe_radius = 1e-3;
  SolverConfig config;
};

struct SweepRow {
  double fraction = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double objective = 0.0;       // f(U0), the gap above the global value 0
  double closed_form = 0.0;     // (r* - alpha^4 r) / 2
  double min_quotient = 0.0;
  bool certificate_passed = false;
  double spurious_fraction = 0.0;  // near-candidate probe; the basin narrows as alpha shrinks
  bool persists = false;           // certificate passed: U0 is still a strict local minimizer
};

std::vector<SweepRow> alpha_sweep(int n, int r, int r_star, double eps,
                                  const std::vector<double>& fractions, const SweepOptions& options);

}  // namespace nnlr
