#include "nnlr/solver.hpp"

#include <algorithm>
#include <cmath>

#include "nnlr/parallel.hpp"

namespace nnlr {

void SolverConfig::validate() const {
  detail::require(max_iters >= 1, "max_iters must be >= 1");
  detail::require(std::isfinite(step) && step >= 0.0, "step must be >= 0 (0 selects 1/(1+delta))");
  detail::require(shrink > 0.0 && shrink < 1.0, "shrink factor must lie in (0, 1)");
  detail::require(sufficient_decrease > 0.0 && sufficient_decrease < 1.0,
                  "sufficient-decrease constant must lie in (0, 1)");
  detail::require(tol > 0.0, "tolerance must be positive");
  detail::require(record_every >= 1, "record_every must be >= 1");
  detail::require(classify_samples >= 1, "classify_samples must be >= 1");
}

double projected_residual(const Instance& inst, const Matrix& point) {
  const Matrix g = grad_objective(inst, point);
  return (point - clamp_nonneg(point - g)).norm();
}

namespace {

ScanOptions classify_scan(const SolverConfig& config) {
  ScanOptions scan;
  scan.num_samples = config.classify_samples;
  scan.seed = config.seed;
  scan.workers = config.workers;
  return scan;
}

// Backtracking gives up after this many halvings; the step is then below rounding.
constexpr int kMaxShrinks = 80;

}  // namespace

RunResult pgd(const Instance& inst, const Matrix& init, const SolverConfig& config) {
  config.validate();
  inst.require_point_shape(init);
  detail::require(all_finite(init), "initial point has non-finite entries");
  detail::require(min_entry(init) >= 0.0, "initial point must be entrywise nonnegative");

  const double s0 = config.step > 0.0 ? config.step : 1.0 / (1.0 + inst.op().rip_constant());
  RunResult res;
  Matrix u = init;
  double f = eval_objective(inst, u);
  Matrix g = grad_objective(inst, u);
  double residual = (u - clamp_nonneg(u - g)).norm();
  res.trajectory.push_back({0, f, residual});

  std::size_t it = 0;
  Matrix cand(u.rows(), u.cols());
  while (residual > config.tol && it < config.max_iters) {
    if (config.step_rule == StepRule::Fixed) {
      u = clamp_nonneg(u - s0 * g);
      f = eval_objective(inst, u);
    } else {
      double s = s0;
      bool accepted = false;
      for (int k = 0; k < kMaxShrinks; ++k, s *= config.shrink) {
        cand = clamp_nonneg(u - s * g);
        const double fc = eval_objective(inst, cand);
        if (fc <= f + config.sufficient_decrease * inner(g, cand - u)) {
          u.swap(cand);
          f = fc;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    ++it;
    g = grad_objective(inst, u);
    residual = (u - clamp_nonneg(u - g)).norm();
    if (it % config.record_every == 0) res.trajectory.push_back({it, f, residual});
  }
  if (res.trajectory.back().iter != it) res.trajectory.push_back({it, f, residual});

  res.point = std::move(u);
  res.iterations = it;
  res.objective = f;
  res.residual = residual;
  res.converged = residual <= config.tol;
  res.classification = classify_point(inst, res.point, classify_scan(config));
  return res;
}

RunResult saddle_escape_restart(const Instance& inst, const RunResult& result,
                                const SolverConfig& config) {
  if (result.classification == Classification::GlobalMin) return result;
  RunResult out = result;
  const ConeMask mask = critical_cone(result.point, grad_objective(inst, result.point));
  if (!mask.admits_nonzero()) {
    out.escape_failed = true;
    return out;
  }
  ScanOptions scan = classify_scan(config);
  scan.seed = config.seed + static_cast<std::uint64_t>(result.restarts) + 1;
  const ScanResult found = second_order_scan(inst, result.point, mask, scan);
  if (found.min_quotient >= -Tolerances{}.curvature) {
    out.escape_failed = true;
    return out;
  }
  const Matrix start = clamp_nonneg(result.point + 1e-2 * found.direction);
  RunResult rerun = pgd(inst, start, config);
  rerun.restarts = result.restarts + 1;
  return rerun;
}

RunResult pgd_with_escapes(const Instance& inst, const Matrix& init, const SolverConfig& config,
                           int max_restarts) {
  RunResult res = pgd(inst, init, config);
  while (res.classification == Classification::Saddle && res.restarts < max_restarts) {
    RunResult next = saddle_escape_restart(inst, res, config);
    if (next.escape_failed) return next;
    res = std::move(next);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Basins

std::string_view to_string(Basin b) {
  switch (b) {
    case Basin::Global: return "GlobalBasin";
    case Basin::Spurious: return "SpuriousBasin";
    case Basin::Other: return "Other";
  }
  return "?";
}

double BasinSummary::fraction(Basin b) const {
  if (trials == 0) return 0.0;
  const std::size_t c = b == Basin::Global ? global : b == Basin::Spurious ? spurious : other;
  return static_cast<double>(c) / static_cast<double>(trials);
}

namespace {

double truth_max(const Instance& inst) {
  return inst.is_symmetric() ? inst.u_star().maxCoeff()
                             : std::max(inst.l_star().maxCoeff(), inst.r_star_factor().maxCoeff());
}

}  // namespace

Matrix draw_init(const NamedInstance& named, const InitDistribution& dist, std::uint64_t seed,
                 std::size_t trial) {
  const Instance& inst = named.instance;
  auto rng = sample_engine(seed, trial);
  if (dist.kind == InitDistribution::Kind::Uniform) {
    double u_max = dist.u_max > 0.0 ? dist.u_max : 2.0 * truth_max(inst);
    if (u_max <= 0.0) u_max = 1.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // 1 - U[0,1) lies in (0, 1], so every entry is strictly positive.
    return Matrix(inst.stacked_rows(), inst.r()).unaryExpr([&](double) { return u_max * (1.0 - unif(rng)); });
  }
  detail::require(dist.radius > 0.0, "near-candidate radius must be positive");
  const Matrix& base = named.candidate(dist.candidate).point;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix pert;
  do {
    pert = base.unaryExpr([&](double) { return std::abs(gauss(rng)); });
  } while (pert.norm() == 0.0);
  return base + (dist.radius / pert.norm()) * pert;
}

BasinSummary basin_experiment(const NamedInstance& named, const BasinOptions& options) {
  detail::require(options.trials >= 1, "basin experiment needs at least one trial");
  options.config.validate();
  const Instance& inst = named.instance;

  std::vector<const Candidate*> spurious;
  for (const auto& c : named.candidates)
    if (c.expected == Classification::SpuriousCandidate) spurious.push_back(&c);

  BasinSummary summary;
  summary.trials = options.trials;
  summary.records.resize(options.trials);
  SolverConfig trial_config = options.config;
  trial_config.workers = 1;

  parallel_for(options.trials, [&](std::size_t t) {
    TrialRecord& rec = summary.records[t];
    rec.trial = t;
    rec.init = draw_init(named, options.init, options.config.seed, t);
    rec.result = options.escape_restarts > 0
                     ? pgd_with_escapes(inst, rec.init, trial_config, options.escape_restarts)
                     : pgd(inst, rec.init, trial_config);
    const Matrix final_gram = gram(inst, rec.result.point);
    rec.global_gram_distance = (final_gram - inst.target()).norm();
    if (rec.global_gram_distance <= options.gram_tol) {
      rec.basin = Basin::Global;
      return;
    }
    for (const Candidate* c : spurious) {
      if ((final_gram - gram(inst, c->point)).norm() <= options.gram_tol) {
        rec.basin = Basin::Spurious;
        rec.matched_candidate = c->name;
        return;
      }
    }
    rec.basin = Basin::Other;
  }, options.workers > 0 ? options.workers : worker_count());

  for (const auto& rec : summary.records) {
    switch (rec.basin) {
      case Basin::Global: ++summary.global; break;
      case Basin::Spurious: ++summary.spurious; break;
      case Basin::Other: ++summary.other; break;
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Alpha sweep

std::vector<SweepRow> alpha_sweep(int n, int r, int r_star, double eps,
                                  const std::vector<double>& fractions, const SweepOptions& options) {
  for (double fr : fractions)
    detail::require(fr > 0.0 && fr < 1.0, "alpha fractions must lie in (0, 1)");
  std::vector<SweepRow> rows;
  rows.reserve(fractions.size());
  for (double fr : fractions) {
    SweepRow row;
    row.fraction = fr;
    row.alpha = fr * alpha_upper_bound(r, r_star, eps);
    const NamedInstance named = make_thm1_symmetric(n, r, r_star, eps, row.alpha);
    row.delta = named.instance.op().rip_constant();

    ScanOptions scan;
    scan.num_samples = options.scan_samples;
    scan.seed = options.config.seed;
    scan.workers = options.config.workers;
    const Certificate cert =
        structured_certificate_thm1(named.instance, named.candidate("U0").point, scan);
    row.objective = cert.objective;
    row.closed_form = 0.5 * (r_star - std::pow(row.alpha, 4) * r);
    row.min_quotient = cert.second_order ? cert.second_order->min_quotient : 0.0;
    row.certificate_passed =
        cert.checks_passed() && cert.classification == Classification::SpuriousCandidate;

    BasinOptions probe;
    probe.trials = options.probe_trials;
    probe.init.kind = InitDistribution::Kind::NearCandidate;
    probe.init.candidate = "U0";
    probe.init.radius = options.probe_radius;
    probe.config = options.config;
    probe.workers = options.config.workers;
    row.spurious_fraction = basin_experiment(named, probe).fraction(Basin::Spurious);
    row.persists = row.certificate_passed;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nnlr
