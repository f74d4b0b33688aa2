#include "nnlr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <sstream>

#include "nnlr/instances.hpp"
#include "nnlr/parallel.hpp"
#include "nnlr/serialization.hpp"
#include "nnlr/solver.hpp"

namespace nnlr {

namespace {

// Mismatch between a computed result and the expectation stored with the instance.
struct Mismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json summary_header(const std::string& command, std::uint64_t seed, bool no_timestamp) {
  Json h = {{"command", command}, {"seed", seed}};
  if (!no_timestamp) h["timestamp"] = timestamp();
  return h;
}

void emit(std::ostream& out, const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file(path, contents);
  }
}

// ---------------------------------------------------------------------------
// construct

struct ConstructArgs {
  std::string family;
  std::string out_path;
  int n = 0, r = 1, r_star = 1, m = 0, k = 1;
  double eps = 0.5;
  std::optional<double> alpha;
  double alpha_fraction = 0.5;
  double lambda = 0.0;
  std::vector<int> perm_cols;
  std::string variant = "symmetric";
  std::vector<double> u_star;
  std::optional<Index> split;
  std::uint64_t seed = 0;
};

int cmd_construct(const ConstructArgs& a, std::ostream& out, std::ostream& err) {
  NamedInstance named = [&] {
    if (a.family == "thm1-sym" || a.family == "thm1-asym") {
      const double bound = alpha_upper_bound(a.r, a.r_star, a.eps);
      const double alpha = a.alpha ? *a.alpha : a.alpha_fraction * bound;
      (a.out_path.empty() ? err : out) << "admissible alpha interval: (0, " << num(bound) << ")\n";
      if (a.family == "thm1-sym") return make_thm1_symmetric(a.n, a.r, a.r_star, a.eps, alpha, a.perm_cols);
      return make_thm1_asymmetric(a.n, a.r, a.r_star, a.eps, alpha, a.lambda, a.perm_cols);
    }
    if (a.family == "spu2") return make_spu2(a.m, a.k, a.r, variant_from_string(a.variant), a.lambda);
    // benign-r1
    Vector u;
    if (!a.u_star.empty()) {
      u = Eigen::Map<const Vector>(a.u_star.data(), static_cast<Index>(a.u_star.size()));
    } else {
      detail::require(a.n >= 1, "benign-r1 needs --u-star or --n");
      auto rng = sample_engine(a.seed, 0);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      u = Vector::NullaryExpr(a.n, [&]() { return unif(rng); });
    }
    return make_benign_rank1(u, a.r, variant_from_string(a.variant), a.split);
  }();

  // Keep stdout clean for the JSON when no output file is given.
  std::ostream& info = a.out_path.empty() ? err : out;
  info << "family: " << named.provenance.family << "\n";
  info << "delta: " << num(named.instance.op().rip_constant()) << "\n";
  for (const auto& w : named.warnings) err << "warning: " << w << "\n";
  for (const auto& c : named.candidates) info << "candidate " << c.name << ": " << to_string(c.expected) << "\n";
  emit(out, a.out_path, dump(instance_to_json(named)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// certify

struct CertifyArgs {
  std::string instance_path;
  std::string candidate;
  std::size_t samples = 10000;
  std::size_t ball_samples = 100000;
  std::uint64_t seed = 0;
  double tol = Tolerances{}.feasibility;
  std::string out_path;
};

Certificate certify_candidate(const NamedInstance& named, const Candidate& cand, const CertifyArgs& a) {
  ScanOptions scan;
  scan.num_samples = a.samples;
  scan.seed = a.seed;
  Tolerances tol;
  tol.feasibility = a.tol;
  const auto& fam = named.provenance.family;
  if ((fam == "thm1-sym" || fam == "thm1-asym") && cand.name == "U0")
    return structured_certificate_thm1(named.instance, cand.point, scan, tol);
  if (fam == "spu2" && cand.name == "U0") {
    const auto& p = named.provenance.params;
    const int k = p.at("k").get<int>();
    const double rho = spu2_radius(p.at("m").get<int>(), p.at("r").get<int>());
    return structured_certificate_spu2(named.instance, cand.point, k, rho, a.ball_samples, scan, tol);
  }
  return certify_point(named.instance, cand.point, scan, tol);
}

int cmd_certify(const CertifyArgs& a, std::ostream& out) {
  const NamedInstance named = load_instance(a.instance_path);
  const Candidate& cand = named.candidate(a.candidate);
  const Certificate cert = certify_candidate(named, cand, a);

  out << "candidate " << cand.name << " (expected " << to_string(cand.expected) << ")\n";
  out << "  objective           " << num(cert.objective) << "\n";
  out << "  feasibility margin  " << num(cert.first_order.feasibility_margin) << "\n";
  out << "  gradient margin     " << num(cert.first_order.gradient_margin) << "\n";
  out << "  complementarity     " << num(cert.first_order.complementarity) << "\n";
  out << "  first order         " << (cert.first_order.passed ? "pass" : "fail") << "\n";
  if (cert.second_order) {
    out << "  min cone quotient   " << num(cert.second_order->min_quotient) << " ("
        << cert.second_order->samples << " samples)\n";
  } else if (cert.empty_cone) {
    out << "  min cone quotient   cone is {0}\n";
  }
  for (const auto& c : cert.checks)
    out << "  check " << c.name << ": " << (c.passed ? "pass" : "FAIL") << " (expected " << num(c.expected)
        << ", actual " << num(c.actual) << ")\n";
  out << "  classification      " << to_string(cert.classification) << "\n";
  out << "  basis               " << cert.basis << "\n";

  Json j = certificate_to_json(cert);
  j["candidate"] = cand.name;
  j["expected"] = std::string(to_string(cand.expected));
  if (!a.out_path.empty()) write_file(a.out_path, dump(j));
  if (cert.classification != cand.expected || !cert.checks_passed())
    throw Mismatch("candidate " + cand.name + " classified " + std::string(to_string(cert.classification)) +
                   (cert.checks_passed() ? "" : " with failing closed-form checks") + ", expected " +
                   std::string(to_string(cand.expected)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run / basins

struct SolverArgs {
  std::size_t max_iters = SolverConfig{}.max_iters;
  double tol = SolverConfig{}.tol;
  double step = 0.0;
  bool fixed_step = false;
  std::size_t record_every = SolverConfig{}.record_every;
  std::size_t classify_samples = SolverConfig{}.classify_samples;

  SolverConfig config(std::uint64_t seed) const {
    SolverConfig c;
    c.max_iters = max_iters;
    c.tol = tol;
    c.step = step;
    c.step_rule = fixed_step ? StepRule::Fixed : StepRule::Backtracking;
    c.record_every = record_every;
    c.classify_samples = classify_samples;
    c.seed = seed;
    return c;
  }
};

void add_solver_flags(CLI::App* sub, SolverArgs& s) {
  sub->add_option("--max-iters", s.max_iters, "Iteration cap")->capture_default_str();
  sub->add_option("--tol", s.tol, "Projected-gradient residual tolerance")->capture_default_str();
  sub->add_option("--step", s.step, "Fixed step or initial backtracking step (0: 1/(1+delta))");
  sub->add_flag("--fixed-step", s.fixed_step, "Use a fixed step instead of backtracking");
  sub->add_option("--record-every", s.record_every, "Trajectory sampling period")->capture_default_str();
  sub->add_option("--classify-samples", s.classify_samples, "Cone samples for the final classification")
      ->capture_default_str();
}

struct BasinArgs {
  std::string instance_path;
  std::string init = "uniform";
  double radius = 1e-3;
  double u_max = 0.0;
  std::size_t trials = 50;
  int escape = 0;
  std::uint64_t seed = 0;
  bool no_timestamp = false;
  std::string out_path;      // JSON-lines records
  std::string summary_path;  // summary JSON
  std::string trajectory_path;
  SolverArgs solver;
};

InitDistribution parse_init(const BasinArgs& a) {
  InitDistribution d;
  if (a.init == "uniform") {
    d.kind = InitDistribution::Kind::Uniform;
    d.u_max = a.u_max;
  } else if (a.init.rfind("near:", 0) == 0) {
    d.kind = InitDistribution::Kind::NearCandidate;
    d.candidate = a.init.substr(5);
    d.radius = a.radius;
  } else {
    throw InvalidArgument("--init must be 'uniform' or 'near:<candidate>'");
  }
  return d;
}

BasinSummary run_basins(const NamedInstance& named, const BasinArgs& a, std::size_t trials) {
  BasinOptions opts;
  opts.trials = trials;
  opts.init = parse_init(a);
  opts.config = a.solver.config(a.seed);
  opts.escape_restarts = a.escape;
  if (opts.init.kind == InitDistribution::Kind::NearCandidate) named.candidate(opts.init.candidate);
  return basin_experiment(named, opts);
}

void print_summary(std::ostream& out, const BasinSummary& s) {
  out << "trials " << s.trials << ": GlobalBasin " << s.global << ", SpuriousBasin " << s.spurious
      << ", Other " << s.other << "\n";
}

int cmd_run(const BasinArgs& a, std::ostream& out) {
  const NamedInstance named = load_instance(a.instance_path);
  const BasinSummary s = run_basins(named, a, 1);
  const TrialRecord& rec = s.records.front();
  out << "iterations " << rec.result.iterations << ", objective " << num(rec.result.objective) << ", residual "
      << num(rec.result.residual) << "\n";
  out << "classification " << to_string(rec.result.classification) << ", basin " << to_string(rec.basin)
      << "\n";
  Json j = trial_record_to_json(rec);
  j["header"] = summary_header("run", a.seed, a.no_timestamp);
  if (!a.out_path.empty()) write_file(a.out_path, dump(j));
  if (!a.trajectory_path.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, rec.result);
    write_file(a.trajectory_path, csv.str());
  }
  return kExitOk;
}

int cmd_basins(const BasinArgs& a, std::ostream& out) {
  const NamedInstance named = load_instance(a.instance_path);
  const BasinSummary s = run_basins(named, a, a.trials);
  print_summary(out, s);
  if (!a.out_path.empty()) {
    std::string lines;
    for (const auto& rec : s.records) lines += trial_record_to_json(rec).dump() + "\n";
    write_file(a.out_path, lines);
  }
  Json summary = basin_summary_to_json(s);
  summary["header"] = summary_header("basins", a.seed, a.no_timestamp);
  summary["init"] = a.init;
  if (!a.summary_path.empty()) write_file(a.summary_path, dump(summary));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  int n = 2, r = 1, r_star = 1;
  double eps = 0.5;
  std::vector<double> fractions{0.1, 0.3, 0.5, 0.9};
  std::size_t samples = 10000;
  std::size_t probe_trials = 10;
  double probe_radius = 1e-3;
  std::uint64_t seed = 0;
  bool no_timestamp = false;
  std::string out_path;
  std::string summary_path;
  SolverArgs solver;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepOptions opts;
  opts.scan_samples = a.samples;
  opts.probe_trials = a.probe_trials;
  opts.probe_radius = a.probe_radius;
  opts.config = a.solver.config(a.seed);
  const auto rows = alpha_sweep(a.n, a.r, a.r_star, a.eps, a.fractions, opts);

  out << "fraction,alpha,delta,objective,min_quotient,probe_spurious,persists\n";
  std::string lines;
  bool all_persist = true;
  bool delta_increasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    out << num(row.fraction) << "," << num(row.alpha) << "," << num(row.delta) << "," << num(row.objective)
        << "," << num(row.min_quotient) << "," << num(row.spurious_fraction) << "," << (row.persists ? "yes" : "no") << "\n";
    lines += sweep_row_to_json(row).dump() + "\n";
    all_persist = all_persist && row.persists;
    if (i > 0 && !(row.delta > rows[i - 1].delta)) delta_increasing = false;
  }
  if (!a.out_path.empty()) write_file(a.out_path, lines);
  Json summary = {{"header", summary_header("sweep", a.seed, a.no_timestamp)},
                  {"rows", rows.size()},
                  {"all_persist", all_persist},
                  {"delta_increasing", delta_increasing}};
  if (!a.summary_path.empty()) write_file(a.summary_path, dump(summary));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// contour

struct ContourArgs {
  std::string instance_path;
  double u1_min = 0.0, u1_max = 1.5, u2_min = 0.0, u2_max = 1.5;
  int steps = 301;
  std::string out_path;
};

int cmd_contour(const ContourArgs& a, std::ostream& out) {
  const NamedInstance named = load_instance(a.instance_path);
  const Instance& inst = named.instance;
  detail::require(inst.is_symmetric() && inst.n1() == 2 && inst.r() == 1,
                  "contour needs a symmetric instance with n = 2 and r = 1");
  detail::require(a.steps >= 2, "--steps must be >= 2");
  std::string csv = "u1,u2,f\n";
  csv.reserve(static_cast<std::size_t>(a.steps) * static_cast<std::size_t>(a.steps) * 64);
  Matrix u(2, 1);
  char buf[96];
  const double last = a.steps - 1;
  for (int i = 0; i < a.steps; ++i) {
    u(0, 0) = a.u1_min + (a.u1_max - a.u1_min) * i / last;
    for (int j = 0; j < a.steps; ++j) {
      u(1, 0) = a.u2_min + (a.u2_max - a.u2_min) * j / last;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", u(0, 0), u(1, 0), eval_f(inst, u));
      csv += buf;
    }
  }
  emit(out, a.out_path, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string instance_path;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const NamedInstance named = load_instance(a.instance_path);
  const SensingOperator& op = named.instance.op();
  if (op.is_identity()) {
    out << "identity operator: delta = 0, nothing to verify\n";
    return kExitOk;
  }
  const MeasurementMap& map = op.map();
  const KernelOperator& kernel = map.kernel();
  const Index n = kernel.n();
  bool ok = true;

  if (n <= 8) {
    const auto analytic = kernel.eigenvalues();
    const auto dense = kernel.dense_eigenvalues();
    double err = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) err = std::max(err, std::abs(analytic[i] - dense[i]));
    const bool pass = err <= 1e-10;
    ok = ok && pass;
    out << "eigenvalues: max error " << num(err) << (pass ? " pass" : " FAIL") << "\n";
  } else {
    out << "eigenvalues: dense check skipped for n > 8\n";
  }

  double comp_err = 0.0, adj_err = 0.0;
  for (std::size_t s = 0; s < a.samples; ++s) {
    auto rng = sample_engine(a.seed, s);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const Matrix x = Matrix::NullaryExpr(n, n, [&]() { return unif(rng); });
    const Matrix y = Matrix::NullaryExpr(n, n, [&]() { return unif(rng); });
    comp_err = std::max(comp_err, (map.adjoint(map.apply(x)) - kernel.apply(x)).cwiseAbs().maxCoeff());
    adj_err = std::max(adj_err, std::abs(inner(map.apply(x), y) - inner(x, map.adjoint(y))));
  }
  const bool comp_pass = comp_err <= 1e-10, adj_pass = adj_err <= 1e-12;
  ok = ok && comp_pass && adj_pass;
  out << "composition: max error " << num(comp_err) << (comp_pass ? " pass" : " FAIL") << "\n";
  out << "adjoint: max error " << num(adj_err) << (adj_pass ? " pass" : " FAIL") << "\n";
  out << "delta: " << num(kernel.rip_constant()) << "\n";
  if (!ok) throw Mismatch("operator verification failed");
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Landscape tools for nonnegative low-rank matrix recovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nnlr 0.1.0");

  ConstructArgs ca;
  auto* construct = app.add_subcommand("construct", "Build a named instance and write it as JSON");
  construct->add_option("family", ca.family, "thm1-sym | thm1-asym | spu2 | benign-r1")
      ->required()
      ->check(CLI::IsMember({"thm1-sym", "thm1-asym", "spu2", "benign-r1"}));
  construct->add_option("-o,--out", ca.out_path, "Output file (default: stdout)");
  construct->add_option("--n", ca.n, "Matrix side (thm1) or length of a random u* (benign-r1)");
  construct->add_option("--r", ca.r, "Search rank")->capture_default_str();
  construct->add_option("--r-star", ca.r_star, "True rank")->capture_default_str();
  construct->add_option("--eps", ca.eps, "Coupling parameter")->capture_default_str();
  construct->add_option("--alpha", ca.alpha, "Absolute alpha (overrides --alpha-fraction)");
  construct->add_option("--alpha-fraction", ca.alpha_fraction, "alpha as a fraction of its upper bound")
      ->capture_default_str();
  construct->add_option("--lambda", ca.lambda, "Balancing weight")->capture_default_str();
  construct->add_option("--perm-cols", ca.perm_cols, "Identity columns forming Q")->delimiter(',');
  construct->add_option("--m", ca.m, "spu2: size of the all-ones block");
  construct->add_option("--k", ca.k, "spu2: size of the identity block")->capture_default_str();
  construct->add_option("--variant", ca.variant, "symmetric | asymmetric")
      ->check(CLI::IsMember({"symmetric", "asymmetric"}))
      ->capture_default_str();
  construct->add_option("--u-star", ca.u_star, "benign-r1: ground-truth vector")->delimiter(',');
  construct->add_option("--split", ca.split, "benign-r1 asymmetric: rows of L");
  construct->add_option("--seed", ca.seed, "Seed for a random u*")->capture_default_str();

  CertifyArgs ce;
  auto* certify = app.add_subcommand("certify", "Check optimality conditions at a candidate");
  certify->add_option("instance", ce.instance_path, "Instance JSON")->required();
  certify->add_option("--candidate", ce.candidate, "Candidate name")->required();
  certify->add_option("--samples", ce.samples, "Cone samples")->capture_default_str();
  certify->add_option("--ball-samples", ce.ball_samples, "Ball samples (spu2 U0)")->capture_default_str();
  certify->add_option("--seed", ce.seed)->capture_default_str();
  certify->add_option("--tol", ce.tol, "First-order tolerance")->capture_default_str();
  certify->add_option("-o,--out", ce.out_path, "Certificate JSON");

  BasinArgs ra;
  auto* run = app.add_subcommand("run", "Run projected gradient descent once");
  BasinArgs ba;
  auto* basins = app.add_subcommand("basins", "Basin-of-attraction experiment");
  for (auto [sub, args] : {std::pair{run, &ra}, std::pair{basins, &ba}}) {
    sub->add_option("instance", args->instance_path, "Instance JSON")->required();
    sub->add_option("--init", args->init, "uniform | near:<candidate>")->capture_default_str();
    sub->add_option("--radius", args->radius, "Near-candidate perturbation norm")->capture_default_str();
    sub->add_option("--u-max", args->u_max, "Uniform init upper end (0: twice the largest truth entry)");
    sub->add_option("--escape", args->escape, "Saddle-escape restarts")->capture_default_str();
    sub->add_option("--seed", args->seed)->capture_default_str();
    sub->add_flag("--no-timestamp", args->no_timestamp, "Omit the timestamp from summaries");
    sub->add_option("-o,--out", args->out_path, "Result JSON (run) or JSON-lines records (basins)");
    add_solver_flags(sub, args->solver);
  }
  run->add_option("--trajectory", ra.trajectory_path, "Trajectory CSV");
  basins->add_option("--trials", ba.trials)->capture_default_str();
  basins->add_option("--summary", ba.summary_path, "Summary JSON");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Certify the spurious point across alpha fractions");
  sweep->add_option("--n", sa.n)->capture_default_str();
  sweep->add_option("--r", sa.r)->capture_default_str();
  sweep->add_option("--r-star", sa.r_star)->capture_default_str();
  sweep->add_option("--eps", sa.eps)->capture_default_str();
  sweep->add_option("--fractions", sa.fractions, "alpha fractions in (0, 1)")->delimiter(',');
  sweep->add_option("--samples", sa.samples, "Cone samples per row")->capture_default_str();
  sweep->add_option("--probe-trials", sa.probe_trials)->capture_default_str();
  sweep->add_option("--probe-radius", sa.probe_radius)->capture_default_str();
  sweep->add_option("--seed", sa.seed)->capture_default_str();
  sweep->add_flag("--no-timestamp", sa.no_timestamp);
  sweep->add_option("-o,--out", sa.out_path, "JSON-lines rows");
  sweep->add_option("--summary", sa.summary_path, "Summary JSON");
  add_solver_flags(sweep, sa.solver);

  ContourArgs co;
  auto* contour = app.add_subcommand("contour", "Objective values on a grid (n = 2, r = 1)");
  contour->add_option("instance", co.instance_path, "Instance JSON")->required();
  contour->add_option("--u1-min", co.u1_min)->capture_default_str();
  contour->add_option("--u1-max", co.u1_max)->capture_default_str();
  contour->add_option("--u2-min", co.u2_min)->capture_default_str();
  contour->add_option("--u2-max", co.u2_max)->capture_default_str();
  contour->add_option("--steps", co.steps, "Grid points per axis")->capture_default_str();
  contour->add_option("-o,--out", co.out_path, "CSV output (default: stdout)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check operator spectrum and realization identities");
  verify->add_option("instance", va.instance_path, "Instance JSON")->required();
  verify->add_option("--samples", va.samples)->capture_default_str();
  verify->add_option("--seed", va.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*construct) return cmd_construct(ca, out, err);
    if (*certify) return cmd_certify(ce, out);
    if (*run) return cmd_run(ra, out);
    if (*basins) return cmd_basins(ba, out);
    if (*sweep) return cmd_sweep(sa, out);
    if (*contour) return cmd_contour(co, out);
    if (*verify) return cmd_verify(va, out);
  } catch (const Mismatch& e) {
    err << "mismatch: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Json::exception& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nnlr
