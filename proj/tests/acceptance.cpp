// Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

#include "nnlr/cli.hpp"
#include "nnlr/parallel.hpp"
#include "nnlr/serialization.hpp"
#include "nnlr/solver.hpp"
#include "oracles.hpp"

using namespace nnlr;
namespace fs = std::filesystem;

namespace {

// Collects failures of one criterion and the outputs it serialized.
struct Report {
  std::vector<std::string> failures;
  std::string artifact;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 10) failures.push_back(what);
  }
  bool passed() const { return failures.empty(); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string label(int n, int r, int rs, double eps) {
  std::ostringstream os;
  os << "(n=" << n << ",r=" << r << ",r*=" << rs << ",eps=" << eps << ")";
  return os.str();
}

struct GridPoint {
  int n, r, rs;
  double eps, alpha;
};

std::vector<GridPoint> spectrum_grid() {
  std::vector<GridPoint> g;
  for (int rs : {1, 2})
    for (int r : {rs, rs + 1})
      for (double eps : {0.1, 0.5})
        for (int n = r + rs; n <= 8; ++n) g.push_back({n, r, rs, eps, 0.5 * alpha_upper_bound(r, rs, eps)});
  return g;
}

Matrix stack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

// ---------------------------------------------------------------------------

Report kernel_spectrum(int) {
  Report rep;
  double worst = 0.0;
  for (const auto& g : spectrum_grid()) {
    const auto k = KernelOperator::build(g.n, g.r, g.rs, g.eps, g.alpha);
    const double delta = g.alpha * g.alpha * std::sqrt(double(g.r) / g.rs + 2.0 * g.eps * g.eps * g.r);
    rep.expect(std::abs(k.rip_constant() - delta) <= 1e-14, "delta closed form " + label(g.n, g.r, g.rs, g.eps));
    Eigen::SelfAdjointEigenSolver<Matrix> es(k.dense_vec_form());
    Vector ev = es.eigenvalues();  // ascending
    const Index m = ev.size();
    Vector expected = Vector::Ones(m);
    expected(0) = 1.0 - delta;
    expected(m - 1) = 1.0 + delta;
    const double err = (ev - expected).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    rep.expect(err <= 1e-10, "spectrum " + label(g.n, g.r, g.rs, g.eps) + " err " + fmt("%.3g", err));
  }
  rep.summary = std::to_string(spectrum_grid().size()) + " grid points, max eigenvalue error " + fmt("%.2e", worst);
  return rep;
}

Report realization(int) {
  Report rep;
  std::mt19937_64 rng(2024);
  double worst_comp = 0.0, worst_adj = 0.0;
  for (const auto& g : spectrum_grid()) {
    const auto k = KernelOperator::build(g.n, g.r, g.rs, g.eps, g.alpha);
    const auto map = MeasurementMap::build(k);
    const auto dense = oracle::vec_form(g.n, g.r, g.rs, g.eps, g.alpha);
    for (int t = 0; t < 100; ++t) {
      const Matrix x = oracle::uniform(g.n, g.n, rng);
      const Matrix y = oracle::uniform(g.n, g.n, rng);
      const double comp = (map.adjoint(map.apply(x)) - oracle::apply_dense(dense.h, x)).norm();
      const double adj = std::abs(inner(map.apply(x), y) - inner(x, map.adjoint(y)));
      worst_comp = std::max(worst_comp, comp);
      worst_adj = std::max(worst_adj, adj);
    }
  }
  rep.expect(worst_comp <= 1e-10, "composition error " + fmt("%.3g", worst_comp));
  rep.expect(worst_adj <= 1e-12, "adjoint error " + fmt("%.3g", worst_adj));
  rep.summary = "composition " + fmt("%.2e", worst_comp) + ", adjoint " + fmt("%.2e", worst_adj);
  return rep;
}

Report derivatives(int) {
  Report rep;
  std::mt19937_64 rng(77);
  std::vector<Instance> sym = {
      make_thm1_symmetric(5, 2, 1, 0.5, 0.6 * alpha_upper_bound(2, 1, 0.5)).instance,
      make_thm1_symmetric(6, 3, 2, 0.1, 0.5 * alpha_upper_bound(3, 2, 0.1)).instance,
      make_spu2(3, 1, 2, Variant::Symmetric).instance};
  std::vector<Instance> asym = {
      make_thm1_asymmetric(5, 2, 1, 0.5, 0.6 * alpha_upper_bound(2, 1, 0.5), 0.25).instance,
      make_thm1_asymmetric(4, 2, 2, 0.3, 0.4, 1.0).instance,
      Instance::asymmetric(SensingOperator::identity(), oracle::uniform(3, 2, rng, 0, 1),
                           oracle::uniform(4, 2, rng, 0, 1), 3, 0.7)};
  double g_err = 0.0, h_err = 0.0, pol_err = 0.0;
  auto grad_check = [&](const std::function<double(const Matrix&)>& fn, const Matrix& an, const Matrix& x) {
    const Matrix fd = oracle::fd_gradient(fn, x);
    for (Index i = 0; i < x.size(); ++i) g_err = std::max(g_err, oracle::rel_err(an.data()[i], fd.data()[i]));
  };
  auto hess_check = [&](const std::function<double(const Matrix&)>& fn, double an, const Matrix& x, const Matrix& d) {
    h_err = std::max(h_err, oracle::rel_err(an, oracle::second_difference(fn, x, d)));
  };
  for (const auto& inst : sym) {
    for (int t = 0; t < 20; ++t) {
      const Matrix u = oracle::uniform(inst.n1(), inst.r(), rng);
      const Matrix d = oracle::uniform(inst.n1(), inst.r(), rng);
      auto f = [&](const Matrix& p) { return eval_f(inst, p); };
      grad_check(f, grad_f(inst, u), u);
      hess_check(f, hess_quad_f(inst, u, d), u, d);
    }
  }
  for (const auto& inst : asym) {
    const Index n1 = inst.n1(), n2 = inst.n2();
    for (int t = 0; t < 20; ++t) {
      const Matrix l = oracle::uniform(n1, inst.r(), rng), r = oracle::uniform(n2, inst.r(), rng);
      const Matrix dl = oracle::uniform(n1, inst.r(), rng), dr = oracle::uniform(n2, inst.r(), rng);
      const Matrix el = oracle::uniform(n1, inst.r(), rng), er = oracle::uniform(n2, inst.r(), rng);
      const Matrix x = stack(l, r), d = stack(dl, dr);
      auto g = [&](const Matrix& p) { return eval_g(inst, p.topRows(n1), p.bottomRows(n2)); };
      auto h = [&](const Matrix& p) { return eval_h(p.topRows(n1), p.bottomRows(n2)); };
      auto obj = [&](const Matrix& p) { return eval_objective(inst, p); };
      grad_check(g, grad_g(inst, l, r), x);
      grad_check(h, grad_h(l, r), x);
      grad_check(obj, grad_objective(inst, x), x);
      hess_check(g, hess_quad_g(inst, l, r, dl, dr), x, d);
      hess_check(h, hess_quad_h(l, r, dl, dr), x, d);
      hess_check(obj, hess_quad_objective(inst, x, d), x, d);
      const double cross = hess_cross_g(inst, l, r, dl, dr, el, er);
      const double polar = 0.25 * (hess_quad_g(inst, l, r, dl + el, dr + er) - hess_quad_g(inst, l, r, dl - el, dr - er));
      pol_err = std::max(pol_err, std::abs(cross - polar));
    }
  }
  rep.expect(g_err <= 1e-6, "gradient relative error " + fmt("%.3g", g_err));
  rep.expect(h_err <= 1e-5, "hessian relative error " + fmt("%.3g", h_err));
  rep.expect(pol_err <= 1e-10, "polarization error " + fmt("%.3g", pol_err));
  rep.summary = "gradient " + fmt("%.2e", g_err) + ", hessian " + fmt("%.2e", h_err) + ", polarization " +
                fmt("%.2e", pol_err);
  return rep;
}

const ClosedFormCheck* find_check(const Certificate& cert, const std::string& name) {
  for (const auto& c : cert.checks)
    if (c.name == name) return &c;
  return nullptr;
}

void require_check(Report& rep, const Certificate& cert, const std::string& name, double max_tol,
                   const std::string& where) {
  const ClosedFormCheck* c = find_check(cert, name);
  rep.expect(c != nullptr, name + " missing " + where);
  if (!c) return;
  rep.expect(c->tol <= max_tol, name + " tolerance too loose " + where);
  rep.expect(c->passed, name + " failed " + where + ": expected " + fmt("%.17g", c->expected) + " got " +
                            fmt("%.17g", c->actual));
}

Report symmetric_certificate(int workers) {
  Report rep;
  std::vector<GridPoint> grid = {{2, 1, 1, 0.5, 0.5}};
  for (int rs : {1, 2})
    for (int r : {rs, rs + 1})
      for (double eps : {0.1, 0.5}) grid.push_back({r + rs + 1, r, rs, eps, 0.5 * alpha_upper_bound(r, rs, eps)});
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& g : grid) {
    const std::string where = label(g.n, g.r, g.rs, g.eps);
    const auto named = make_thm1_symmetric(g.n, g.r, g.rs, g.eps, g.alpha);
    const Matrix u0 = named.candidate("U0").point;
    ScanOptions scan;
    scan.num_samples = 10000;
    scan.seed = 100;
    scan.workers = workers;
    const Certificate cert = structured_certificate_thm1(named.instance, u0, scan);
    require_check(rep, cert, "complementarity", 1e-12, where);
    require_check(rep, cert, "gradient_block_value", 1e-12, where);
    require_check(rep, cert, "gradient_pattern_max_deviation", 1e-12, where);
    require_check(rep, cert, "objective_closed_form", 1e-12, where);
    require_check(rep, cert, "objective_lower_bound", 1e-12, where);
    require_check(rep, cert, "cone_curvature_bound", 1e-9, where);
    rep.expect(cert.classification == Classification::SpuriousCandidate, "classification " + where);
    rep.expect(cert.second_order && cert.second_order->samples == 10000, "sample count " + where);

    // Independent values from the dense realization.
    const auto dense = oracle::vec_form(g.n, g.r, g.rs, g.eps, g.alpha);
    const double f_dense = oracle::dense_f(oracle::dense_realization(dense), u0, named.instance.target());
    const double closed = 0.5 * (g.rs - std::pow(g.alpha, 4) * g.r);
    const double delta = named.instance.op().rip_constant();
    rep.expect(std::abs(f_dense - closed) <= 1e-12, "dense objective " + where);
    rep.expect(closed >= 0.5 * g.rs * (1.0 - delta * delta), "lower bound " + where);
    const Matrix grad = grad_f(named.instance, u0);
    rep.expect(std::abs(grad(0, 0) - 2.0 * std::pow(g.alpha, 3) * g.eps) <= 1e-12, "gradient block " + where);
    if (cert.second_order)
      worst_margin = std::min(worst_margin, cert.second_order->min_quotient - g.alpha * g.alpha);
    rep.artifact += dump(certificate_to_json(cert));
  }
  rep.summary = std::to_string(grid.size()) + " instances, min(quotient - alpha^2) = " + fmt("%.3g", worst_margin);
  return rep;
}

Report asymmetric_certificate(int workers) {
  Report rep;
  double zero_min = std::numeric_limits<double>::infinity(), zero_max = -zero_min;
  for (auto [n, r, rs] : {std::tuple{2, 1, 1}, std::tuple{4, 2, 1}, std::tuple{5, 2, 2}}) {
    for (double lambda : {0.0, 0.25, 1.0}) {
      const double alpha = 0.5 * alpha_upper_bound(r, rs, 0.5);
      const std::string where = label(n, r, rs, 0.5) + " lambda=" + fmt("%g", lambda);
      const auto named = make_thm1_asymmetric(n, r, rs, 0.5, alpha, lambda);
      ScanOptions scan;
      scan.num_samples = 10000;
      scan.seed = 200;
      scan.workers = workers;
      const Certificate cert = structured_certificate_thm1(named.instance, named.candidate("U0").point, scan);
      rep.expect(cert.first_order.passed, "first order " + where);
      rep.expect(cert.second_order.has_value(), "second-order scan missing " + where);
      if (!cert.second_order) continue;
      const double q = cert.second_order->min_quotient;
      if (lambda > 0.0) {
        rep.expect(q >= std::min(lambda, 0.25) * alpha * alpha - 1e-9, "quotient " + fmt("%.6g", q) + " " + where);
      } else {
        zero_min = std::min(zero_min, q);
        zero_max = std::max(zero_max, q);
        rep.expect(q >= -1e-9 && q <= 1e-6, "lambda=0 quotient " + fmt("%.3g", q) + " " + where);
      }
      rep.artifact += dump(certificate_to_json(cert));
    }
  }
  rep.summary = "lambda=0 quotient infimum in [" + fmt("%.2e", zero_min) + ", " + fmt("%.2e", zero_max) + "]";
  return rep;
}

Report gradient_inheritance(int) {
  Report rep;
  std::mt19937_64 rng(66);
  double worst = 0.0;
  for (auto [n, r, rs, eps] : {std::tuple{2, 1, 1, 0.5}, std::tuple{5, 2, 1, 0.1}, std::tuple{7, 3, 2, 0.5}}) {
    const double alpha = 0.7 * alpha_upper_bound(r, rs, eps);
    const auto sym = make_thm1_symmetric(n, r, rs, eps, alpha).instance;
    const auto asym = make_thm1_asymmetric(n, r, rs, eps, alpha, 0.0).instance;
    for (int t = 0; t < 20; ++t) {
      const Matrix u = oracle::uniform(n, r, rng, 0.0, 1.0);
      const Matrix gf = grad_f(sym, u);
      const Matrix gg = grad_g(asym, u, u);
      worst = std::max(worst, (gg - 0.5 * stack(gf, gf)).cwiseAbs().maxCoeff());
      rep.artifact += matrix_to_json(gg).dump() + "\n";
    }
  }
  rep.expect(worst <= 1e-12, "max deviation " + fmt("%.3g", worst));
  rep.summary = "max deviation " + fmt("%.2e", worst);
  return rep;
}

Report spu2_neighborhood(int workers) {
  Report rep;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (auto [m, k, r] : {std::tuple{3, 1, 2}, std::tuple{5, 2, 3}, std::tuple{7, 1, 4}}) {
    const double rho = 1.0 / (4.0 * r * std::sqrt(double(m)));
    std::vector<std::pair<std::string, NamedInstance>> variants = {
        {"sym", make_spu2(m, k, r, Variant::Symmetric)},
        {"asym lambda=0", make_spu2(m, k, r, Variant::Asymmetric, 0.0)},
        {"asym lambda=1/4", make_spu2(m, k, r, Variant::Asymmetric, 0.25)}};
    for (const auto& [tag, named] : variants) {
      std::ostringstream where;
      where << "(m=" << m << ",k=" << k << ",r=" << r << ") " << tag;
      const Matrix u0 = named.candidate("U0").point;
      const double gap =
          eval_objective(named.instance, u0) - eval_objective(named.instance, named.candidate("Ustar").point);
      rep.expect(std::abs(gap - 0.5 * k) <= 1e-12, "objective gap " + where.str());
      ScanOptions scan;
      scan.num_samples = 2000;
      scan.seed = 300;
      scan.workers = workers;
      const Certificate cert = structured_certificate_spu2(named.instance, u0, k, rho, 100000, scan);
      require_check(rep, cert, "objective_gap_closed_form", 1e-12, where.str());
      require_check(rep, cert, "ball_min_gap", 1e-12, where.str());
      if (const auto* c = find_check(cert, "ball_min_gap")) worst_gap = std::min(worst_gap, c->actual);
      rep.artifact += dump(certificate_to_json(cert));
    }
  }
  rep.summary = "9 neighborhoods x 1e5 samples, min objective gap " + fmt("%.3g", worst_gap);
  return rep;
}

Report benign_regime(int workers) {
  Report rep;
  constexpr int kTrials = 50;
  std::vector<Json> records(kTrials);
  std::vector<std::string> fails(kTrials);
  std::vector<double> gram_err(kTrials);
  parallel_for(kTrials, [&](std::size_t t) {
    auto rng = sample_engine(7, t);
    std::uniform_int_distribution<int> nd(1, 6), rd(1, 2);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const int n = nd(rng), r = rd(rng);
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = ud(rng);
    const auto named = make_benign_rank1(u, r, Variant::Symmetric);
    SolverConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iters = 5000000;
    cfg.seed = t;
    cfg.classify_samples = 500;
    cfg.workers = 1;
    const Matrix init = draw_init(named, InitDistribution{}, 11, t);
    const RunResult res = pgd_with_escapes(named.instance, init, cfg, 3);
    gram_err[t] = (gram(named.instance, res.point) - named.instance.target()).norm();
    const BenignReport br = benign_rank1_classifier(named.instance, res.point);
    std::ostringstream why;
    if (!(init.minCoeff() > 0.0)) why << " init not strictly positive;";
    if (!(gram_err[t] <= 1e-6)) why << " gram error " << gram_err[t] << ";";
    if (!br.first_order_critical) why << " hypotheses fail;";
    if (br.branch == BenignBranch::Neither) why << " classifier branch Neither;";
    fails[t] = why.str();
    records[t] = Json{{"trial", t}, {"n", n}, {"r", r}, {"branch", std::string(to_string(br.branch))},
                  {"gram_error", gram_err[t]}, {"result", run_result_to_json(res)}};
  }, workers);
  double worst = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    worst = std::max(worst, gram_err[t]);
    rep.expect(fails[t].empty(), "trial " + std::to_string(t) + ":" + fails[t]);
    rep.artifact += records[t].dump() + "\n";
  }
  rep.summary = "50 trials, worst gram error " + fmt("%.2e", worst);
  return rep;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nnlr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Report figure_reproduction(int workers) {
  Report rep;
  const fs::path dir = fs::temp_directory_path() / ("nnlr_acceptance_" + std::to_string(workers));
  fs::create_directories(dir);
  const std::string inst = (dir / "fig.json").string();
  const auto made = cli({"construct", "thm1-sym", "--n", "2", "--r", "1", "--r-star", "1", "--eps", "0.5", "--alpha",
                         "0.5", "-o", inst});
  rep.expect(made.code == 0, "construct failed: " + made.err);
  if (made.code != 0) return rep;
  const double delta = load_instance(inst).instance.op().rip_constant();
  rep.expect(std::abs(delta - 0.25 * std::sqrt(1.5)) <= 1e-12, "delta " + fmt("%.17g", delta));
  rep.expect(made.out.find("delta: 0.30618621784789724") != std::string::npos, "delta not reported");

  const auto contour = cli({"contour", inst, "--steps", "301", "-o", (dir / "contour.csv").string()});
  rep.expect(contour.code == 0, "contour failed: " + contour.err);
  const std::string csv = read_file(dir / "contour.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  rep.expect(line == "u1,u2,f", "contour header");
  bool u0 = false, ustar = false;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream ls(line);
    double u1, u2, f;
    char c;
    ls >> u1 >> c >> u2 >> c >> f;
    if (u1 == 0.0 && u2 == 0.5) u0 = std::abs(f - 0.46875) <= 1e-12;
    if (u1 == 1.0 && u2 == 0.0) ustar = std::abs(f) <= 1e-12;
  }
  rep.expect(u0, "f(0, 0.5) missing or off");
  rep.expect(ustar, "f(1, 0) missing or off");

  const std::string records = (dir / "basins.jsonl").string();
  const auto basins = cli({"basins", inst, "--init", "near:U0", "--radius", "1e-3", "--trials", "100", "--seed", "5",
                           "--no-timestamp", "-o", records});
  rep.expect(basins.code == 0, "basins failed: " + basins.err);
  std::istringstream recs(read_file(records));
  std::size_t within = 0, trials = 0;
  while (std::getline(recs, line)) {
    ++trials;
    const Matrix p = matrix_from_json(Json::parse(line)["result"]["point"], "point");
    if (std::hypot(p(0, 0) - 0.0, p(1, 0) - 0.5) <= 1e-3) ++within;
  }
  rep.expect(trials == 100 && within == 100,
             std::to_string(within) + " of " + std::to_string(trials) + " trials ended near (0, 0.5)");
  rep.artifact = csv + read_file(records);
  fs::remove_all(dir);
  rep.summary = std::to_string(rows) + " contour rows, " + std::to_string(within) + "/100 trials stayed at (0, 0.5)";
  return rep;
}

Report alpha_persistence(int workers) {
  Report rep;
  SweepOptions opt;
  opt.scan_samples = 10000;
  opt.probe_trials = 10;
  opt.config.seed = 400;
  opt.config.workers = workers;
  const auto rows = alpha_sweep(2, 1, 1, 0.5, {0.1, 0.3, 0.5, 0.9}, opt);
  rep.expect(rows.size() == 4, "row count");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rep.expect(rows[i].certificate_passed, "certificate at fraction " + fmt("%g", rows[i].fraction));
    if (i > 0) rep.expect(rows[i].delta > rows[i - 1].delta, "delta not increasing at " + fmt("%g", rows[i].fraction));
    rep.artifact += sweep_row_to_json(rows[i]).dump() + "\n";
  }
  if (!rows.empty()) rep.summary = "delta from " + fmt("%.3g", rows.front().delta) + " to " + fmt("%.3g", rows.back().delta);
  return rep;
}

using Criterion = std::function<Report(int)>;

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria = {
      {"kernel spectrum", kernel_spectrum},
      {"realization correctness", realization},
      {"derivative correctness", derivatives},
      {"symmetric spurious certificate", symmetric_certificate},
      {"asymmetric spurious certificate", asymmetric_certificate},
      {"gradient inheritance", gradient_inheritance},
      {"fully observed spurious neighborhood", spu2_neighborhood},
      {"benign rank-one regime", benign_regime},
      {"figure reproduction", figure_reproduction},
      {"alpha sweep persistence", alpha_persistence},
  };

  int failed = 0;
  std::vector<std::string> artifacts;
  auto print = [&](std::size_t id, const std::string& name, bool ok, double secs, const std::string& summary,
                   const std::vector<std::string>& failures) {
    std::printf("[%s] %2zu %-38s %6.2fs  %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), secs, summary.c_str());
    for (const auto& f : failures) std::printf("         - %s\n", f.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  };

  const int workers = worker_count();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    try {
      rep = criteria[i].second(workers);
    } catch (const std::exception& e) {
      rep.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    print(i + 1, criteria[i].first, rep.passed(), secs, rep.summary, rep.failures);
    artifacts.push_back(rep.artifact);
  }

  // Repeat the output-producing criteria with a different worker count.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const int other = workers == 1 ? 3 : 1;
    std::vector<std::string> failures;
    for (std::size_t i = 3; i < criteria.size(); ++i) {
      try {
        const Report again = criteria[i].second(other);
        if (artifacts[i].empty() || again.artifact != artifacts[i])
          failures.push_back("criterion " + std::to_string(i + 1) + " output differs on repeat");
      } catch (const std::exception& e) {
        failures.push_back("criterion " + std::to_string(i + 1) + " exception: " + e.what());
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    print(11, "determinism", failures.empty(), secs,
          "criteria 4-10 repeated with " + std::to_string(other) + " workers", failures);
  }

  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
