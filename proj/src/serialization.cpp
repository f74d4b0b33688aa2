#include "nnlr/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace nnlr {

namespace {

[[noreturn]] void schema_fail(const std::string& field, const std::string& what) {
  throw SchemaError("field '" + field + "': " + what);
}

const Json& member(const Json& j, const std::string& parent, const char* key) {
  const std::string field = parent.empty() ? key : parent + "." + key;
  if (!j.is_object()) schema_fail(parent.empty() ? "<root>" : parent, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_fail(field, "missing");
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) schema_fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_fail(field, "must be finite");
  return v;
}

int integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) schema_fail(field, "expected an integer");
  return j.get<int>();
}

std::string string(const Json& j, const std::string& field) {
  if (!j.is_string()) schema_fail(field, "expected a string");
  return j.get<std::string>();
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

Matrix candidate_point_from_json(const Json& j, const std::string& field, Variant v) {
  if (v == Variant::Symmetric) return matrix_from_json(j, field);
  if (!j.is_object()) schema_fail(field, "expected an object {\"L\": ..., \"R\": ...}");
  const Matrix l = matrix_from_json(member(j, field, "L"), join(field, "L"));
  const Matrix r = matrix_from_json(member(j, field, "R"), join(field, "R"));
  if (l.cols() != r.cols()) schema_fail(field, "L and R must have equal column counts");
  Matrix out(l.rows() + r.rows(), l.cols());
  out << l, r;
  return out;
}

Json candidate_point_to_json(const Instance& inst, const Matrix& stacked) {
  if (inst.is_symmetric()) return matrix_to_json(stacked);
  return {{"L", matrix_to_json(stacked.topRows(inst.n1()))},
          {"R", matrix_to_json(stacked.bottomRows(inst.n2()))}};
}

void require_nonneg(const Matrix& m, const std::string& field) {
  if (m.size() > 0 && m.minCoeff() < 0.0) schema_fail(field, "entries must be nonnegative");
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) schema_fail(field, "expected a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string row_field = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array()) schema_fail(row_field, "expected an array");
    if (j[i].size() != cols) schema_fail(row_field, "ragged row (expected " + std::to_string(cols) + " entries)");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(i), static_cast<Index>(c)) =
          number(j[i][c], row_field + "[" + std::to_string(c) + "]");
  }
  return m;
}

Json kernel_params_to_json(const KernelParams& p) {
  return {{"n", p.n}, {"r", p.r}, {"r_star", p.r_star}, {"eps", p.eps}, {"alpha", p.alpha},
          {"perm_cols", p.perm_cols}};
}

KernelParams kernel_params_from_json(const Json& j) {
  const std::string f = "operator";
  KernelParams p;
  p.n = integer(member(j, f, "n"), f + ".n");
  p.r = integer(member(j, f, "r"), f + ".r");
  p.r_star = integer(member(j, f, "r_star"), f + ".r_star");
  p.eps = number(member(j, f, "eps"), f + ".eps");
  p.alpha = number(member(j, f, "alpha"), f + ".alpha");
  if (auto it = j.find("perm_cols"); it != j.end()) {
    if (!it->is_array()) schema_fail(f + ".perm_cols", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      p.perm_cols.push_back(integer((*it)[i], f + ".perm_cols[" + std::to_string(i) + "]"));
  }
  return p;
}

Json instance_to_json(const NamedInstance& named) {
  const Instance& inst = named.instance;
  Json j;
  j["variant"] = std::string(to_string(inst.variant()));
  if (inst.op().is_identity()) {
    j["operator"] = {{"kind", "identity"}};
  } else {
    Json op = kernel_params_to_json(inst.op().map().kernel().params());
    op["kind"] = "thm1";
    j["operator"] = op;
  }
  if (inst.is_symmetric()) {
    j["U_star"] = matrix_to_json(inst.u_star());
  } else {
    j["L_star"] = matrix_to_json(inst.l_star());
    j["R_star"] = matrix_to_json(inst.r_star_factor());
  }
  j["r"] = inst.r();
  j["lambda"] = inst.lambda();
  Json cands = Json::array();
  for (const auto& c : named.candidates) {
    Json cj = {{"name", c.name},
               {"point", candidate_point_to_json(inst, c.point)},
               {"expected", std::string(to_string(c.expected))},
               {"note", c.note}};
    if (c.quotient_bound) cj["quotient_bound"] = *c.quotient_bound;
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  j["provenance"] = {{"family", named.provenance.family}, {"params", named.provenance.params}};
  j["warnings"] = named.warnings;
  return j;
}

NamedInstance instance_from_json(const Json& j) {
  if (!j.is_object()) schema_fail("<root>", "expected an object");
  Variant variant;
  try {
    variant = variant_from_string(string(member(j, "", "variant"), "variant"));
  } catch (const InvalidArgument& e) {
    schema_fail("variant", e.what());
  }

  const Json& opj = member(j, "", "operator");
  const std::string kind = string(member(opj, "operator", "kind"), "operator.kind");
  SensingOperator op;
  if (kind == "thm1") {
    const KernelParams params = kernel_params_from_json(opj);
    try {
      op = SensingOperator(MeasurementMap::build(KernelOperator::build(params)));
    } catch (const InvalidArgument& e) {
      schema_fail("operator", e.what());
    }
  } else if (kind != "identity") {
    schema_fail("operator.kind", "expected \"thm1\" or \"identity\", got \"" + kind + "\"");
  }

  const int r = integer(member(j, "", "r"), "r");
  double lambda = 0.0;
  if (auto it = j.find("lambda"); it != j.end()) lambda = number(*it, "lambda");

  auto build = [&]() -> Instance {
    try {
      if (variant == Variant::Symmetric) {
        Matrix u = matrix_from_json(member(j, "", "U_star"), "U_star");
        require_nonneg(u, "U_star");
        return Instance::symmetric(op, std::move(u), r);
      }
      Matrix l = matrix_from_json(member(j, "", "L_star"), "L_star");
      Matrix rs = matrix_from_json(member(j, "", "R_star"), "R_star");
      require_nonneg(l, "L_star");
      require_nonneg(rs, "R_star");
      return Instance::asymmetric(op, std::move(l), std::move(rs), r, lambda);
    } catch (const InvalidArgument& e) {
      schema_fail("instance", e.what());
    }
  };
  NamedInstance named{build(), {}, {}, {}};

  if (auto it = j.find("candidates"); it != j.end()) {
    if (!it->is_array()) schema_fail("candidates", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string f = "candidates[" + std::to_string(i) + "]";
      const Json& cj = (*it)[i];
      Candidate c;
      c.name = string(member(cj, f, "name"), f + ".name");
      c.point = candidate_point_from_json(member(cj, f, "point"), f + ".point", variant);
      if (c.point.rows() != named.instance.stacked_rows() || c.point.cols() != r)
        schema_fail(f + ".point", "shape " + detail::shape_str(c.point) + " does not match the instance");
      try {
        c.expected = classification_from_string(string(member(cj, f, "expected"), f + ".expected"));
      } catch (const InvalidArgument& e) {
        schema_fail(f + ".expected", e.what());
      }
      if (auto q = cj.find("quotient_bound"); q != cj.end()) c.quotient_bound = number(*q, f + ".quotient_bound");
      if (auto n = cj.find("note"); n != cj.end()) c.note = string(*n, f + ".note");
      named.candidates.push_back(std::move(c));
    }
  }
  if (auto it = j.find("provenance"); it != j.end()) {
    named.provenance.family = string(member(*it, "provenance", "family"), "provenance.family");
    if (auto p = it->find("params"); p != it->end()) named.provenance.params = *p;
  }
  if (auto it = j.find("warnings"); it != j.end()) {
    if (!it->is_array()) schema_fail("warnings", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      named.warnings.push_back(string((*it)[i], "warnings[" + std::to_string(i) + "]"));
  }
  return named;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_instance(const NamedInstance& named, const std::filesystem::path& path) {
  write_file(path, dump(instance_to_json(named)));
}

NamedInstance load_instance(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return instance_from_json(j);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json certificate_to_json(const Certificate& cert) {
  Json j;
  j["classification"] = std::string(to_string(cert.classification));
  j["basis"] = cert.basis;
  j["objective"] = cert.objective;
  j["objective_gap"] = cert.objective_gap;
  j["seed"] = cert.seed;
  const auto& fo = cert.first_order;
  j["first_order"] = {{"feasibility_margin", fo.feasibility_margin},
                      {"gradient_margin", fo.gradient_margin},
                      {"complementarity", fo.complementarity},
                      {"tol", fo.tol},
                      {"passed", fo.passed}};
  j["empty_cone"] = cert.empty_cone;
  if (cert.second_order) {
    const auto& so = *cert.second_order;
    j["second_order"] = {{"min_quotient", so.min_quotient},
                         {"sampled_min", so.sampled_min},
                         {"samples", so.samples},
                         {"argmin_sample", so.argmin_sample},
                         {"from_refinement", so.from_refinement},
                         {"direction", matrix_to_json(so.direction)}};
  } else {
    j["second_order"] = nullptr;
  }
  Json checks = Json::array();
  for (const auto& c : cert.checks)
    checks.push_back({{"name", c.name}, {"expected", c.expected}, {"actual", c.actual},
                      {"tol", c.tol}, {"passed", c.passed}});
  j["checks"] = std::move(checks);
  return j;
}

Json run_result_to_json(const RunResult& res, bool include_trajectory) {
  Json j = {{"iterations", res.iterations},
            {"objective", res.objective},
            {"residual", res.residual},
            {"converged", res.converged},
            {"classification", std::string(to_string(res.classification))},
            {"restarts", res.restarts},
            {"escape_failed", res.escape_failed},
            {"point", matrix_to_json(res.point)}};
  if (include_trajectory) {
    Json t = Json::array();
    for (const auto& p : res.trajectory) t.push_back({p.iter, p.objective, p.residual});
    j["trajectory"] = std::move(t);
  }
  return j;
}

Json trial_record_to_json(const TrialRecord& rec) {
  return {{"trial", rec.trial},
          {"basin", std::string(to_string(rec.basin))},
          {"matched_candidate", rec.matched_candidate},
          {"global_gram_distance", rec.global_gram_distance},
          {"init", matrix_to_json(rec.init)},
          {"result", run_result_to_json(rec.result)}};
}

Json basin_summary_to_json(const BasinSummary& s) {
  return {{"trials", s.trials},
          {"counts", {{"GlobalBasin", s.global}, {"SpuriousBasin", s.spurious}, {"Other", s.other}}},
          {"fractions",
           {{"GlobalBasin", s.fraction(Basin::Global)},
            {"SpuriousBasin", s.fraction(Basin::Spurious)},
            {"Other", s.fraction(Basin::Other)}}}};
}

Json sweep_row_to_json(const SweepRow& row) {
  return {{"fraction", row.fraction},         {"alpha", row.alpha},
          {"delta", row.delta},               {"objective", row.objective},
          {"closed_form", row.closed_form},   {"min_quotient", row.min_quotient},
          {"certificate_passed", row.certificate_passed},
          {"spurious_fraction", row.spurious_fraction},
          {"persists", row.persists}};
}

void write_trajectory_csv(std::ostream& os, const RunResult& res) {
  os << "iter,objective,residual\n";
  char buf[96];
  for (const auto& p : res.trajectory) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p.iter, p.objective, p.residual);
    os << buf;
  }
}

}  // namespace nnlr
