#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nnlr/instances.hpp"
#include "nnlr/optimality.hpp"
#include "nnlr/solver.hpp"

namespace nnlr {

using Json = nlohmann::json;

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrices are arrays of rows.
Json matrix_to_json(const Matrix& m);
/// `field` names the location in error messages.
Matrix matrix_from_json(const Json& j, const std::string& field);

Json kernel_params_to_json(const KernelParams& p);
KernelParams kernel_params_from_json(const Json& j);

Json instance_to_json(const NamedInstance& named);
/// Validates the schema and every instance invariant; throws SchemaError with the
/// offending field on failure.
NamedInstance instance_from_json(const Json& j);

void save_instance(const NamedInstance& named, const std::filesystem::path& path);
NamedInstance load_instance(const std::filesystem::path& path);

Json certificate_to_json(const Certificate& cert);
Json run_result_to_json(const RunResult& res, bool include_trajectory = false);
Json trial_record_to_json(const TrialRecord& rec);
Json basin_summary_to_json(const BasinSummary& summary);
Json sweep_row_to_json(const SweepRow& row);

/// Stable text form used for every file the tools write.
std::string dump(const Json& j);

/// Writes `iter,objective,residual` rows with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const RunResult& res);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace nnlr
