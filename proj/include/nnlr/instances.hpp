#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnlr/objectives.hpp"
#include "nnlr/optimality.hpp"

namespace nnlr {

/// A named point of interest with the classification the construction predicts.
struct Candidate {
  std::string name;
  Matrix point;  // stacked form
  Classification expected = Classification::NotCritical;
  /// Proved lower bound on the cone-restricted Rayleigh quotient, when known.
  std::optional<double> quotient_bound;
  std::string note;
};

struct Provenance {
  std::string family;  // thm1-sym | thm1-asym | spu2 | benign-r1
  nlohmann::json params = nlohmann::json::object();
};

struct NamedInstance {
  Instance instance;
  std::vector<Candidate> candidates;
  Provenance provenance;
  std::vector<std::string> warnings;

  /// Throws InvalidArgument for an unknown name.
  const Candidate& candidate(const std::string& name) const;
  bool has_candidate(const std::string& name) const;
};

/// Kernel-operator instance with U* = Q1 and the spurious point U0 = alpha Q2.
/// Requires 0 < alpha < (r/r* + 2 eps^2 r)^(-1/4).
NamedInstance make_thm1_symmetric(int n, int r, int r_star, double eps, double alpha,
                                  std::vector<int> perm_cols = {});

/// Asymmetric counterpart with L* = R* = Q1 and candidate (alpha Q2, alpha Q2).
NamedInstance make_thm1_asymmetric(int n, int r, int r_star, double eps, double alpha,
                                   double lambda, std::vector<int> perm_cols = {});

/// Fully observed instance on n = m + k rows with
///   U0 = [ 1_m 1_r^T / sqrt(r) ; 0 ],   U* = [ 1_m 0 ; 0 I_k ].
/// Requires m > r; r < k + 1 is accepted with a warning (U* is then not reachable).
NamedInstance make_spu2(int m, int k, int r, Variant variant, double lambda = 0.0);

/// Default neighborhood radius 1 / (4 r sqrt(m)) of the spu2 construction.
double spu2_radius(int m, int r);

/// Fully observed rank-one instance. The asymmetric variant splits u* = [a; b] at row
/// `split` (default n / 2) and fixes lambda = 1/4; ||a|| != ||b|| is accepted with a warning.
NamedInstance make_benign_rank1(const Vector& u_star, int r, Variant variant,
                                std::optional<Index> split = std::nullopt);

/// Factor point u* e1^T (or [a e1^T; b e1^T]) padded to the instance rank.
Matrix rank1_global_point(const Instance& inst);

}  // namespace nnlr
