#pragma once

// Counting completions in a finite generic fiber by multi-start Newton.
// Newton runs on the kernel chart M Q [I; K] = 0 (Q a random unitary), and
// every endpoint is certified against all (r+1)-minors of the completion.

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrmc/matrix.hpp"
#include "lrmc/partial.hpp"

namespace lrmc {

struct FiberConfig {
  int starts = 0;                   // 0: 200 for |U| <= 4, 2000 for |U| <= 9
  std::uint64_t seed = 0;           // start points and the random chart
  int max_newton_iterations = 80;
  double step_tol = 1e-12;          // Newton stops when the update is this small (relative)
  double certify_tol = 1e-8;        // all-minors residual, relative to the Hadamard bound
  double cluster_radius = 1e-6;
  double real_tol = 1e-6;
  std::size_t max_unknowns = 9;
};

struct FiberSolution {
  std::vector<Complex> values;  // one per unspecified cell, in pattern order
  double residual = 0.0;        // max relative residual over every (r+1)-minor
  bool real = false;
  int hits = 0;                 // starts that converged to this point
};

struct FiberReport {
  EntryPattern pattern;
  std::uint64_t seed = 0;
  int target_rank = 0;
  std::vector<FiberSolution> solutions;
  int real_count = 0;
  int complex_count = 0;
  int starts_used = 0;
  int converged_starts = 0;
  std::size_t minors_total = 0;
  std::size_t chart_equations = 0;
};

inline int default_fiber_starts(std::size_t unknowns) { return unknowns <= 4 ? 200 : 2000; }

/// Throws ParameterError when |U| exceeds cfg.max_unknowns and
/// EmptyFiberEvidence when no start certifies.
FiberReport enumerate_fiber(const PartialMatrix<double>& a, int r, const FiberConfig& cfg = {});

/// Real solutions as completed matrices.
std::vector<Matrix<double>> real_solutions(const FiberReport& report, const PartialMatrix<double>& a);

/// The partial matrix with the solution values written into the unspecified cells.
Matrix<Complex> completed_matrix(const PartialMatrix<double>& a, const FiberSolution& s);

/// True when the conjugate of every non-real solution is also listed.
bool conjugate_closed(const FiberReport& report, double rel_tol = 1e-6);

nlohmann::json to_json(const FiberReport& r);

}  // namespace lrmc
