#pragma once

// Constructive completion procedures. Each routine fills a generic partial
// matrix to a target rank and returns a certificate listing every step it
// took, so the result can be checked and replayed independently.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrmc/matrix.hpp"
#include "lrmc/partial.hpp"
#include "lrmc/pattern.hpp"

namespace lrmc {

enum class StepKind { AppendRow, AppendCol, SchurReduce, SchurLift, RecursionEnter, MinorSolve, AssignFree };
std::string_view to_string(StepKind k);

/// How an appended line was determined.
enum class AppendMode {
  Unique,          // exactly rank-many specified entries, square nonsingular solve
  Overdetermined,  // more specified entries than the rank, found consistent
  LeastNorm,       // fewer specified entries; least-norm coefficients
  Free,            // block rank still below target; unspecified cells drawn at random
};
std::string_view to_string(AppendMode m);

template <typename T>
struct Assignment {
  Cell cell;  // 1-based, in the coordinates of the frame the step ran in
  T value;
};

template <typename T>
struct CompletionStep {
  StepKind kind = StepKind::AssignFree;
  int depth = 0;  // 0 = original coordinates; each Schur reduction adds one
  // AppendRow / AppendCol
  int index = 0;               // the appended row (or column)
  std::vector<int> basis;      // basis rows (or columns) of the current block
  std::vector<int> span;       // columns (or rows) of the current block
  std::vector<T> coefficients; // appended line = sum coefficients[t] * basis line t
  AppendMode mode = AppendMode::Unique;
  // SchurReduce / SchurLift / RecursionEnter: kept block and pivot block
  std::vector<int> rows, cols;
  std::vector<int> pivot_rows, pivot_cols;
  int rank_pivot = -1, rank_inner = -1, rank_lifted = -1;
  std::string label;
  std::vector<Assignment<T>> assignments;
};

template <typename T>
struct CompletionCertificate {
  std::string method;
  PartialMatrix<T> input;
  int target_rank = 0;
  int achieved_rank = 0;
  Matrix<T> filled;
  std::vector<CompletionStep<T>> steps;
  ScalarDomain domain = domain_of<T>();
};

struct CompleteOptions {
  /// Seed for free fills (cells a procedure may choose arbitrarily).
  std::uint64_t seed = 0;
  /// Flip the tie-break of the elimination order. Where completion is unique
  /// both orders must produce the same matrix.
  bool reverse_order = false;
  /// circulant1 at (n, r) = (5, 2): `Subvariety` makes the first three
  /// columns dependent; `Schur` runs the generic two-level reduction instead.
  enum class Route { Subvariety, Schur } five_route = Route::Subvariety;
};

/// Completes a line into the span of `basis` (rows of a rank-r matrix).
/// `partial[j]` holds the specified entries. Unique when exactly r entries
/// are given, least-norm coefficients when fewer. Throws NotGeneric when
/// the given entries are inconsistent with the span.
template <typename T>
std::vector<T> append_row_complete(const Matrix<T>& basis, const std::vector<std::optional<T>>& partial);

/// Rows (or, failing that, columns) with either no or exactly r unspecified
/// cells, with exactly n - r complete ones: completes every deficient line
/// into the span of the complete ones. PatternShape otherwise.
template <typename T>
CompletionCertificate<T> codim_block_complete(const PartialMatrix<T>& a, int r, const CompleteOptions& opt = {});

/// Inner routine for a Schur step: fills every unspecified cell of the
/// reduced partial matrix and returns its certificate.
template <typename T>
using InnerRoutine = std::function<CompletionCertificate<T>(const PartialMatrix<T>&)>;

/// The unspecified cells must lie in the leading row_cut x col_cut block and
/// the trailing block D must be square and invertible. The inner routine
/// completes A - B D^{-1} C; the result is lifted back by adding B D^{-1} C.
template <typename T>
CompletionCertificate<T> schur_reduce_lift(const PartialMatrix<T>& a, int row_cut, int col_cut,
                                           const InnerRoutine<T>& inner);

/// Pattern diag_strip(n, k) only. Grows a rank-k completion outward from a
/// complete k x k corner; every step is uniquely determined.
template <typename T>
CompletionCertificate<T> diag_strip_complete(const PartialMatrix<T>& a, const CompleteOptions& opt = {});

/// Diagonal-unspecified n x n matrix, corank r completion for n >= (4^r-1)/3.
template <typename T>
CompletionCertificate<T> circulant1_complete(const PartialMatrix<T>& a, int r, const CompleteOptions& opt = {});

/// Band-unspecified pattern G'(n,k) (i <= j < i+k), corank floor(k/2) + m k
/// for n >= c_m where c_0 = k-1 and c_{m+1} = 4 c_m + k.
template <typename T>
CompletionCertificate<T> circulantk_complete(const PartialMatrix<T>& a, int k, int m, const CompleteOptions& opt = {});

long circulant1_threshold(int r);
long circulantk_threshold(int k, int m);
int circulantk_corank(int k, int m);

struct FiberConfig;

/// G'(5,2) only. Rank 2 when the inner 4x4 block has a real rank-2
/// completion, rank 3 otherwise.
CompletionCertificate<double> g52_complete(const PartialMatrix<double>& a, const CompleteOptions& opt = {});
CompletionCertificate<double> g52_complete(const PartialMatrix<double>& a, const CompleteOptions& opt,
                                           const FiberConfig& fiber);

struct VerifyResult {
  bool ok = false;
  std::string diagnostic;
};

inline constexpr double kEntryTol = 1e-8;

/// Checks the filled matrix against the input and the rank bound. Recorded
/// Schur steps must be rank additive, and depth-0 steps must replay exactly.
template <typename T>
VerifyResult verify_certificate(const CompletionCertificate<T>& c);

template <typename T>
nlohmann::json to_json(const CompletionCertificate<T>& c);

/// Exact rank for rationals, numerical rank (rel_tol 1e-9) for floats.
std::size_t matrix_rank(const Matrix<Rational>& m);
std::size_t matrix_rank(const Matrix<double>& m);

}  // namespace lrmc
