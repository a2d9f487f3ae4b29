#pragma once

// Monte Carlo estimation of typical ranks: sample Gaussian fillings of a
// pattern and find, per sample, the least rank that a real factorization
// U V reaches on the specified entries.
//
// The estimate has one-sided error. A rank is recorded only when the
// solver actually reaches it, so a missed real completion shows up as a
// rank that is too high, never too low.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrmc/matrix.hpp"
#include "lrmc/partial.hpp"
#include "lrmc/pattern.hpp"

namespace lrmc {

struct SolverConfig {
  int restarts = 30;
  int max_iterations = 500;
  double residual_tol = 1e-7;   // success: ||UV - A||_S < residual_tol * ||A||_S
  double step_tol = 1e-12;      // a restart stops once steps fall below this (relative)
  double rank_rel_tol = 1e-9;   // numerical rank reported for successful factorizations
  int sample_count = 500;
  std::uint64_t seed = 0;
  double typical_frequency_threshold = 0.02;
  unsigned threads = 0;         // 0: LRMC_THREADS or 1
};

/// Throws ParameterError unless every field is positive and residual_tol < 1.
void validate(const SolverConfig& cfg);

struct RankFit {
  bool success = false;
  double relative_residual = 0.0;  // ||UV - A||_S / ||A||_S at the best restart
  int restarts_used = 0;
  Matrix<double> completion;       // U V in the original scale (best restart)
  int numerical_rank = 0;          // of the completion, at cfg.rank_rel_tol
};

/// Least squares over factorizations U (n x r) V (r x m) from cfg.restarts
/// Gaussian starts derived from `seed`. V is eliminated exactly and
/// Levenberg-Marquardt runs on U (variable projection).
RankFit fit_rank(const PartialMatrix<double>& a, int r, const SolverConfig& cfg, std::uint64_t seed);

/// Least r in [r_min, r_max] that fit_rank reaches; the short form searches
/// from 1. Passing the generic completion rank as r_min is only valid for
/// generic fillings, which never complete below it. Returns 0 when every
/// specified entry is 0.
/// Throws SolverExhausted when no rank up to r_max succeeds.
int min_real_rank(const PartialMatrix<double>& a, int r_max, const SolverConfig& cfg);
int min_real_rank(const PartialMatrix<double>& a, int r_min, int r_max, const SolverConfig& cfg, std::uint64_t seed);

/// Seed used by estimate_typical for the solver on sample `index`.
std::uint64_t solver_seed(const SolverConfig& cfg, std::size_t index);

struct TypicalRankReport {
  EntryPattern pattern;
  SolverConfig config;
  int generic_completion_rank = 0;
  int samples = 0;
  int failures = 0;                      // SolverExhausted samples, excluded from the histogram
  std::vector<int> sample_ranks;         // per sample, -1 for a failure
  std::map<int, int> counts;
  std::map<int, double> histogram;       // rank -> count / samples
  std::set<int> inferred_typical_ranks;  // smallest interval covering every rank above threshold
  std::set<int> inferred_typical_coranks;
  bool gap_anomaly = false;              // a rank inside the interval fell below the threshold
  bool unreliable = false;               // more than 5% failures
};

/// Sample i is sample_gaussian_filling(P, cfg.seed + i).
TypicalRankReport estimate_typical(const EntryPattern& p, const SolverConfig& cfg);

struct PaddingResult {
  bool consistent = false;
  std::vector<TypicalRankReport> reports;  // one per size
};

/// Runs estimate_typical for U embedded top-left in each n x n grid.
PaddingResult padding_invariance(const EntryPattern& u, const std::vector<int>& sizes, const SolverConfig& cfg);
bool padding_invariance_check(const EntryPattern& u, const std::vector<int>& sizes, const SolverConfig& cfg = {});

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const TypicalRankReport& r);
/// Two columns: rank,frequency.
std::string histogram_csv(const TypicalRankReport& r);

}  // namespace lrmc
