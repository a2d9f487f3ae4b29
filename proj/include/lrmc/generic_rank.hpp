#pragma once

// Generic completion rank via tangent spaces of the determinantal variety
// at random points over a prime field.

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lrmc/matrix.hpp"
#include "lrmc/pattern.hpp"

namespace lrmc {

/// Matrices of size n x m with rank at most r.
struct RankVariety {
  int n = 0;
  int m = 0;
  int r = 0;

  RankVariety(int n, int m, int r);
  long dimension() const { return static_cast<long>(r) * (n + m - r); }
};

struct RankTrial {
  std::uint64_t prime = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, std::size_t>> projection_ranks;  // (r, rank)
};

struct RankReport {
  EntryPattern pattern;
  int gcr = 0;  // generic completion rank
  int gcc = 0;  // min(n,m) - gcr
  std::vector<RankTrial> trials;
};

nlohmann::json to_json(const RankReport& report);

/// Rank of the tangent space of the rank-r variety at a random point of
/// F_p (seeded), projected onto the specified coordinates of `p`. The
/// specified set is generically completable to rank r iff this equals
/// |specified| for some point.
std::size_t tangent_projection_rank(const EntryPattern& p, int r, const PrimeField& field, std::uint64_t seed);

inline constexpr int kDefaultRankTrials = 3;

/// Least r whose tangent projection reaches full rank |specified| in some of
/// `trials` trials (trial t uses seed + t). Deterministic given the seed.
RankReport generic_completion_rank(const EntryPattern& p, int trials = kDefaultRankTrials, std::uint64_t seed = 0,
                                   const PrimeField& field = PrimeField());

struct CorankBounds {
  int gcc_upper = 0;      // upper bound on the generic completion corank
  int typical_upper = 0;  // upper bound on every typical corank (equal, by the rank hierarchy)
};

/// Dimension-count bound for an (n+k) x n pattern: the largest r with r(r+k) <= |U|.
CorankBounds corank_bounds(const EntryPattern& p, int extra_rows);

/// Same bound from the raw count of unspecified cells.
int corank_bound_from_count(std::size_t unspecified, int extra_rows);

}  // namespace lrmc
