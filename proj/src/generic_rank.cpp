#include "lrmc/generic_rank.hpp"

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "lrmc/error.hpp"
#include "lrmc/linalg.hpp"

namespace lrmc {

RankVariety::RankVariety(int n_, int m_, int r_) : n(n_), m(m_), r(r_) {
  if (n <= 0 || m <= 0 || r < 0 || r > std::min(n, m)) throw ParameterError("rank variety needs 0 <= r <= min(n,m)");
}

std::size_t tangent_projection_rank(const EntryPattern& p, int r, const PrimeField& field, std::uint64_t seed) {
  const int n = p.rows();
  const int m = p.cols();
  const RankVariety variety(n, m, r);
  if (r == 0 || p.num_specified() == 0) return 0;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> draw(0, field.modulus() - 1);
  ModMatrix u0(static_cast<std::size_t>(n), static_cast<std::size_t>(r));
  ModMatrix v0(static_cast<std::size_t>(r), static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < u0.rows(); ++i)
    for (std::size_t k = 0; k < u0.cols(); ++k) u0(i, k) = draw(rng);
  for (std::size_t k = 0; k < v0.rows(); ++k)
    for (std::size_t j = 0; j < v0.cols(); ++j) v0(k, j) = draw(rng);

  // Columns [0, n r): perturbation of U0 at (i,k) moves row i by row k of V0.
  // Columns [n r, n r + r m): perturbation of V0 at (k,j) moves column j by column k of U0.
  const std::vector<Cell> spec = p.specified();
  const std::size_t ucols = static_cast<std::size_t>(n) * r;
  ModMatrix tangent(spec.size(), ucols + static_cast<std::size_t>(r) * m);
  for (std::size_t e = 0; e < spec.size(); ++e) {
    const std::size_t i = static_cast<std::size_t>(spec[e].row - 1);
    const std::size_t j = static_cast<std::size_t>(spec[e].col - 1);
    for (std::size_t k = 0; k < static_cast<std::size_t>(r); ++k) {
      tangent(e, i * r + k) = v0(k, j);
      tangent(e, ucols + k * m + j) = u0(i, k);
    }
  }
  return rank(tangent, field);
}

int corank_bound_from_count(std::size_t unspecified, int extra_rows) {
  if (extra_rows < 0) throw ParameterError("extra_rows must be non-negative");
  int r = 0;
  while (static_cast<std::size_t>((r + 1) * (r + 1 + extra_rows)) <= unspecified) ++r;
  return r;
}

CorankBounds corank_bounds(const EntryPattern& p, int extra_rows) {
  const int b = corank_bound_from_count(p.num_unspecified(), extra_rows);
  return {b, b};
}

RankReport generic_completion_rank(const EntryPattern& p, int trials, std::uint64_t seed, const PrimeField& field) {
  if (trials < 1) throw ParameterError("generic_completion_rank needs at least one trial");
  RankReport report;
  report.pattern = p;
  const int n = p.rows();
  const int m = p.cols();
  const std::size_t target = p.num_specified();
  for (int t = 0; t < trials; ++t) report.trials.push_back({field.modulus(), seed + static_cast<std::uint64_t>(t), {}});

  // No rank below the dimension count can reach |S|.
  int r = 0;
  while (r < std::min(n, m) && static_cast<std::size_t>(RankVariety(n, m, r).dimension()) < target) ++r;
  for (;; ++r) {
    std::size_t best = 0;
    for (auto& trial : report.trials) {
      const std::size_t pr = tangent_projection_rank(p, r, field, trial.seed);
      trial.projection_ranks.emplace_back(r, pr);
      best = std::max(best, pr);
    }
    if (best == target || r == std::min(n, m)) break;
  }
  report.gcr = r;
  report.gcc = std::min(n, m) - r;
  return report;
}

nlohmann::json to_json(const RankReport& report) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    nlohmann::json ranks = nlohmann::json::array();
    for (const auto& [r, pr] : t.projection_ranks) ranks.push_back({{"r", r}, {"projection_rank", pr}});
    trials.push_back({{"prime", t.prime}, {"seed", t.seed}, {"projection_ranks", ranks}});
  }
  return {{"pattern", pattern_to_json(report.pattern)},
          {"specified", report.pattern.num_specified()},
          {"gcr", report.gcr},
          {"gcc", report.gcc},
          {"trials", trials}};
}

}  // namespace lrmc
