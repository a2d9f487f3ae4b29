#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "lrmc/error.hpp"
#include "lrmc/estimator.hpp"
#include "lrmc/linalg.hpp"

using namespace lrmc;

namespace {

SolverConfig small(int samples, std::uint64_t seed = 0) {
  SolverConfig cfg;
  cfg.sample_count = samples;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate(SolverConfig{}));
  SolverConfig bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(validate(bad), ParameterError);
  bad = SolverConfig{};
  bad.residual_tol = 1.5;
  CHECK_THROWS_AS(validate(bad), ParameterError);
  bad = SolverConfig{};
  bad.sample_count = -1;
  CHECK_THROWS_AS(validate(bad), ParameterError);
}

TEST_CASE("least real rank examples") {
  const PartialMatrix<double> zeros(circulant(4, 1), Matrix<double>(4, 4));
  CHECK(min_real_rank(zeros, 4, SolverConfig{}) == 0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Matrix<double> u(6, 2), v(2, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 2; ++k) u(i, k) = g(rng), v(k, i) = g(rng);
  const PartialMatrix<double> low = restrict_to_pattern(circulant(6, 1), u * v);
  CHECK(min_real_rank(low, 6, SolverConfig{}) == 2);

  const RankFit fit = fit_rank(low, 2, SolverConfig{}, 1);
  CHECK(fit.success);
  CHECK(fit.relative_residual < 1e-7);
  CHECK(fit.numerical_rank == 2);
  for (const Cell& c : low.pattern().specified())
    CHECK(fit.completion(c.row - 1, c.col - 1) == doctest::Approx(low.at(c.row, c.col)).epsilon(1e-6));

  const PartialMatrix<double> full = sample_gaussian_filling(EntryPattern(3, 3, {}), 2);
  CHECK(min_real_rank(full, 3, SolverConfig{}) == 3);
  CHECK_THROWS_AS(min_real_rank(full, 1, 2, SolverConfig{}, 0), SolverExhausted);
}

TEST_CASE("fully specified and fully unspecified patterns") {
  const auto r = estimate_typical(EntryPattern(4, 4, {}), small(20));
  CHECK(r.inferred_typical_ranks == std::set<int>{4});
  CHECK(r.inferred_typical_coranks == std::set<int>{0});
  const auto e = estimate_typical(circulant(3, 3), small(5));
  CHECK(e.inferred_typical_ranks == std::set<int>{0});
}

TEST_CASE("G(4,1) has two typical ranks") {
  const auto r = estimate_typical(circulant(4, 1), small(150, 3));
  CHECK(r.generic_completion_rank == 2);
  CHECK(r.failures == 0);
  CHECK(r.inferred_typical_ranks == std::set<int>{2, 3});
  CHECK(r.inferred_typical_coranks == std::set<int>{1, 2});
  CHECK(r.histogram.at(2) >= 0.05);
  CHECK(r.histogram.at(3) >= 0.05);
  CHECK_FALSE(r.unreliable);
  CHECK_FALSE(r.gap_anomaly);
}

TEST_CASE("reports are deterministic and independent of the thread count") {
  SolverConfig a = small(40, 17);
  a.threads = 1;
  SolverConfig b = a;
  b.threads = 3;
  const auto ra = estimate_typical(prime_circulant(5, 2), a);
  const auto rb = estimate_typical(prime_circulant(5, 2), a);
  const auto rc = estimate_typical(prime_circulant(5, 2), b);
  CHECK(ra.sample_ranks == rb.sample_ranks);
  CHECK(ra.sample_ranks == rc.sample_ranks);
  nlohmann::json ja = to_json(ra), jc = to_json(rc);
  ja["config"].erase("threads");
  jc["config"].erase("threads");
  CHECK(ja.dump() == jc.dump());
  CHECK(solver_seed(a, 3) != solver_seed(a, 4));
}

TEST_CASE("padding invariance") {
  CHECK(padding_invariance_check(EntryPattern(1, 1, {{1, 1}}), {2, 3}, small(40)));
  const auto pr = padding_invariance(EntryPattern(1, 1, {{1, 1}}), {2, 3}, small(40));
  REQUIRE(pr.reports.size() == 2);
  CHECK(pr.reports[0].inferred_typical_coranks == std::set<int>{1});
  CHECK(pr.reports[1].inferred_typical_coranks == std::set<int>{1});
  CHECK(padding_invariance_check(circulant(5, 1), {5, 6}, small(40, 1)));
}

TEST_CASE("report serialization") {
  const auto r = estimate_typical(circulant(4, 1), small(30, 2));
  const std::string csv = histogram_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "rank,frequency");
  double total = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    total += std::stod(line.substr(comma + 1));
    ++rows;
  }
  CHECK(rows == static_cast<int>(r.histogram.size()));
  CHECK(total == doctest::Approx(1.0));
  const nlohmann::json doc = to_json(r);
  for (const char* key : {"pattern", "config", "histogram", "inferred_typical_ranks", "inferred_typical_coranks", "failures"})
    CHECK_MESSAGE(doc.contains(key), key);
  CHECK(doc.at("config").at("seed") == 2);
}
