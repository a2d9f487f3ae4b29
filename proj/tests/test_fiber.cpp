#include <nlohmann/json.hpp>

#include "doctest.h"
#include "lrmc/completer.hpp"
#include "lrmc/error.hpp"
#include "lrmc/estimator.hpp"
#include "lrmc/fiber.hpp"
#include "lrmc/linalg.hpp"

using namespace lrmc;

namespace {

FiberConfig with(int starts, std::uint64_t seed) {
  FiberConfig cfg;
  cfg.starts = starts;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

// The rank-2 fiber of a generic G(4,1) filling has degree 2: a grevlex Groebner
// basis of the 3x3 minors leaves a two-dimensional quotient ring, and the
// numerical count below agrees with that.
TEST_CASE("G(4,1) rank-2 fiber has two points, closed under conjugation") {
  int with_real = 0, complex_only = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = sample_gaussian_filling(circulant(4, 1), s);
    const FiberReport rep = enumerate_fiber(a, 2, with(200, s));
    CHECK_MESSAGE(rep.solutions.size() == 2, "filling " << s);
    CHECK(rep.real_count + rep.complex_count == static_cast<int>(rep.solutions.size()));
    CHECK(rep.complex_count % 2 == 0);
    CHECK(conjugate_closed(rep));
    for (const FiberSolution& sol : rep.solutions) {
      CHECK(sol.residual < 1e-8);
      CHECK(numerical_rank(completed_matrix(a, sol), 1e-7) <= 2);
    }
    const auto reals = real_solutions(rep, a);
    CHECK(reals.size() == static_cast<std::size_t>(rep.real_count));
    const int least = min_real_rank(a, 4, SolverConfig{});
    if (rep.real_count > 0) {
      ++with_real;
      CHECK(least == 2);
      for (const auto& m : reals) {
        CHECK(numerical_rank(m, 1e-7) == 2);
        for (const Cell& c : a.pattern().specified()) CHECK(m(c.row - 1, c.col - 1) == a.at(c.row, c.col));
      }
    } else {
      ++complex_only;
      CHECK(reals.empty());
      CHECK(rep.complex_count == 2);
      CHECK(least == 3);
    }
  }
  CHECK(with_real > 0);
  CHECK(complex_only > 0);
}

TEST_CASE("fiber count is stable across chart seeds") {
  const auto a = sample_gaussian_filling(circulant(4, 1), 42);
  const std::size_t first = enumerate_fiber(a, 2, with(200, 1)).solutions.size();
  for (std::uint64_t s = 2; s <= 3; ++s) CHECK(enumerate_fiber(a, 2, with(200, s)).solutions.size() == first);
}

TEST_CASE("uniquely completable patterns have a single real point") {
  FiberConfig cfg = with(60, 3);
  cfg.max_unknowns = 11;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto a = sample_gaussian_filling(diag_strip(5, 2), s);
    const FiberReport rep = enumerate_fiber(a, 2, cfg);
    REQUIRE(rep.solutions.size() == 1);
    CHECK(rep.real_count == 1);
    const auto reals = real_solutions(rep, a);
    const auto cert = diag_strip_complete(a);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) CHECK(reals[0](i, j) == doctest::Approx(cert.filled(i, j)).epsilon(1e-6));
  }
  const auto k = sample_gaussian_filling(codim_block(4, 1, 2), 7);
  const FiberReport rk = enumerate_fiber(k, 2, with(100, 1));
  REQUIRE(rk.solutions.size() == 1);
  const auto ck = codim_block_complete(k, 2);
  const auto rs = real_solutions(rk, k);
  for (const Cell& c : k.pattern().unspecified())
    CHECK(rs[0](c.row - 1, c.col - 1) == doctest::Approx(ck.filled(c.row - 1, c.col - 1)).epsilon(1e-6));
}

TEST_CASE("zero filling completes to the zero matrix at rank 0") {
  const PartialMatrix<double> zeros(circulant(3, 1), Matrix<double>(3, 3));
  const FiberReport rep = enumerate_fiber(zeros, 0, with(20, 0));
  REQUIRE(rep.solutions.size() == 1);
  const auto reals = real_solutions(rep, zeros);
  REQUIRE(reals.size() == 1);
  CHECK(reals[0] == Matrix<double>(3, 3));
}

TEST_CASE("fiber errors") {
  const auto a = sample_gaussian_filling(circulant(4, 1), 0);
  CHECK_THROWS_AS(enumerate_fiber(a, 1, with(50, 0)), EmptyFiberEvidence);
  CHECK_THROWS_AS(enumerate_fiber(a, 4, with(50, 0)), ParameterError);
  CHECK_THROWS_AS(enumerate_fiber(sample_gaussian_filling(circulant(10, 1), 0), 7), ParameterError);
  CHECK_THROWS_AS(enumerate_fiber(sample_gaussian_filling(EntryPattern(3, 3, {}), 0), 1), ParameterError);
}

TEST_CASE("fiber report serializes every solution") {
  const auto a = sample_gaussian_filling(circulant(4, 1), 3);
  const FiberReport rep = enumerate_fiber(a, 2, with(100, 0));
  const nlohmann::json doc = to_json(rep);
  CHECK(doc.at("solutions").size() == rep.solutions.size());
  CHECK(doc.at("real_count") == rep.real_count);
  CHECK(doc.at("starts_used") == 100);
  CHECK(default_fiber_starts(4) == 200);
  CHECK(default_fiber_starts(9) == 2000);
}
