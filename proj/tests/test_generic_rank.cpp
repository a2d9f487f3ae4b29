#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "lrmc/error.hpp"
#include "lrmc/generic_rank.hpp"

using namespace lrmc;

TEST_CASE("tangent projection rank examples") {
  const PrimeField f;
  CHECK(tangent_projection_rank(circulant(4, 1), 2, f, 0) == 12);
  CHECK(tangent_projection_rank(circulant(4, 1), 1, f, 0) < 12);
  const EntryPattern full(4, 5, {});
  CHECK(tangent_projection_rank(full, 4, f, 1) == 20);
  CHECK(tangent_projection_rank(circulant(9, 1), 5, f, 2) < 72);
  CHECK(tangent_projection_rank(circulant(9, 1), 6, f, 2) == 72);
  CHECK_THROWS_AS(tangent_projection_rank(full, 5, f, 0), ParameterError);
}

TEST_CASE("generic completion corank of G(n,1) is floor(sqrt n)") {
  for (int n = 1; n <= 16; ++n) {
    const RankReport r = generic_completion_rank(circulant(n, 1), 3, 7);
    CHECK_MESSAGE(r.gcc == static_cast<int>(std::floor(std::sqrt(n))), "n = " << n);
    CHECK(r.gcr + r.gcc == n);
    CHECK(r.trials.size() == 3);
  }
}

TEST_CASE("generic completion rank examples") {
  CHECK(generic_completion_rank(circulant(4, 1)).gcr == 2);
  CHECK(generic_completion_rank(circulant(5, 2)).gcc == 3);
  CHECK(generic_completion_rank(circulant(9, 1)).gcc == 3);
  const RankReport empty = generic_completion_rank(EntryPattern(5, 5, {}));
  CHECK(empty.gcr == 5);
  CHECK(empty.gcc == 0);
  const RankReport all = generic_completion_rank(circulant(3, 3));
  CHECK(all.gcr == 0);
  CHECK_THROWS_AS(generic_completion_rank(circulant(3, 1), 0), ParameterError);
}

TEST_CASE("generic completion rank is deterministic and serializes") {
  const RankReport a = generic_completion_rank(prime_circulant(6, 2), 3, 5);
  const RankReport b = generic_completion_rank(prime_circulant(6, 2), 3, 5);
  CHECK(to_json(a).dump() == to_json(b).dump());
  const nlohmann::json doc = to_json(a);
  CHECK(doc.at("gcc") == a.gcc);
  CHECK(doc.at("trials").size() == 3);
}

TEST_CASE("generic completion rank is invariant under relabeling and transposition") {
  std::mt19937_64 rng(9);
  for (const EntryPattern& p : {circulant(7, 2), prime_circulant(6, 3), diag_strip(6, 2), codim_block(5, 2, 2)}) {
    const int gcr = generic_completion_rank(p).gcr;
    CHECK(generic_completion_rank(p.transposed()).gcr == gcr);
    std::vector<int> pr(p.rows()), pc(p.cols());
    std::iota(pr.begin(), pr.end(), 1);
    std::iota(pc.begin(), pc.end(), 1);
    std::shuffle(pr.begin(), pr.end(), rng);
    std::shuffle(pc.begin(), pc.end(), rng);
    std::vector<Cell> cells;
    for (const Cell& c : p.unspecified()) cells.push_back({pr[c.row - 1], pc[c.col - 1]});
    CHECK(generic_completion_rank(EntryPattern(p.rows(), p.cols(), cells)).gcr == gcr);
  }
}

TEST_CASE("generic completion corank is unchanged by padding") {
  for (const EntryPattern& u : {circulant(4, 1), circulant(5, 1), circulant(5, 2)}) {
    const int gcc = generic_completion_rank(u).gcc;
    for (int extra = 1; extra <= 2; ++extra)
      CHECK(generic_completion_rank(u.embedded(u.rows() + extra, u.cols() + extra)).gcc == gcc);
  }
}

TEST_CASE("dimension-count corank bounds") {
  CHECK(corank_bound_from_count(16, 0) == 4);
  CHECK(corank_bound_from_count(11, 0) == 3);
  CHECK(corank_bound_from_count(0, 0) == 0);
  CHECK(corank_bound_from_count(8, 2) == 2);
  CHECK(corank_bounds(prime_circulant(6, 2), 0).gcc_upper == 3);
  CHECK_THROWS_AS(corank_bound_from_count(3, -1), ParameterError);
  // The bound dominates the computed corank.
  for (int n = 1; n <= 12; ++n)
    CHECK(generic_completion_rank(circulant(n, 1)).gcc <= corank_bounds(circulant(n, 1), 0).gcc_upper);
}
