#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "lrmc/error.hpp"
#include "lrmc/pattern.hpp"

using namespace lrmc;

namespace {

std::vector<Cell> cells_of(const EntryPattern& p) { return {p.unspecified().begin(), p.unspecified().end()}; }

EntryPattern permuted(const EntryPattern& p, std::mt19937_64& rng, bool transpose) {
  std::vector<int> pr(p.rows()), pc(p.cols());
  std::iota(pr.begin(), pr.end(), 1);
  std::iota(pc.begin(), pc.end(), 1);
  std::shuffle(pr.begin(), pr.end(), rng);
  std::shuffle(pc.begin(), pc.end(), rng);
  std::vector<Cell> out;
  for (const Cell& c : p.unspecified()) out.push_back({pr[c.row - 1], pc[c.col - 1]});
  EntryPattern q(p.rows(), p.cols(), out);
  return transpose ? q.transposed() : q;
}

}  // namespace

TEST_CASE("circulant examples") {
  CHECK(cells_of(circulant(4, 1)) == std::vector<Cell>{{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  CHECK(circulant(3, 3).num_unspecified() == 9);
  const EntryPattern g73 = circulant(7, 3);
  CHECK(g73.num_unspecified() == 21);
  CHECK(g73.is_unspecified(6, 1));
  CHECK(g73.is_unspecified(7, 2));
  CHECK(circulant(5, 0).num_unspecified() == 0);
  CHECK_THROWS_AS(circulant(3, 4), ParameterError);
  CHECK_THROWS_AS(circulant(3, -1), ParameterError);
}

TEST_CASE("prime circulant examples") {
  CHECK(prime_circulant(7, 3).num_unspecified() == 18);
  CHECK(cells_of(prime_circulant(2, 3)) == std::vector<Cell>{{1, 1}, {1, 2}, {2, 2}});
  CHECK(prime_circulant(5, 1) == circulant(5, 1));
  for (int n = 1; n <= 8; ++n)
    for (int k = 1; k <= n + 1; ++k)
      CHECK(prime_circulant(n, k).num_unspecified() == static_cast<std::size_t>(n * k - k * (k - 1) / 2));
  CHECK_THROWS_AS(prime_circulant(3, 5), ParameterError);
}

TEST_CASE("diagonal strip examples") {
  CHECK(cells_of(diag_strip(3, 1)) == std::vector<Cell>{{1, 1}, {1, 2}, {2, 1}, {3, 3}});
  CHECK(diag_strip(3, 3).num_unspecified() == 0);
  const EntryPattern s62 = diag_strip(6, 2);
  CHECK(s62.num_unspecified() == 16);
  for (int i = 1; i <= 6; ++i)
    for (int j = 1; j <= 6; ++j) CHECK(s62.is_specified(i, j) == (i + j > 5 && i + j <= 9));
}

TEST_CASE("complement is an involution and maps G(n,k) to G(n,n-k)") {
  const EntryPattern empty(3, 4, {});
  CHECK(complement(empty).num_unspecified() == 12);
  for (int n = 1; n <= 7; ++n)
    for (int k = 0; k <= n; ++k) {
      const EntryPattern g = circulant(n, k);
      CHECK(complement(complement(g)) == g);
      CHECK(canonical_form(complement(g)) == canonical_form(circulant(n, n - k)));
    }
}

TEST_CASE("k-core examples") {
  const auto full = k_core(circulant(3, 3), 3);
  REQUIRE(full.size() == 1);
  CHECK(full[0].num_unspecified() == 9);
  CHECK(k_core(circulant(4, 1), 2).empty());
  CHECK(k_core(complement(diag_strip(6, 2)), 5).empty());
  // Over the unspecified cells of S(n,k) the (n-k+1)-core is empty for every k < n.
  for (int n = 2; n <= 9; ++n)
    for (int k = 1; k < n; ++k) CHECK(k_core(diag_strip(n, k), n - k + 1).empty());
  // The strip itself does have a nonempty core once it is wide enough.
  CHECK(k_core(complement(diag_strip(3, 2)), 2).size() == 1);
  // Two disjoint K_{2,2} blocks form two components of the 2-core.
  const EntryPattern two(4, 4, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 3}, {3, 4}, {4, 3}, {4, 4}});
  CHECK(k_core(two, 2).size() == 2);
}

TEST_CASE("typical corank one characterization examples") {
  const auto a = has_typical_corank_one(EntryPattern(3, 3, {{1, 1}, {1, 3}, {2, 1}}));
  CHECK(a.typical);
  CHECK(a.which == CorankOneCase::RowColUnion);
  const auto b = has_typical_corank_one(circulant(5, 1));
  CHECK_FALSE(b.typical);
  CHECK(b.which == CorankOneCase::None);
  const auto c = has_typical_corank_one(circulant(4, 1));
  CHECK(c.typical);
  CHECK(c.which == CorankOneCase::G41);
  const auto d = has_typical_corank_one(circulant(3, 1));
  CHECK(d.typical);
  CHECK(d.which == CorankOneCase::G31);
  CHECK_FALSE(has_typical_corank_one(EntryPattern(3, 3, {})).typical);
}

TEST_CASE("characterization and canonical form are invariant under relabeling") {
  std::mt19937_64 rng(11);
  for (const EntryPattern& p : enumerate_canonical(5, 5, 5)) {
    const auto v = has_typical_corank_one(p);
    for (int t = 0; t < 3; ++t) {
      const EntryPattern q = permuted(p, rng, t == 2);
      CHECK(canonical_form(q) == p);
      const auto w = has_typical_corank_one(q);
      CHECK(w.typical == v.typical);
      CHECK(w.which == v.which);
    }
  }
}

TEST_CASE("canonical form distinguishes sizes and identifies permutation supports") {
  std::vector<int> perm{2, 4, 1, 3};
  std::vector<Cell> cells;
  for (int i = 1; i <= 4; ++i) cells.push_back({i, perm[i - 1]});
  CHECK(canonical_form(EntryPattern(4, 4, cells)) == canonical_form(circulant(4, 1)));
  CHECK_FALSE(canonical_form(circulant(4, 1)) == canonical_form(circulant(4, 2)));
}

TEST_CASE("enumerate_canonical matches brute-force orbit count") {
  const int rows = 3, cols = 4, max_cells = 5;
  std::set<std::vector<Cell>> seen;
  const int total = rows * cols;
  for (int mask = 0; mask < (1 << total); ++mask) {
    if (__builtin_popcount(mask) > max_cells) continue;
    std::vector<Cell> cells;
    for (int b = 0; b < total; ++b)
      if (mask >> b & 1) cells.push_back({b / cols + 1, b % cols + 1});
    seen.insert(cells_of(canonical_form(EntryPattern(rows, cols, cells))));
  }
  const auto listed = enumerate_canonical(rows, cols, max_cells);
  CHECK(listed.size() == seen.size());
  for (const auto& p : listed) CHECK(seen.count(cells_of(p)) == 1);
  CHECK(enumerate_canonical(5, 5, 5).size() == 38);
}

TEST_CASE("two-typical families") {
  CHECK(two_typical_family(TwoTypicalKind::Rank, 1) == circulant(4, 1));
  const EntryPattern c3 = two_typical_family(TwoTypicalKind::Corank, 3);
  CHECK(c3.rows() == 7);
  CHECK(cells_of(c3) == std::vector<Cell>{{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  const EntryPattern r4 = two_typical_family(TwoTypicalKind::Rank, 4);
  CHECK(r4.rows() == 7);
  for (int i = 1; i <= 4; ++i) CHECK(r4.is_unspecified(i, i));
  CHECK(r4.is_unspecified(7, 7));
  CHECK(r4.is_specified(3, 4));
  CHECK(r4.is_specified(1, 7));
}

TEST_CASE("family descriptors parse and round-trip") {
  for (const char* text : {"G(7,3)", "G'(6,2)", "S(6,2)", "K(4,2,2)", "T2C(3)", "T2R(4)"}) {
    const PatternFamily f = PatternFamily::parse(text);
    CHECK(f.descriptor() == text);
    CHECK(f.instantiate().family() == text);
  }
  CHECK(PatternFamily::parse("G(7,3)").instantiate() == circulant(7, 3));
  CHECK_THROWS_AS(PatternFamily::parse("X(1)"), ParameterError);
  CHECK_THROWS_AS(PatternFamily::parse("G(7)"), ParameterError);
}

TEST_CASE("pattern documents round-trip") {
  const EntryPattern p = prime_circulant(6, 2);
  const nlohmann::json doc = pattern_to_json(p);
  CHECK(doc.at("indexing") == "1-based");
  const EntryPattern q = pattern_from_json(doc);
  CHECK(q == p);
  CHECK(q.family() == p.family());
  CHECK_THROWS_AS(EntryPattern(2, 2, {{3, 1}}), ParameterError);
  CHECK_THROWS_AS(EntryPattern(0, 2, {}), ParameterError);
}

TEST_CASE("constructor sorts and deduplicates") {
  const EntryPattern p(3, 3, {{2, 2}, {1, 3}, {2, 2}});
  CHECK(cells_of(p) == std::vector<Cell>{{1, 3}, {2, 2}});
  CHECK(p.row_degree(2) == 1);
  CHECK(p.col_degree(1) == 0);
  CHECK(render(p) == ". . o\n. o .\n. . .\n");
}
