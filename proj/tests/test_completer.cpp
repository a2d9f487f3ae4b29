#include <algorithm>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "lrmc/completer.hpp"
#include "lrmc/error.hpp"
#include "lrmc/estimator.hpp"
#include "lrmc/linalg.hpp"

using namespace lrmc;

namespace {

Matrix<Rational> random_int(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  // Nonzero draws: a zero row in a factor would make the filling degenerate.
  std::uniform_int_distribution<int> d(1, 50);
  std::bernoulli_distribution sign;
  Matrix<Rational> a(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = sign(rng) ? d(rng) : -d(rng);
  return a;
}

// A filling drawn from a known rank-r product, so a unique completion must reproduce it.
PartialMatrix<Rational> from_product(const EntryPattern& p, std::size_t r, std::mt19937_64& rng, Matrix<Rational>* full) {
  *full = random_int(static_cast<std::size_t>(p.rows()), r, rng) * random_int(r, static_cast<std::size_t>(p.cols()), rng);
  return restrict_to_pattern(p, *full);
}

template <typename T>
bool has_step(const CompletionCertificate<T>& c, StepKind k) {
  return std::any_of(c.steps.begin(), c.steps.end(), [&](const auto& s) { return s.kind == k; });
}

template <typename T>
bool used_choice(const CompletionCertificate<T>& c) {
  return std::any_of(c.steps.begin(), c.steps.end(), [](const auto& s) {
    return s.kind == StepKind::AssignFree ||
           ((s.kind == StepKind::AppendRow || s.kind == StepKind::AppendCol) &&
            (s.mode == AppendMode::LeastNorm || s.mode == AppendMode::Free));
  });
}

Matrix<double> column_block(const Matrix<double>& m, std::size_t cols) { return m.block(0, 0, m.rows(), cols); }

}  // namespace

TEST_CASE("append_row_complete") {
  const Matrix<Rational> basis{{1, 2, 3}};
  const auto row = append_row_complete<Rational>(basis, {std::nullopt, Rational(4), std::nullopt});
  CHECK(row == std::vector<Rational>{2, 4, 6});
  const auto zero = append_row_complete<Rational>(basis, {std::nullopt, std::nullopt, std::nullopt});
  CHECK(zero == std::vector<Rational>{0, 0, 0});
  CHECK_THROWS_AS(append_row_complete<Rational>(basis, {Rational(1), Rational(4), std::nullopt}), NotGeneric);

  std::mt19937_64 rng(1);
  const Matrix<Rational> b = random_int(3, 6, rng);
  const Matrix<Rational> target = random_int(1, 3, rng) * b;
  std::vector<std::optional<Rational>> partial(6);
  for (std::size_t j : {0u, 2u, 5u}) partial[j] = target(0, j);
  const auto full = append_row_complete(b, partial);
  for (std::size_t j = 0; j < 6; ++j) CHECK(full[j] == target(0, j));
}

TEST_CASE("codim block completion") {
  std::mt19937_64 rng(2);
  Matrix<Rational> full;
  const auto k44 = from_product(codim_block(6, 0, 4), 2, rng, &full);
  const auto c = codim_block_complete(k44, 4);
  CHECK(c.achieved_rank == 2);
  CHECK(c.filled == full);
  CHECK(verify_certificate(c).ok);

  const auto a75 = from_product(codim_block(5, 2, 2), 3, rng, &full);
  const auto d = codim_block_complete(a75, 2);
  const auto e = codim_block_complete(a75, 2, {.seed = 99, .reverse_order = true});
  CHECK(d.achieved_rank == 3);
  CHECK(d.filled == full);
  CHECK(e.filled == d.filled);

  const auto done = restrict_to_pattern(EntryPattern(3, 3, {}), full.block(0, 0, 3, 3));
  const auto same = codim_block_complete(done, 2);
  CHECK(same.filled == done.values());
  CHECK(same.steps.empty());

  CHECK_THROWS_AS(codim_block_complete(sample_integer_filling(circulant(4, 1), 0), 1), PatternShape);
}

TEST_CASE("diagonal strip completion") {
  const auto trivial = diag_strip_complete(sample_integer_filling(diag_strip(3, 3), 1));
  CHECK(trivial.steps.empty());
  CHECK(trivial.achieved_rank == 3);

  std::mt19937_64 rng(3);
  for (int n = 1; n <= 8; ++n)
    for (int k = 1; k <= std::min(n, 3); ++k) {
      Matrix<Rational> full;
      const auto a = from_product(diag_strip(n, k), static_cast<std::size_t>(k), rng, &full);
      const auto c = diag_strip_complete(a);
      CHECK_MESSAGE(c.filled == full, "n = " << n << ", k = " << k);
      CHECK(c.achieved_rank == k);
      CHECK(verify_certificate(c).ok);
      CHECK(diag_strip_complete(a, {.seed = 5, .reverse_order = true}).filled == c.filled);
    }

  // Generic integer fillings: rank k, agreement, order independence.
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = sample_integer_filling(diag_strip(6, 2), s);
    const auto c = diag_strip_complete(a);
    CHECK(rank(c.filled) == 2);
    CHECK(verify_certificate(c).ok);
    CHECK(diag_strip_complete(a, {.seed = 1, .reverse_order = true}).filled == c.filled);
  }
  CHECK_THROWS_AS(diag_strip_complete(sample_integer_filling(circulant(4, 1), 0)), PatternShape);
}

TEST_CASE("circulant1 completion") {
  const auto one = circulant1_complete(sample_integer_filling(circulant(1, 1), 0), 1);
  CHECK(one.filled(0, 0) == 0);
  CHECK(one.achieved_rank == 0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = circulant1_complete(sample_gaussian_filling(circulant(5, 1), s), 2, {.seed = s});
    CHECK(verify_certificate(c).ok);
    CHECK(numerical_rank(c.filled, 1e-9) == 3);
    CHECK(numerical_rank(column_block(c.filled, 3), 1e-9) == 2);
    const auto q = circulant1_complete(sample_integer_filling(circulant(5, 1), s), 2, {.seed = s});
    CHECK(rank(q.filled) == 3);
    CHECK(rank(q.filled.block(0, 0, 5, 3)) == 2);
    CompleteOptions schur_route{.seed = s};
    schur_route.five_route = CompleteOptions::Route::Schur;
    const auto r = circulant1_complete(sample_integer_filling(circulant(5, 1), s), 2, schur_route);
    CHECK(verify_certificate(r).ok);
    CHECK(rank(r.filled) == 3);
  }

  const auto big = circulant1_complete(sample_gaussian_filling(circulant(21, 1), 4), 3, {.seed = 4});
  CHECK(verify_certificate(big).ok);
  CHECK(numerical_rank(big.filled, 1e-9) == 18);
  CHECK(has_step(big, StepKind::SchurReduce));

  CHECK_THROWS_AS(circulant1_complete(sample_gaussian_filling(circulant(4, 1), 0), 2), ThresholdNotMet);
  CHECK(circulant1_threshold(0) == 0);
  CHECK(circulant1_threshold(1) == 1);
  CHECK(circulant1_threshold(2) == 5);
  CHECK(circulant1_threshold(3) == 21);
}

TEST_CASE("circulantk completion") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = circulantk_complete(sample_gaussian_filling(prime_circulant(6, 2), s), 2, 1, {.seed = s});
    CHECK(verify_certificate(c).ok);
    CHECK(numerical_rank(c.filled, 1e-9) == 3);
    const auto q = circulantk_complete(sample_integer_filling(prime_circulant(6, 2), s), 2, 1, {.seed = s});
    CHECK(rank(q.filled) == 3);
    if (!used_choice(q))
      CHECK(circulantk_complete(sample_integer_filling(prime_circulant(6, 2), s), 2, 1,
                                {.seed = s + 1, .reverse_order = true})
                .filled == q.filled);
  }
  // Base case: a 2x2 grid with three unknown cells completes to corank floor(3/2) = 1.
  const auto base = circulantk_complete(sample_integer_filling(prime_circulant(2, 3), 7), 3, 0);
  CHECK(base.achieved_rank == 1);
  CHECK(verify_certificate(base).ok);

  for (int m = 0; m <= 4; ++m) {
    CHECK(circulantk_threshold(1, m) == circulant1_threshold(m));
    CHECK(circulantk_corank(1, m) == m);
  }
  CHECK(circulantk_threshold(2, 1) == 6);
  CHECK(circulantk_corank(2, 1) == 3);
  CHECK(circulantk_corank(3, 0) == 1);
  CHECK_THROWS_AS(circulantk_complete(sample_gaussian_filling(prime_circulant(5, 2), 0), 2, 1), ThresholdNotMet);
}

TEST_CASE("schur reduce and lift") {
  std::mt19937_64 rng(6);
  // Zero borders: the lift is the inner completion embedded.
  Matrix<Rational> inner_full = random_int(4, 2, rng) * random_int(2, 4, rng);
  Matrix<Rational> padded(5, 5);
  padded.set_block(0, 0, inner_full);
  padded(4, 4) = 3;
  const auto a = restrict_to_pattern(codim_block(4, 0, 2).embedded(5, 5), padded);
  const InnerRoutine<Rational> inner = [](const PartialMatrix<Rational>& b) { return codim_block_complete(b, 2); };
  const auto c = schur_reduce_lift(a, 4, 4, inner);
  CHECK(c.filled == padded);
  CHECK(c.achieved_rank == 3);
  CHECK(verify_certificate(c).ok);

  // Generic borders: inner rank 2 plus pivot rank 2.
  for (int t = 0; t < 10; ++t) {
    Matrix<Rational> full = random_int(6, 4, rng) * random_int(4, 6, rng);
    // Make the leading 4x4 block minus the border contribution rank 2 by construction.
    const BlockSplit<Rational> split{full, 4, 4};
    const Matrix<Rational> bdc = split.b() * inverse(split.d()) * split.c();
    full.set_block(0, 0, random_int(4, 2, rng) * random_int(2, 4, rng) + bdc);
    const auto g = schur_reduce_lift(restrict_to_pattern(codim_block(4, 0, 2).embedded(6, 6), full), 4, 4, inner);
    CHECK(g.filled == full);
    CHECK(rank(g.filled) == 4);
    CHECK(verify_certificate(g).ok);
    CHECK(has_step(g, StepKind::SchurReduce));
    CHECK(has_step(g, StepKind::SchurLift));
  }
  CHECK_THROWS_AS(schur_reduce_lift(restrict_to_pattern(EntryPattern(3, 3, {{3, 3}}), padded.block(0, 0, 3, 3)), 2, 2, inner),
                  PatternShape);
}

TEST_CASE("verification closure, perturbation and monotone target") {
  const auto c = circulantk_complete(sample_integer_filling(prime_circulant(6, 2), 3), 2, 1);
  REQUIRE(verify_certificate(c).ok);
  auto raised = c;
  raised.target_rank += 1;
  CHECK(verify_certificate(raised).ok);
  auto bumped = c;
  const Cell cell = c.input.pattern().unspecified()[0];
  bumped.filled(cell.row - 1, cell.col - 1) += 1;
  const VerifyResult v = verify_certificate(bumped);
  CHECK_FALSE(v.ok);
  CHECK_FALSE(v.diagnostic.empty());
  auto wrong_entry = c;
  const Cell known = c.input.pattern().specified()[0];
  wrong_entry.filled(known.row - 1, known.col - 1) += 1;
  CHECK_FALSE(verify_certificate(wrong_entry).ok);

  const nlohmann::json doc = to_json(c);
  CHECK(doc.at("method") == c.method);
  CHECK(doc.at("steps").size() == c.steps.size());
}

TEST_CASE("g52 completion agrees with the least real rank") {
  SolverConfig cfg;
  int agree = 0, twos = 0, threes = 0;
  const int trials = 30;
  for (int s = 0; s < trials; ++s) {
    const auto a = sample_gaussian_filling(prime_circulant(5, 2), 500 + s);
    const auto c = g52_complete(a, {.seed = static_cast<std::uint64_t>(s)});
    CHECK(verify_certificate(c).ok);
    CHECK((c.target_rank == 2 || c.target_rank == 3));
    (c.target_rank == 2 ? twos : threes)++;
    if (c.target_rank == min_real_rank(a, 5, cfg)) ++agree;
  }
  CHECK(agree >= trials - 1);
  CHECK(twos > 0);
  CHECK(threes > 0);
  CHECK_THROWS_AS(g52_complete(sample_gaussian_filling(prime_circulant(6, 2), 0)), PatternShape);
}

TEST_CASE("matrix rank helpers") {
  CHECK(matrix_rank(Matrix<Rational>{{1, 2}, {2, 4}}) == 1);
  CHECK(matrix_rank(Matrix<double>{{1, 2}, {2, 4.000001}}) == 2);
  CHECK(to_string(StepKind::SchurLift) == "SchurLift");
  CHECK(to_string(AppendMode::LeastNorm) == "least-norm");
}
