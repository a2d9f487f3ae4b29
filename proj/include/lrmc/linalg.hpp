#pragma once

// Exact linear algebra over F_p and Q, and floating-point rank/solve.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrmc/error.hpp"
#include "lrmc/matrix.hpp"

namespace lrmc {

std::size_t rank(const ModMatrix& m, const PrimeField& field);
std::size_t rank(const Matrix<Rational>& m);

inline constexpr double kDefaultRankTol = 1e-9;

/// Number of singular values above rel_tol * sigma_max (0 for the zero matrix).
/// Throws InputError on non-finite entries.
std::size_t numerical_rank(const Matrix<double>& m, double rel_tol = kDefaultRankTol);
std::size_t numerical_rank(const Matrix<Complex>& m, double rel_tol = kDefaultRankTol);
std::vector<double> singular_values(const Matrix<double>& m);

/// Indices of a maximal linearly independent set of rows, chosen greedily
/// in the given order (first independent rows win).
std::vector<std::size_t> independent_rows(const Matrix<Rational>& m);
std::vector<std::size_t> independent_rows(const Matrix<double>& m, double rel_tol = kDefaultRankTol);

/// Parent matrix cut into [[A, B], [C, D]] with D the trailing block.
template <typename T>
struct BlockSplit {
  Matrix<T> parent;
  std::size_t row_cut = 0;
  std::size_t col_cut = 0;

  Matrix<T> a() const { return parent.block(0, 0, row_cut, col_cut); }
  Matrix<T> b() const { return parent.block(0, col_cut, row_cut, parent.cols() - col_cut); }
  Matrix<T> c() const { return parent.block(row_cut, 0, parent.rows() - row_cut, col_cut); }
  Matrix<T> d() const { return parent.block(row_cut, col_cut, parent.rows() - row_cut, parent.cols() - col_cut); }
};

/// A - B D^{-1} C. Throws SingularBlock when D is singular (or not square).
Matrix<Rational> schur_complement(const BlockSplit<Rational>& s);
Matrix<double> schur_complement(const BlockSplit<double>& s);
ModMatrix schur_complement(const BlockSplit<std::uint64_t>& s, const PrimeField& field);

/// Draws a split from `sample`, and on a singular D draws once more before
/// letting SingularBlock escape.
template <typename Sampler>
auto schur_complement_with_retry(Sampler&& sample, const PrimeField& field)
    -> std::pair<BlockSplit<std::uint64_t>, ModMatrix> {
  for (int attempt = 0;; ++attempt) {
    BlockSplit<std::uint64_t> split = sample();
    try {
      ModMatrix s = schur_complement(split, field);
      return {std::move(split), std::move(s)};
    } catch (const SingularBlock&) {
      if (attempt >= 1) throw;
    }
  }
}

Matrix<Rational> inverse(const Matrix<Rational>& m);
Matrix<double> inverse(const Matrix<double>& m);
ModMatrix inverse(const ModMatrix& m, const PrimeField& field);
ModMatrix multiply(const ModMatrix& a, const ModMatrix& b, const PrimeField& field);

enum class SolveStatus {
  Unique,        // square nonsingular (or full column rank and consistent)
  LeastNorm,     // underdetermined; the minimum-norm solution is returned
  LeastSquares,  // floats only: inconsistent, least-squares least-norm returned
  NoSolution,    // exact scalars only: inconsistent
};

template <typename T>
struct SolveResult {
  SolveStatus status = SolveStatus::NoSolution;
  Matrix<T> solution;
  double relative_residual = 0.0;  // ||M x - rhs|| / max(||rhs||, tiny); 0 for exact solves
};

/// Solves M X = rhs column by column.
SolveResult<Rational> solve_linear(const Matrix<Rational>& m, const Matrix<Rational>& rhs);
SolveResult<double> solve_linear(const Matrix<double>& m, const Matrix<double>& rhs);

// Eigen interop.
Eigen::MatrixXd to_eigen(const Matrix<double>& m);
Matrix<double> from_eigen(const Eigen::MatrixXd& m);
Matrix<double> to_double(const Matrix<Rational>& m);

}  // namespace lrmc
