#include "lrmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lrmc {

std::string_view to_string(ScalarDomain d) {
  switch (d) {
    case ScalarDomain::PrimeField:
      return "prime_field";
    case ScalarDomain::Rational:
      return "rational";
    case ScalarDomain::Real:
      return "real";
    case ScalarDomain::Complex:
      return "complex";
  }
  return "unknown";
}

PrimeField::PrimeField(std::uint64_t p) : p_(p) {
  if (p < 2 || p >= (std::uint64_t{1} << 32)) throw ParameterError("prime modulus must be in [2, 2^32)");
}

std::uint64_t PrimeField::pow(std::uint64_t a, std::uint64_t e) const {
  std::uint64_t result = 1 % p_;
  a %= p_;
  while (e) {
    if (e & 1U) result = mul(result, a);
    a = mul(a, a);
    e >>= 1U;
  }
  return result;
}

std::uint64_t PrimeField::inv(std::uint64_t a) const {
  if (a % p_ == 0) throw SingularBlock("division by zero in F_" + std::to_string(p_));
  return pow(a, p_ - 2);
}

// ---------------------------------------------------------------------------
// Exact elimination

std::size_t rank(const ModMatrix& input, const PrimeField& f) {
  ModMatrix m = input;
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && m(pivot, c) == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != r) {
      for (std::size_t j = c; j < cols; ++j) std::swap(m(r, j), m(pivot, j));
    }
    const std::uint64_t inv = f.inv(m(r, c));
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m(i, c) == 0) continue;
      const std::uint64_t factor = f.mul(m(i, c), inv);
      for (std::size_t j = c; j < cols; ++j) {
        if (m(r, j) != 0) m(i, j) = f.sub(m(i, j), f.mul(factor, m(r, j)));
      }
    }
    ++r;
  }
  return r;
}

namespace {

// Row-reduces m in place to reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(Matrix<Rational>& m, std::size_t col_limit) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < col_limit && r < m.rows(); ++c) {
    std::size_t pivot = r;
    while (pivot < m.rows() && sgn(m(pivot, c)) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != r) {
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(pivot, j));
    }
    const Rational inv = 1 / m(r, c);
    for (std::size_t j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || sgn(m(i, c)) == 0) continue;
      const Rational factor = m(i, c);
      for (std::size_t j = c; j < m.cols(); ++j) {
        if (sgn(m(r, j)) != 0) m(i, j) -= factor * m(r, j);
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

std::size_t rank(const Matrix<Rational>& input) {
  Matrix<Rational> m = input;
  return rref(m, m.cols()).size();
}

std::vector<std::size_t> independent_rows(const Matrix<Rational>& m) {
  // Incremental echelon basis: basis[k] has a leading 1 at lead[k].
  std::vector<std::vector<Rational>> basis;
  std::vector<std::size_t> lead;
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<Rational> v(m.row(i).begin(), m.row(i).end());
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (sgn(v[lead[k]]) == 0) continue;
      const Rational factor = v[lead[k]];
      for (std::size_t j = 0; j < v.size(); ++j) v[j] -= factor * basis[k][j];
    }
    const auto it = std::find_if(v.begin(), v.end(), [](const Rational& x) { return sgn(x) != 0; });
    if (it == v.end()) continue;
    const std::size_t l = static_cast<std::size_t>(it - v.begin());
    const Rational inv = 1 / v[l];
    for (auto& x : v) x *= inv;
    // Keep earlier basis vectors reduced at the new lead.
    for (auto& b : basis) {
      if (sgn(b[l]) == 0) continue;
      const Rational factor = b[l];
      for (std::size_t j = 0; j < v.size(); ++j) b[j] -= factor * v[j];
    }
    basis.push_back(std::move(v));
    lead.push_back(l);
    chosen.push_back(i);
  }
  return chosen;
}

std::vector<std::size_t> independent_rows(const Matrix<double>& m, double rel_tol) {
  double scale = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += x * x;
    scale = std::max(scale, std::sqrt(s));
  }
  std::vector<Eigen::VectorXd> ortho;
  std::vector<std::size_t> chosen;
  if (scale == 0.0) return chosen;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Eigen::VectorXd v(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) v(static_cast<Eigen::Index>(j)) = m(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : ortho) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm > rel_tol * scale) {
      ortho.push_back(v / norm);
      chosen.push_back(i);
    }
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Numerical rank

Eigen::MatrixXd to_eigen(const Matrix<double>& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

Matrix<double> from_eigen(const Eigen::MatrixXd& e) {
  Matrix<double> m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
  return m;
}

Matrix<double> to_double(const Matrix<Rational>& m) {
  Matrix<double> d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = m(i, j).get_d();
  return d;
}

namespace {

std::size_t count_above(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++r;
  }
  return r;
}

}  // namespace

std::vector<double> singular_values(const Matrix<double>& m) {
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw InputError("non-finite matrix entry");
  }
  if (m.empty()) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const Eigen::VectorXd& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

std::size_t numerical_rank(const Matrix<double>& m, double rel_tol) {
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw InputError("non-finite matrix entry");
  }
  if (m.empty()) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  return count_above(svd.singularValues(), rel_tol);
}

std::size_t numerical_rank(const Matrix<Complex>& m, double rel_tol) {
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const Complex z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError("non-finite matrix entry");
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z;
    }
  if (m.empty()) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e);
  return count_above(svd.singularValues(), rel_tol);
}

// ---------------------------------------------------------------------------
// Inverses and Schur complements

Matrix<Rational> inverse(const Matrix<Rational>& m) {
  if (m.rows() != m.cols()) throw SingularBlock("inverse of a non-square block");
  const std::size_t n = m.rows();
  Matrix<Rational> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  if (rref(aug, n).size() != n) throw SingularBlock("singular rational block");
  return aug.block(0, n, n, n);
}

Matrix<double> inverse(const Matrix<double>& m) {
  if (m.rows() != m.cols()) throw SingularBlock("inverse of a non-square block");
  if (m.rows() == 0) return m;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(m));
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw SingularBlock("numerically singular block");
  return from_eigen(lu.inverse());
}

ModMatrix multiply(const ModMatrix& a, const ModMatrix& b, const PrimeField& f) {
  ModMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const std::uint64_t aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = f.add(c(i, j), f.mul(aik, b(k, j)));
    }
  return c;
}

ModMatrix inverse(const ModMatrix& m, const PrimeField& f) {
  if (m.rows() != m.cols()) throw SingularBlock("inverse of a non-square block");
  const std::size_t n = m.rows();
  ModMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && aug(pivot, c) == 0) ++pivot;
    if (pivot == n) throw SingularBlock("singular block over F_" + std::to_string(f.modulus()));
    if (pivot != c) {
      for (std::size_t j = 0; j < 2 * n; ++j) std::swap(aug(c, j), aug(pivot, j));
    }
    const std::uint64_t inv = f.inv(aug(c, c));
    for (std::size_t j = 0; j < 2 * n; ++j) aug(c, j) = f.mul(aug(c, j), inv);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || aug(i, c) == 0) continue;
      const std::uint64_t factor = aug(i, c);
      for (std::size_t j = 0; j < 2 * n; ++j) aug(i, j) = f.sub(aug(i, j), f.mul(factor, aug(c, j)));
    }
  }
  return aug.block(0, n, n, n);
}

namespace {

template <typename T>
void check_split(const BlockSplit<T>& s) {
  if (s.row_cut > s.parent.rows() || s.col_cut > s.parent.cols()) throw ParameterError("block cut out of range");
  if (s.parent.rows() - s.row_cut != s.parent.cols() - s.col_cut) throw SingularBlock("trailing block D is not square");
}

}  // namespace

Matrix<Rational> schur_complement(const BlockSplit<Rational>& s) {
  check_split(s);
  const Matrix<Rational> dinv = inverse(s.d());
  return s.a() - s.b() * (dinv * s.c());
}

Matrix<double> schur_complement(const BlockSplit<double>& s) {
  check_split(s);
  const Matrix<double> dinv = inverse(s.d());
  return s.a() - s.b() * (dinv * s.c());
}

ModMatrix schur_complement(const BlockSplit<std::uint64_t>& s, const PrimeField& f) {
  check_split(s);
  const ModMatrix dinv = inverse(s.d(), f);
  const ModMatrix bdc = multiply(s.b(), multiply(dinv, s.c(), f), f);
  ModMatrix a = s.a();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = f.sub(a(i, j), bdc(i, j));
  return a;
}

// ---------------------------------------------------------------------------
// Linear solves

SolveResult<Rational> solve_linear(const Matrix<Rational>& m, const Matrix<Rational>& rhs) {
  if (m.rows() != rhs.rows()) throw ParameterError("solve_linear: dimension mismatch");
  const std::size_t n = m.cols();
  SolveResult<Rational> out;
  Matrix<Rational> aug(m.rows(), n + rhs.cols());
  aug.set_block(0, 0, m);
  aug.set_block(0, n, rhs);
  const std::vector<std::size_t> pivots = rref(aug, n);
  for (std::size_t i = pivots.size(); i < aug.rows(); ++i) {
    for (std::size_t j = n; j < aug.cols(); ++j) {
      if (sgn(aug(i, j)) != 0) {
        out.status = SolveStatus::NoSolution;
        return out;
      }
    }
  }
  if (pivots.size() == n) {
    out.status = SolveStatus::Unique;
    out.solution = Matrix<Rational>(n, rhs.cols());
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < rhs.cols(); ++j) out.solution(pivots[k], j) = aug(k, n + j);
    return out;
  }
  // Consistent and underdetermined: x = M_I^T (M_I M_I^T)^{-1} b_I on independent rows I.
  const std::vector<std::size_t> rows = independent_rows(m);
  std::vector<std::size_t> all_cols(n);
  for (std::size_t j = 0; j < n; ++j) all_cols[j] = j;
  std::vector<std::size_t> rhs_cols(rhs.cols());
  for (std::size_t j = 0; j < rhs.cols(); ++j) rhs_cols[j] = j;
  const Matrix<Rational> mi = m.submatrix(rows, all_cols);
  const Matrix<Rational> bi = rhs.submatrix(rows, rhs_cols);
  const Matrix<Rational> mit = mi.transposed();
  out.status = SolveStatus::LeastNorm;
  out.solution = mit * (inverse(mi * mit) * bi);
  return out;
}

SolveResult<double> solve_linear(const Matrix<double>& m, const Matrix<double>& rhs) {
  if (m.rows() != rhs.rows()) throw ParameterError("solve_linear: dimension mismatch");
  for (double x : m.data())
    if (!std::isfinite(x)) throw InputError("non-finite matrix entry");
  for (double x : rhs.data())
    if (!std::isfinite(x)) throw InputError("non-finite right-hand side");
  SolveResult<double> out;
  if (m.cols() == 0) {
    out.solution = Matrix<double>(0, rhs.cols());
    double norm = 0.0;
    for (double x : rhs.data()) norm = std::max(norm, std::abs(x));
    out.status = norm == 0.0 ? SolveStatus::Unique : SolveStatus::LeastSquares;
    out.relative_residual = norm == 0.0 ? 0.0 : 1.0;
    return out;
  }
  const Eigen::MatrixXd em = to_eigen(m);
  const Eigen::MatrixXd eb = to_eigen(rhs);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(em);
  cod.setThreshold(1e-12);
  const Eigen::MatrixXd x = cod.solve(eb);
  const double bnorm = eb.norm();
  const double res = (em * x - eb).norm();
  out.relative_residual = bnorm > 0.0 ? res / bnorm : res;
  out.solution = from_eigen(x);
  constexpr double kConsistencyTol = 1e-8;
  if (out.relative_residual > kConsistencyTol) {
    out.status = SolveStatus::LeastSquares;
  } else if (static_cast<std::size_t>(cod.rank()) < m.cols()) {
    out.status = SolveStatus::LeastNorm;
  } else {
    out.status = SolveStatus::Unique;
  }
  return out;
}

}  // namespace lrmc
