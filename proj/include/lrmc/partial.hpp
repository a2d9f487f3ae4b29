#pragma once

// Partially filled matrices and the samplers that produce generic fillings.

#include <cmath>
#include <cstdint>
#include <random>

#include <nlohmann/json_fwd.hpp>

#include "lrmc/error.hpp"
#include "lrmc/matrix.hpp"
#include "lrmc/pattern.hpp"

namespace lrmc {

/// A pattern plus values on its specified cells. Values are stored densely;
/// unspecified cells always hold zero so two equal fillings compare equal.
template <typename T>
class PartialMatrix {
 public:
  PartialMatrix() = default;
  PartialMatrix(EntryPattern pattern, Matrix<T> values) : pattern_(std::move(pattern)), values_(std::move(values)) {
    if (values_.rows() != static_cast<std::size_t>(pattern_.rows()) ||
        values_.cols() != static_cast<std::size_t>(pattern_.cols()))
      throw ParameterError("partial matrix: value grid does not match the pattern");
    for (const Cell& c : pattern_.unspecified()) values_(c.row - 1, c.col - 1) = T(0);
    if constexpr (std::is_floating_point_v<T>) {
      for (const T& x : values_.data())
        if (!std::isfinite(x)) throw InputError("partial matrix: non-finite value");
    }
  }

  const EntryPattern& pattern() const { return pattern_; }
  /// Dense values, zero on unspecified cells.
  const Matrix<T>& values() const { return values_; }
  int rows() const { return pattern_.rows(); }
  int cols() const { return pattern_.cols(); }
  /// 1-based access to a specified value.
  const T& at(int row, int col) const { return values_(row - 1, col - 1); }

 private:
  EntryPattern pattern_;
  Matrix<T> values_;
};

template <typename T>
constexpr ScalarDomain domain_of() {
  if constexpr (std::is_same_v<T, Rational>) return ScalarDomain::Rational;
  else if constexpr (std::is_same_v<T, double>) return ScalarDomain::Real;
  else if constexpr (std::is_same_v<T, Complex>) return ScalarDomain::Complex;
  else return ScalarDomain::PrimeField;
}

PartialMatrix<double> to_double(const PartialMatrix<Rational>& p);

inline constexpr std::int64_t kIntegerSampleBound = 1'000'000;

/// I.i.d. integers in [-10^6, 10^6] on the specified cells.
PartialMatrix<Rational> sample_integer_filling(const EntryPattern& p, std::uint64_t seed);
/// I.i.d. standard Gaussians on the specified cells.
PartialMatrix<double> sample_gaussian_filling(const EntryPattern& p, std::uint64_t seed);

/// Fill a pattern with the entries of a given full matrix (unspecified cells dropped).
template <typename T>
PartialMatrix<T> restrict_to_pattern(const EntryPattern& p, const Matrix<T>& full) {
  return PartialMatrix<T>(p, full);
}

// Scalar <-> JSON. Rationals are written as "p/q" strings, floats as numbers.
nlohmann::json scalar_to_json(const Rational& x);
nlohmann::json scalar_to_json(double x);
nlohmann::json scalar_to_json(const Complex& x);
template <typename T>
nlohmann::json matrix_to_json(const Matrix<T>& m);
template <typename T>
nlohmann::json partial_to_json(const PartialMatrix<T>& p);

PartialMatrix<double> partial_from_json(const nlohmann::json& doc);

}  // namespace lrmc
