#include "lrmc/partial.hpp"

#include <nlohmann/json.hpp>

namespace lrmc {

PartialMatrix<double> to_double(const PartialMatrix<Rational>& p) {
  Matrix<double> v(p.values().rows(), p.values().cols());
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) = p.values()(i, j).get_d();
  return PartialMatrix<double>(p.pattern(), std::move(v));
}

PartialMatrix<Rational> sample_integer_filling(const EntryPattern& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> draw(-kIntegerSampleBound, kIntegerSampleBound);
  Matrix<Rational> v(static_cast<std::size_t>(p.rows()), static_cast<std::size_t>(p.cols()));
  for (int i = 1; i <= p.rows(); ++i)
    for (int j = 1; j <= p.cols(); ++j)
      if (p.is_specified(i, j)) v(i - 1, j - 1) = Rational(static_cast<long>(draw(rng)));
  return PartialMatrix<Rational>(p, std::move(v));
}

PartialMatrix<double> sample_gaussian_filling(const EntryPattern& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> draw(0.0, 1.0);
  Matrix<double> v(static_cast<std::size_t>(p.rows()), static_cast<std::size_t>(p.cols()));
  for (int i = 1; i <= p.rows(); ++i)
    for (int j = 1; j <= p.cols(); ++j)
      if (p.is_specified(i, j)) v(i - 1, j - 1) = draw(rng);
  return PartialMatrix<double>(p, std::move(v));
}

nlohmann::json scalar_to_json(const Rational& x) { return x.get_str(); }
nlohmann::json scalar_to_json(double x) { return x; }
nlohmann::json scalar_to_json(const Complex& x) { return nlohmann::json::array({x.real(), x.imag()}); }

template <typename T>
nlohmann::json matrix_to_json(const Matrix<T>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return {{"domain", to_string(domain_of<T>())}, {"entries", rows}};
}

template <typename T>
nlohmann::json partial_to_json(const PartialMatrix<T>& p) {
  nlohmann::json values = nlohmann::json::array();
  for (int i = 1; i <= p.rows(); ++i)
    for (int j = 1; j <= p.cols(); ++j)
      if (p.pattern().is_specified(i, j)) values.push_back({i, j, scalar_to_json(p.at(i, j))});
  return {{"pattern", pattern_to_json(p.pattern())}, {"domain", to_string(domain_of<T>())}, {"values", values}};
}

template nlohmann::json matrix_to_json(const Matrix<Rational>&);
template nlohmann::json matrix_to_json(const Matrix<double>&);
template nlohmann::json matrix_to_json(const Matrix<Complex>&);
template nlohmann::json partial_to_json(const PartialMatrix<Rational>&);
template nlohmann::json partial_to_json(const PartialMatrix<double>&);

PartialMatrix<double> partial_from_json(const nlohmann::json& doc) {
  if (!doc.contains("pattern") || !doc.contains("values")) throw InputError("partial matrix document needs pattern and values");
  EntryPattern p = pattern_from_json(doc.at("pattern"));
  Matrix<double> v(static_cast<std::size_t>(p.rows()), static_cast<std::size_t>(p.cols()));
  for (const auto& e : doc.at("values")) {
    const int i = e.at(0).get<int>();
    const int j = e.at(1).get<int>();
    if (i < 1 || j < 1 || i > p.rows() || j > p.cols()) throw InputError("value outside the grid");
    const auto& x = e.at(2);
    v(i - 1, j - 1) = x.is_string() ? Rational(x.get<std::string>()).get_d() : x.get<double>();
  }
  return PartialMatrix<double>(std::move(p), std::move(v));
}

}  // namespace lrmc
