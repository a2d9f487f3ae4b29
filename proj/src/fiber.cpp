#include "lrmc/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lrmc/error.hpp"
#include "lrmc/parallel.hpp"

namespace lrmc {
namespace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Determinant of an s x s row-major buffer, destroyed in the process.
Complex det_inplace(Complex* a, int s) {
  Complex det = 1.0;
  for (int k = 0; k < s; ++k) {
    int piv = k;
    double best = std::abs(a[k * s + k]);
    for (int i = k + 1; i < s; ++i) {
      const double v = std::abs(a[i * s + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != k) {
      for (int j = k; j < s; ++j) std::swap(a[k * s + j], a[piv * s + j]);
      det = -det;
    }
    const Complex p = a[k * s + k];
    det *= p;
    for (int i = k + 1; i < s; ++i) {
      const Complex f = a[i * s + k] / p;
      if (f == 0.0) continue;
      for (int j = k + 1; j < s; ++j) a[i * s + j] -= f * a[k * s + j];
    }
  }
  return det;
}

struct Minor {
  std::vector<int> rows, cols;  // 0-based
};

void combinations(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> c(static_cast<std::size_t>(k));
  std::iota(c.begin(), c.end(), 0);
  if (k > n) return;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// The polynomial system in the unknown cells, on a normalized copy of the data.
class MinorSystem {
 public:
  MinorSystem(const PartialMatrix<double>& a, double scale, int r) : n_(a.rows()), m_(a.cols()), s_(r + 1) {
    base_.assign(static_cast<std::size_t>(n_ * m_), 0.0);
    unknown_at_.assign(static_cast<std::size_t>(n_ * m_), -1);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) base_[static_cast<std::size_t>(i * m_ + j)] = a.values()(i, j) / scale;
    int u = 0;
    for (const Cell& c : a.pattern().unspecified()) unknown_at_[static_cast<std::size_t>((c.row - 1) * m_ + c.col - 1)] = u++;
    unknowns_ = u;
  }

  int unknowns() const { return unknowns_; }
  int size() const { return s_; }

  void fill(const Minor& mi, const CVec& x, Complex* buf) const {
    for (int a = 0; a < s_; ++a)
      for (int b = 0; b < s_; ++b) {
        const std::size_t idx = static_cast<std::size_t>(mi.rows[a] * m_ + mi.cols[b]);
        const int u = unknown_at_[idx];
        buf[a * s_ + b] = u >= 0 ? x(u) : Complex(base_[idx]);
      }
  }

  Complex value(const Minor& mi, const CVec& x, std::vector<Complex>& scratch) const {
    scratch.resize(static_cast<std::size_t>(s_ * s_));
    fill(mi, x, scratch.data());
    return det_inplace(scratch.data(), s_);
  }

  // |det| divided by the product of row norms.
  double relative_value(const Minor& mi, const CVec& x, std::vector<Complex>& scratch) const {
    scratch.resize(static_cast<std::size_t>(s_ * s_));
    fill(mi, x, scratch.data());
    double bound = 1.0;
    for (int a = 0; a < s_; ++a) {
      double nr = 0.0;
      for (int b = 0; b < s_; ++b) nr += std::norm(scratch[static_cast<std::size_t>(a * s_ + b)]);
      bound *= std::sqrt(nr);
    }
    if (bound == 0.0) return 0.0;
    return std::abs(det_inplace(scratch.data(), s_)) / bound;
  }

 private:
  int n_, m_, s_;
  std::vector<double> base_;
  std::vector<int> unknown_at_;
  int unknowns_ = 0;
};

Complex complex_gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

// Rank <= r written as M(x) Q [I; K] = 0 for a random unitary Q and an
// r x (m-r) unknown K. Every zero is a genuine completion, unlike a random
// square compression of the minors, whose extra roots swamp the few real
// ones. When |U| = (n-r)(m-r) the system is square.
class KernelChart {
 public:
  KernelChart(const PartialMatrix<double>& a, double scale, int r, std::mt19937_64& rng)
      : n_(a.rows()), m_(a.cols()), r_(r), base_(a.rows(), a.cols()) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) base_(i, j) = a.values()(i, j) / scale;
    for (const Cell& c : a.pattern().unspecified()) cells_.push_back(c);
    CMat g(m_, m_);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = complex_gaussian(rng);
    const CMat q = Eigen::HouseholderQR<CMat>(g).householderQ();
    q_top_ = q.leftCols(m_ - r_);
    q_bot_ = q.rightCols(r_);
  }

  int unknowns() const { return static_cast<int>(cells_.size()); }
  int variables() const { return unknowns() + r_ * (m_ - r_); }
  int equations() const { return n_ * (m_ - r_); }

  CMat matrix(const CVec& z) const {
    CMat m = base_.cast<Complex>();
    for (std::size_t u = 0; u < cells_.size(); ++u) m(cells_[u].row - 1, cells_[u].col - 1) = z(static_cast<Eigen::Index>(u));
    return m;
  }

  CVec eval(const CVec& z, CMat* jac) const {
    const int k = m_ - r_;
    const CMat m = matrix(z);
    CMat kk(r_, k);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < k; ++b) kk(a, b) = z(unknowns() + a * k + b);
    const CMat p = q_top_ + q_bot_ * kk;
    const CMat f = m * p;
    CVec out(equations());
    for (int i = 0; i < n_; ++i)
      for (int l = 0; l < k; ++l) out(i * k + l) = f(i, l);
    if (jac) {
      *jac = CMat::Zero(equations(), variables());
      for (std::size_t u = 0; u < cells_.size(); ++u) {
        const int a = cells_[u].row - 1;
        const int b = cells_[u].col - 1;
        for (int l = 0; l < k; ++l) (*jac)(a * k + l, static_cast<Eigen::Index>(u)) = p(b, l);
      }
      const CMat mq = m * q_bot_;
      for (int a = 0; a < r_; ++a)
        for (int l = 0; l < k; ++l)
          for (int i = 0; i < n_; ++i) (*jac)(i * k + l, unknowns() + a * k + l) = mq(i, a);
    }
    return out;
  }

 private:
  int n_, m_, r_;
  Eigen::MatrixXd base_;
  std::vector<Cell> cells_;
  CMat q_top_, q_bot_;
};

// Damped Gauss-Newton (plain Newton when square). Returns true on convergence.
bool newton(const KernelChart& sys, CVec& z, const FiberConfig& cfg) {
  CMat jac;
  CVec f = sys.eval(z, &jac);
  double fn = f.norm();
  for (int it = 0; it < cfg.max_newton_iterations; ++it) {
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(jac);
    const CVec dz = cod.solve(f);
    if (!dz.allFinite()) return false;
    double alpha = 1.0;
    CVec trial = z - dz;
    CVec ft = sys.eval(trial, nullptr);
    for (int h = 0; h < 12 && ft.norm() > fn; ++h) {
      alpha *= 0.5;
      trial = z - alpha * dz;
      ft = sys.eval(trial, nullptr);
    }
    z = trial;
    const double step = alpha * dz.norm();
    if (z.norm() > 1e8 || !z.allFinite()) return false;
    f = sys.eval(z, &jac);
    fn = f.norm();
    if (step < cfg.step_tol * (1.0 + z.norm())) return true;
  }
  return false;
}

}  // namespace

FiberReport enumerate_fiber(const PartialMatrix<double>& a, int r, const FiberConfig& cfg) {
  const EntryPattern& p = a.pattern();
  const std::size_t nu = p.num_unspecified();
  if (nu == 0) throw ParameterError("enumerate_fiber: no unspecified cells");
  if (nu > cfg.max_unknowns) throw ParameterError("enumerate_fiber: too many unspecified cells for multi-start Newton");
  if (r < 0 || r + 1 > p.min_dim()) throw ParameterError("enumerate_fiber: rank must satisfy 0 <= r < min(n,m)");

  double scale = 0.0;
  for (const Cell& c : p.specified()) scale += a.at(c.row, c.col) * a.at(c.row, c.col);
  scale = p.num_specified() ? std::sqrt(scale / static_cast<double>(p.num_specified())) : 1.0;
  if (scale == 0.0) scale = 1.0;

  const MinorSystem sys(a, scale, r);
  std::vector<std::vector<int>> rsets, csets;
  combinations(p.rows(), r + 1, rsets);
  combinations(p.cols(), r + 1, csets);
  std::vector<Minor> all;
  for (const auto& rs : rsets)
    for (const auto& cs : csets) all.push_back({rs, cs});

  FiberReport report;
  report.pattern = p;
  report.seed = cfg.seed;
  report.target_rank = r;
  report.minors_total = all.size();

  std::mt19937_64 rng(cfg.seed);
  const KernelChart chart(a, scale, r, rng);
  report.chart_equations = static_cast<std::size_t>(chart.equations());

  const int starts = cfg.starts > 0 ? cfg.starts : default_fiber_starts(nu);
  report.starts_used = starts;
  std::vector<std::optional<CVec>> endpoints(static_cast<std::size_t>(starts));
  parallel_for(static_cast<std::size_t>(starts), default_thread_count(), [&](std::size_t s) {
    std::mt19937_64 srng(cfg.seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL + s);
    CVec z(chart.variables());
    for (Eigen::Index u = 0; u < z.size(); ++u) z(u) = complex_gaussian(srng);
    if (!newton(chart, z, cfg)) return;
    const CVec x = z.head(static_cast<Eigen::Index>(nu));
    std::vector<Complex> scratch;
    for (const Minor& mi : all)
      if (sys.relative_value(mi, x, scratch) >= cfg.certify_tol) return;
    endpoints[s] = x;
  });

  // Cluster in start order so the result does not depend on thread timing.
  std::vector<CVec> centers;
  for (const auto& e : endpoints) {
    if (!e) continue;
    ++report.converged_starts;
    const CVec& x = *e;
    bool merged = false;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double d = (centers[k] - x).cwiseAbs().maxCoeff();
      if (d < cfg.cluster_radius * (1.0 + centers[k].cwiseAbs().maxCoeff())) {
        ++report.solutions[k].hits;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    centers.push_back(x);
    FiberSolution sol;
    sol.hits = 1;
    double imag = 0.0;
    for (Eigen::Index u = 0; u < x.size(); ++u) {
      sol.values.push_back(x(u) * scale);
      imag = std::max(imag, std::abs(x(u).imag()));
    }
    sol.real = imag < cfg.real_tol * (1.0 + x.cwiseAbs().maxCoeff());
    if (sol.real)
      for (Complex& v : sol.values) v = Complex(v.real(), 0.0);
    std::vector<Complex> scratch;
    for (const Minor& mi : all) sol.residual = std::max(sol.residual, sys.relative_value(mi, x, scratch));
    report.solutions.push_back(std::move(sol));
  }
  if (report.solutions.empty()) throw EmptyFiberEvidence("enumerate_fiber: no start converged to a certified completion");
  for (const auto& s : report.solutions) (s.real ? report.real_count : report.complex_count)++;
  return report;
}

Matrix<Complex> completed_matrix(const PartialMatrix<double>& a, const FiberSolution& s) {
  Matrix<Complex> m(a.values().rows(), a.values().cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = a.values()(i, j);
  std::size_t u = 0;
  for (const Cell& c : a.pattern().unspecified()) m(c.row - 1, c.col - 1) = s.values.at(u++);
  return m;
}

std::vector<Matrix<double>> real_solutions(const FiberReport& report, const PartialMatrix<double>& a) {
  std::vector<Matrix<double>> out;
  for (const auto& s : report.solutions) {
    if (!s.real) continue;
    Matrix<double> m = a.values();
    std::size_t u = 0;
    for (const Cell& c : a.pattern().unspecified()) m(c.row - 1, c.col - 1) = s.values.at(u++).real();
    out.push_back(std::move(m));
  }
  return out;
}

bool conjugate_closed(const FiberReport& report, double rel_tol) {
  for (const auto& s : report.solutions) {
    if (s.real) continue;
    double scale = 1.0;
    for (const Complex& v : s.values) scale = std::max(scale, std::abs(v));
    bool found = false;
    for (const auto& t : report.solutions) {
      if (t.real || t.values.size() != s.values.size()) continue;
      double d = 0.0;
      for (std::size_t i = 0; i < s.values.size(); ++i) d = std::max(d, std::abs(t.values[i] - std::conj(s.values[i])));
      if (d <= rel_tol * scale) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

nlohmann::json to_json(const FiberReport& r) {
  nlohmann::json sols = nlohmann::json::array();
  for (const auto& s : r.solutions) {
    nlohmann::json vals = nlohmann::json::array();
    for (const Complex& v : s.values) vals.push_back({v.real(), v.imag()});
    sols.push_back({{"values", vals}, {"residual", s.residual}, {"real", s.real}, {"hits", s.hits}});
  }
  return {{"pattern", pattern_to_json(r.pattern)},
          {"seed", r.seed},
          {"target_rank", r.target_rank},
          {"distinct_solutions", r.solutions.size()},
          {"real_count", r.real_count},
          {"complex_count", r.complex_count},
          {"starts_used", r.starts_used},
          {"converged_starts", r.converged_starts},
          {"minors_total", r.minors_total},
          {"chart_equations", r.chart_equations},
          {"solutions", sols},
          {"note", "multi-start Newton on a random kernel chart: the count is a lower bound, not a certified root count"}};
}

}  // namespace lrmc
