#include "lrmc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lrmc/error.hpp"
#include "lrmc/generic_rank.hpp"
#include "lrmc/linalg.hpp"
#include "lrmc/parallel.hpp"

namespace lrmc {

void validate(const SolverConfig& c) {
  if (c.restarts <= 0 || c.max_iterations <= 0 || c.sample_count <= 0)
    throw ParameterError("solver config: restarts, max_iterations and sample_count must be positive");
  if (!(c.residual_tol > 0 && c.residual_tol < 1)) throw ParameterError("solver config: residual_tol must lie in (0,1)");
  if (!(c.step_tol > 0) || !(c.rank_rel_tol > 0)) throw ParameterError("solver config: tolerances must be positive");
  if (!(c.typical_frequency_threshold > 0 && c.typical_frequency_threshold <= 1))
    throw ParameterError("solver config: typical_frequency_threshold must lie in (0,1]");
}

namespace {

// Specified entries grouped by column: V is eliminated exactly (variable
// projection), so Levenberg-Marquardt runs over U alone. For fixed U each
// column of V is the least-norm solution on that column's specified rows.
struct Column {
  std::vector<int> rows;
  Eigen::VectorXd a;
};

// Objective 0.5 * ||U V(U) - A||_S^2; fills the residual and, when asked,
// the Golub-Pereyra Jacobian with respect to the entries of U.
double projected(const std::vector<Column>& cols, const Eigen::MatrixXd& u, Eigen::VectorXd& res, Eigen::MatrixXd* jac,
                 Eigen::MatrixXd* v_out = nullptr) {
  const int r = static_cast<int>(u.cols());
  int total = 0;
  for (const Column& c : cols) total += static_cast<int>(c.rows.size());
  res.resize(total);
  if (jac) jac->setZero(total, u.rows() * r);
  if (v_out) v_out->setZero(r, static_cast<Eigen::Index>(cols.size()));
  int off = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const Column& c = cols[j];
    const int s = static_cast<int>(c.rows.size());
    if (s == 0) continue;
    Eigen::MatrixXd uj(s, r);
    for (int t = 0; t < s; ++t) uj.row(t) = u.row(c.rows[t]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(uj);
    cod.setThreshold(1e-12);
    const Eigen::VectorXd v = cod.solve(c.a);
    const Eigen::VectorXd rj = uj * v - c.a;
    res.segment(off, s) = rj;
    if (v_out) v_out->col(static_cast<Eigen::Index>(j)) = v;
    if (jac) {
      const Eigen::MatrixXd pinv = cod.pseudoInverse();
      const Eigen::MatrixXd proj_perp = Eigen::MatrixXd::Identity(s, s) - uj * pinv;
      for (int t = 0; t < s; ++t)
        for (int k = 0; k < r; ++k)
          jac->block(off, c.rows[t] * r + k, s, 1) += proj_perp.col(t) * v(k) + pinv.row(k).transpose() * rj(t);
    }
    off += s;
  }
  return 0.5 * res.squaredNorm();
}

// One Levenberg-Marquardt run from a Gaussian U. Returns the final
// objective and leaves the factor in u.
double lm_run(const std::vector<Column>& cols, int n, int r, const SolverConfig& cfg, double target,
              std::mt19937_64& rng, Eigen::MatrixXd& u) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  u.resize(n, r);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < r; ++k) u(i, k) = gauss(rng);
  Eigen::VectorXd res, trial_res;
  Eigen::MatrixXd jac;
  double f = projected(cols, u, res, &jac);
  double lambda = -1.0;
  double nu_factor = 2.0;
  double window_start = f;
  for (int it = 0; it < cfg.max_iterations && f > target; ++it) {
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * res;
    if (lambda < 0) lambda = 1e-3 * std::max(1e-12, h.diagonal().maxCoeff());
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd damped = h;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      if (step.norm() <= cfg.step_tol * (1.0 + u.norm())) return f;
      Eigen::MatrixXd trial = u;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < r; ++k) trial(i, k) += step(i * r + k);
      const double f_new = projected(cols, trial, trial_res, nullptr);
      const double predicted = -(step.dot(g) + 0.5 * step.dot(h * step));
      if (f_new < f && predicted > 0) {
        const double rho = (f - f_new) / predicted;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu_factor = 2.0;
        u.swap(trial);
        f = projected(cols, u, res, &jac);
        accepted = true;
      } else {
        lambda *= nu_factor;
        nu_factor *= 2.0;
      }
    }
    if (!accepted) return f;
    // Less than 0.1% progress over 40 iterations: a positive local minimum,
    // or a minimizing sequence running off to infinity. Neither certifies
    // rank r.
    if (it % 40 == 39) {
      if (f > 0.999 * window_start) return f;
      window_start = f;
    }
  }
  return f;
}

std::vector<Column> specified_columns(const PartialMatrix<double>& a, double scale) {
  std::vector<Column> cols(static_cast<std::size_t>(a.cols()));
  for (int j = 1; j <= a.cols(); ++j) {
    std::vector<double> vals;
    for (int i = 1; i <= a.rows(); ++i)
      if (a.pattern().is_specified(i, j)) {
        cols[j - 1].rows.push_back(i - 1);
        vals.push_back(a.at(i, j) / scale);
      }
    cols[j - 1].a = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  return cols;
}

double specified_rms(const PartialMatrix<double>& a) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Cell& c : a.pattern().specified()) {
    sum += a.at(c.row, c.col) * a.at(c.row, c.col);
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

}  // namespace

RankFit fit_rank(const PartialMatrix<double>& a, int r, const SolverConfig& cfg, std::uint64_t seed) {
  const int n = a.rows(), m = a.cols();
  if (r < 0 || r > std::min(n, m)) throw ParameterError("fit_rank: rank out of range");
  RankFit fit;
  const double scale = specified_rms(a);
  if (scale == 0.0) {
    fit.success = true;
    fit.completion = Matrix<double>(n, m);
    return fit;
  }
  if (r == 0) {
    fit.relative_residual = 1.0;
    fit.completion = Matrix<double>(n, m);
    return fit;
  }
  const std::vector<Column> cols = specified_columns(a, scale);
  const double norm2 = static_cast<double>(a.pattern().num_specified());  // data normalized to RMS 1
  const double target = 0.5 * cfg.residual_tol * cfg.residual_tol * norm2;
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd u, best_u;
  for (int t = 0; t < cfg.restarts; ++t) {
    const double f = lm_run(cols, n, r, cfg, target, rng, u);
    fit.restarts_used = t + 1;
    if (f < best) {
      best = f;
      best_u = u;
    }
    if (f <= target) break;
  }
  fit.success = best <= target;
  fit.relative_residual = std::sqrt(2.0 * best / norm2);
  Eigen::VectorXd res;
  Eigen::MatrixXd v;
  projected(cols, best_u, res, nullptr, &v);
  const Eigen::MatrixXd uv = best_u * v;
  fit.completion = Matrix<double>(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) fit.completion(i, j) = uv(i, j) * scale;
  fit.numerical_rank = static_cast<int>(numerical_rank(fit.completion, cfg.rank_rel_tol));
  return fit;
}

int min_real_rank(const PartialMatrix<double>& a, int r_min, int r_max, const SolverConfig& cfg, std::uint64_t seed) {
  const int full = std::min(a.rows(), a.cols());
  if (r_max > full) throw ParameterError("min_real_rank: r_max exceeds min(n,m)");
  if (specified_rms(a) == 0.0) return 0;
  for (int r = std::max(0, r_min); r <= r_max; ++r) {
    // Any filling completes to full rank, so that rank needs no search.
    if (r == full) return r;
    if (fit_rank(a, r, cfg, seed + static_cast<std::uint64_t>(r) * 0x9E3779B97F4A7C15ULL).success) return r;
  }
  throw SolverExhausted("min_real_rank: no rank up to " + std::to_string(r_max) + " was reached");
}

int min_real_rank(const PartialMatrix<double>& a, int r_max, const SolverConfig& cfg) {
  validate(cfg);
  return min_real_rank(a, 1, r_max, cfg, cfg.seed);
}

std::uint64_t solver_seed(const SolverConfig& cfg, std::size_t index) {
  return (cfg.seed + index) * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL;
}

TypicalRankReport estimate_typical(const EntryPattern& p, const SolverConfig& cfg) {
  validate(cfg);
  TypicalRankReport rep;
  rep.pattern = p;
  rep.config = cfg;
  rep.samples = cfg.sample_count;
  rep.generic_completion_rank = generic_completion_rank(p, kDefaultRankTrials, cfg.seed).gcr;
  const int full = p.min_dim();
  rep.sample_ranks.assign(static_cast<std::size_t>(cfg.sample_count), -1);
  const unsigned threads = cfg.threads ? cfg.threads : default_thread_count();
  parallel_for(static_cast<std::size_t>(cfg.sample_count), threads, [&](std::size_t i) {
    const PartialMatrix<double> a = sample_gaussian_filling(p, cfg.seed + i);
    try {
      const int r = min_real_rank(a, rep.generic_completion_rank, full, cfg, solver_seed(cfg, i));
      if (r < rep.generic_completion_rank) throw Error("min_real_rank returned less than the generic completion rank");
      rep.sample_ranks[i] = r;
    } catch (const SolverExhausted&) {
      rep.sample_ranks[i] = -1;
    }
  });
  for (int r : rep.sample_ranks) {
    if (r < 0) ++rep.failures;
    else ++rep.counts[r];
  }
  for (auto [r, c] : rep.counts) rep.histogram[r] = static_cast<double>(c) / cfg.sample_count;
  int lo = -1, hi = -1;
  for (auto [r, f] : rep.histogram)
    if (f >= cfg.typical_frequency_threshold) {
      if (lo < 0) lo = r;
      hi = r;
    }
  if (lo >= 0)
    for (int r = lo; r <= hi; ++r) {
      rep.inferred_typical_ranks.insert(r);
      rep.inferred_typical_coranks.insert(full - r);
      auto it = rep.histogram.find(r);
      if (it == rep.histogram.end() || it->second < cfg.typical_frequency_threshold) rep.gap_anomaly = true;
    }
  rep.unreliable = rep.failures > 0.05 * cfg.sample_count;
  return rep;
}

PaddingResult padding_invariance(const EntryPattern& u, const std::vector<int>& sizes, const SolverConfig& cfg) {
  PaddingResult out;
  out.consistent = true;
  for (int n : sizes) {
    if (n < u.rows() || n < u.cols()) throw ParameterError("padding_invariance: pattern does not fit in the grid");
    out.reports.push_back(estimate_typical(u.embedded(n, n), cfg));
    if (out.reports.back().inferred_typical_coranks != out.reports.front().inferred_typical_coranks)
      out.consistent = false;
  }
  return out;
}

bool padding_invariance_check(const EntryPattern& u, const std::vector<int>& sizes, const SolverConfig& cfg) {
  return padding_invariance(u, sizes, cfg).consistent;
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"restarts", c.restarts},
          {"max_iterations", c.max_iterations},
          {"residual_tol", c.residual_tol},
          {"step_tol", c.step_tol},
          {"rank_rel_tol", c.rank_rel_tol},
          {"sample_count", c.sample_count},
          {"seed", c.seed},
          {"typical_frequency_threshold", c.typical_frequency_threshold}};
}

nlohmann::json to_json(const TypicalRankReport& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (auto [rank, f] : r.histogram) hist[std::to_string(rank)] = f;
  nlohmann::json counts = nlohmann::json::object();
  for (auto [rank, c] : r.counts) counts[std::to_string(rank)] = c;
  return {{"pattern", pattern_to_json(r.pattern)},
          {"config", to_json(r.config)},
          {"generic_completion_rank", r.generic_completion_rank},
          {"samples", r.samples},
          {"failures", r.failures},
          {"counts", counts},
          {"histogram", hist},
          {"inferred_typical_ranks", r.inferred_typical_ranks},
          {"inferred_typical_coranks", r.inferred_typical_coranks},
          {"gap_anomaly", r.gap_anomaly},
          {"unreliable", r.unreliable},
          {"note",
           "ranks are upper bounds per sample: a real completion the solver misses raises the reported rank; "
           "absence of a rank is evidence, not proof"}};
}

std::string histogram_csv(const TypicalRankReport& r) {
  std::ostringstream out;
  out << "rank,frequency\n";
  out.precision(10);
  for (auto [rank, f] : r.histogram) out << rank << ',' << f << '\n';
  return out.str();
}

}  // namespace lrmc
