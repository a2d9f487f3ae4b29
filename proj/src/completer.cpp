#include "lrmc/completer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lrmc/error.hpp"
#include "lrmc/fiber.hpp"
#include "lrmc/linalg.hpp"

namespace lrmc {

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::AppendRow: return "AppendRow";
    case StepKind::AppendCol: return "AppendCol";
    case StepKind::SchurReduce: return "SchurReduce";
    case StepKind::SchurLift: return "SchurLift";
    case StepKind::RecursionEnter: return "RecursionEnter";
    case StepKind::MinorSolve: return "MinorSolve";
    case StepKind::AssignFree: return "AssignFree";
  }
  return "?";
}

std::string_view to_string(AppendMode m) {
  switch (m) {
    case AppendMode::Unique: return "unique";
    case AppendMode::Overdetermined: return "overdetermined";
    case AppendMode::LeastNorm: return "least-norm";
    case AppendMode::Free: return "free";
  }
  return "?";
}

std::size_t matrix_rank(const Matrix<Rational>& m) { return m.empty() ? 0 : rank(m); }
std::size_t matrix_rank(const Matrix<double>& m) { return m.empty() ? 0 : numerical_rank(m, kDefaultRankTol); }

long circulant1_threshold(int r) {
  if (r < 0) throw ParameterError("corank must be non-negative");
  long c = 0;
  for (int i = 0; i < r; ++i) c = 4 * c + 1;
  return c;
}

long circulantk_threshold(int k, int m) {
  if (k < 1 || m < 0) throw ParameterError("circulantk needs k >= 1 and m >= 0");
  long c = k - 1;
  for (int i = 0; i < m; ++i) c = 4 * c + k;
  return c;
}

int circulantk_corank(int k, int m) { return k / 2 + m * k; }

namespace {

// Rank of a sub-block measured against the scale of an enclosing block. A
// relative test on the sub-block alone would call a 1x1 round-off residue
// full rank.
std::size_t rank_within(const Matrix<Rational>& m, const Matrix<Rational>&) { return matrix_rank(m); }
std::size_t rank_within(const Matrix<double>& m, const Matrix<double>& enclosing) {
  if (m.empty()) return 0;
  const std::vector<double> outer = singular_values(enclosing);
  const double ref = outer.empty() ? 0.0 : outer.front();
  std::size_t r = 0;
  for (double sv : singular_values(m))
    if (sv > kDefaultRankTol * ref) ++r;
  return r;
}

using Index = std::vector<std::size_t>;

Index iota_index(std::size_t from, std::size_t to) {
  Index v;
  for (std::size_t i = from; i < to; ++i) v.push_back(i);
  return v;
}

Index concat(Index a, const Index& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Index slice(const Index& v, std::size_t from, std::size_t to) { return Index(v.begin() + from, v.begin() + to); }

std::vector<int> one_based(const Index& v) {
  std::vector<int> out;
  for (std::size_t i : v) out.push_back(static_cast<int>(i) + 1);
  return out;
}

template <typename T>
T random_value(std::mt19937_64& rng);
template <>
Rational random_value<Rational>(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-1000, 1000);
  return Rational(d(rng));
}
template <>
double random_value<double>(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(rng);
}

// A matrix being completed, with the known-cell mask and the shared log.
template <typename T>
struct Work {
  Matrix<T> val;
  std::vector<char> known;
  std::vector<CompletionStep<T>>* log = nullptr;
  int depth = 0;
  std::mt19937_64* rng = nullptr;
  const CompleteOptions* opt = nullptr;

  std::size_t rows() const { return val.rows(); }
  std::size_t cols() const { return val.cols(); }
  bool is_known(std::size_t i, std::size_t j) const { return known[i * val.cols() + j] != 0; }
  void set(std::size_t i, std::size_t j, const T& v) {
    val(i, j) = v;
    known[i * val.cols() + j] = 1;
  }
  bool all_known(const Index& r, const Index& c) const {
    for (std::size_t i : r)
      for (std::size_t j : c)
        if (!is_known(i, j)) return false;
    return true;
  }
  CompletionStep<T>& push(StepKind kind) {
    log->push_back({});
    log->back().kind = kind;
    log->back().depth = depth;
    return log->back();
  }
};

template <typename T>
Work<T> make_work(const PartialMatrix<T>& a, std::vector<CompletionStep<T>>& log, std::mt19937_64& rng,
                  const CompleteOptions& opt) {
  Work<T> w;
  w.val = a.values();
  w.known.assign(w.val.rows() * w.val.cols(), 1);
  for (const Cell& c : a.pattern().unspecified()) w.known[(c.row - 1) * w.val.cols() + (c.col - 1)] = 0;
  w.log = &log;
  w.rng = &rng;
  w.opt = &opt;
  return w;
}

template <typename T>
void assign_free(Work<T>& w, const std::vector<std::pair<std::size_t, std::size_t>>& cells, const std::string& label,
                 const T* fixed = nullptr) {
  std::vector<Assignment<T>> as;
  for (auto [i, j] : cells) {
    if (w.is_known(i, j)) continue;
    const T v = fixed ? *fixed : random_value<T>(*w.rng);
    w.set(i, j, v);
    as.push_back({{static_cast<int>(i) + 1, static_cast<int>(j) + 1}, v});
  }
  if (as.empty()) return;
  auto& s = w.push(StepKind::AssignFree);
  s.label = label;
  s.assignments = std::move(as);
}

// Appends row `idx` (or column) to the complete block cur_r x cur_c so that
// the block keeps rank `rho`; below rank rho the line is drawn freely.
template <typename T>
void append_line(Work<T>& w, bool is_row, std::size_t idx, const Index& cur_r, const Index& cur_c, int rho) {
  const Index& lines = is_row ? cur_r : cur_c;
  const Index& pos = is_row ? cur_c : cur_r;
  auto cell = [&](std::size_t line, std::size_t p) -> std::pair<std::size_t, std::size_t> {
    return is_row ? std::pair{line, p} : std::pair{p, line};
  };
  Index kp, up;
  for (std::size_t t = 0; t < pos.size(); ++t) {
    auto [i, j] = cell(idx, pos[t]);
    (w.is_known(i, j) ? kp : up).push_back(t);
  }
  if (up.empty()) return;

  Matrix<T> blk(lines.size(), pos.size());
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (std::size_t t = 0; t < pos.size(); ++t) {
      auto [i, j] = cell(lines[a], pos[t]);
      blk(a, t) = w.val(i, j);
    }
  const Index basis = lines.empty() ? Index{} : independent_rows(blk);

  CompletionStep<T> step;
  step.kind = is_row ? StepKind::AppendRow : StepKind::AppendCol;
  step.depth = w.depth;
  step.index = static_cast<int>(idx) + 1;
  for (std::size_t b : basis) step.basis.push_back(static_cast<int>(lines[b]) + 1);
  step.span = one_based(pos);

  if (static_cast<int>(basis.size()) < rho) {
    step.mode = AppendMode::Free;
    for (std::size_t t : up) {
      auto [i, j] = cell(idx, pos[t]);
      const T v = random_value<T>(*w.rng);
      w.set(i, j, v);
      step.assignments.push_back({{static_cast<int>(i) + 1, static_cast<int>(j) + 1}, v});
    }
    w.log->push_back(std::move(step));
    return;
  }

  std::vector<T> coef(basis.size(), T(0));
  if (kp.empty()) {
    step.mode = AppendMode::LeastNorm;
  } else {
    Matrix<T> sys(kp.size(), basis.size());
    Matrix<T> rhs(kp.size(), 1);
    for (std::size_t e = 0; e < kp.size(); ++e) {
      for (std::size_t b = 0; b < basis.size(); ++b) sys(e, b) = blk(basis[b], kp[e]);
      auto [i, j] = cell(idx, pos[kp[e]]);
      rhs(e, 0) = w.val(i, j);
    }
    const SolveResult<T> sol = solve_linear(sys, rhs);
    if (sol.status == SolveStatus::NoSolution || sol.status == SolveStatus::LeastSquares)
      throw NotGeneric("append: specified entries are inconsistent with the span of the block");
    if (sol.status == SolveStatus::LeastNorm && kp.size() >= basis.size())
      throw NotGeneric("append: specified entries do not determine the line (degenerate minor)");
    if (sol.status == SolveStatus::LeastNorm) step.mode = AppendMode::LeastNorm;
    else step.mode = kp.size() > basis.size() ? AppendMode::Overdetermined : AppendMode::Unique;
    for (std::size_t b = 0; b < basis.size(); ++b) coef[b] = sol.solution(b, 0);
  }
  for (std::size_t t : up) {
    T v(0);
    for (std::size_t b = 0; b < basis.size(); ++b) v += coef[b] * blk(basis[b], t);
    auto [i, j] = cell(idx, pos[t]);
    w.set(i, j, v);
    step.assignments.push_back({{static_cast<int>(i) + 1, static_cast<int>(j) + 1}, v});
  }
  step.coefficients = std::move(coef);
  w.log->push_back(std::move(step));
}

// Completes the block rows x cols to rank <= rho. Lines whose specified
// count inside the remaining block is at most rho are peeled off one at a
// time (closest to rho first) until a complete core of rank <= rho is left;
// they are then appended back in reverse order, so every append has at
// most rho specified entries.
template <typename T>
void complete_block(Work<T>& w, const Index& rows, const Index& cols, int rho) {
  const bool rev = w.opt->reverse_order;
  std::vector<char> row_in(rows.size(), 1), col_in(cols.size(), 1);
  std::size_t nr = rows.size(), nc = cols.size();
  std::vector<std::pair<bool, std::size_t>> peeled;  // (is_row, position)
  while (nr > 0 && nc > 0) {
    std::vector<int> rdeg(rows.size(), 0), cdeg(cols.size(), 0);
    bool full = true;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (!row_in[a]) continue;
      for (std::size_t b = 0; b < cols.size(); ++b) {
        if (!col_in[b]) continue;
        if (w.is_known(rows[a], cols[b])) {
          ++rdeg[a];
          ++cdeg[b];
        } else {
          full = false;
        }
      }
    }
    if (full && static_cast<int>(std::min(nr, nc)) <= rho) break;
    int best = -1;
    std::pair<bool, std::size_t> pick{true, 0};
    auto consider = [&](bool is_row, std::size_t p) {
      const int d = is_row ? rdeg[p] : cdeg[p];
      if (d <= rho && d > best) {
        best = d;
        pick = {is_row, p};
      }
    };
    if (!rev) {
      for (std::size_t a = 0; a < rows.size(); ++a)
        if (row_in[a]) consider(true, a);
      for (std::size_t b = 0; b < cols.size(); ++b)
        if (col_in[b]) consider(false, b);
    } else {
      for (std::size_t b = cols.size(); b-- > 0;)
        if (col_in[b]) consider(false, b);
      for (std::size_t a = rows.size(); a-- > 0;)
        if (row_in[a]) consider(true, a);
    }
    if (best < 0) throw PatternShape("no elimination order reaches a complete core of rank <= " + std::to_string(rho));
    peeled.push_back(pick);
    if (pick.first) {
      row_in[pick.second] = 0;
      --nr;
    } else {
      col_in[pick.second] = 0;
      --nc;
    }
  }
  Index cur_r, cur_c;
  for (std::size_t a = 0; a < rows.size(); ++a)
    if (row_in[a]) cur_r.push_back(rows[a]);
  for (std::size_t b = 0; b < cols.size(); ++b)
    if (col_in[b]) cur_c.push_back(cols[b]);
  for (auto it = peeled.rbegin(); it != peeled.rend(); ++it) {
    if (it->first) {
      append_line(w, true, rows[it->second], cur_r, cur_c, rho);
      cur_r.push_back(rows[it->second]);
    } else {
      append_line(w, false, cols[it->second], cur_r, cur_c, rho);
      cur_c.push_back(cols[it->second]);
    }
  }
}

template <typename T>
Matrix<T> gather(const Work<T>& w, const Index& r, const Index& c) {
  return w.val.submatrix(r, c);
}

// Reduces the kept block ar x ac by the pivot pr x pc, lets `inner` fill
// the reduced block, then lifts the fill back.
template <typename T, typename Inner>
void schur_step(Work<T>& w, const Index& ar, const Index& ac, const Index& pr, const Index& pc, Inner&& inner) {
  if (!w.all_known(ar, pc) || !w.all_known(pr, ac) || !w.all_known(pr, pc))
    throw PatternShape("Schur step: bordering blocks must be complete");
  if (pr.size() != pc.size()) throw SingularBlock("Schur step: pivot block is not square");
  const Matrix<T> bdc = pr.empty() ? Matrix<T>(ar.size(), ac.size())
                                   : gather(w, ar, pc) * (inverse(gather(w, pr, pc)) * gather(w, pr, ac));

  Work<T> in;
  in.val = Matrix<T>(ar.size(), ac.size());
  in.known.assign(ar.size() * ac.size(), 0);
  in.log = w.log;
  in.depth = w.depth + 1;
  in.rng = w.rng;
  in.opt = w.opt;
  for (std::size_t a = 0; a < ar.size(); ++a)
    for (std::size_t b = 0; b < ac.size(); ++b)
      if (w.is_known(ar[a], ac[b])) in.set(a, b, w.val(ar[a], ac[b]) - bdc(a, b));

  auto& red = w.push(StepKind::SchurReduce);
  red.rows = one_based(ar);
  red.cols = one_based(ac);
  red.pivot_rows = one_based(pr);
  red.pivot_cols = one_based(pc);
  red.rank_pivot = static_cast<int>(pr.size());

  inner(in);
  if (!in.all_known(iota_index(0, ar.size()), iota_index(0, ac.size())))
    throw Error("Schur step: inner routine left cells unfilled");

  CompletionStep<T> lift;
  lift.kind = StepKind::SchurLift;
  lift.depth = w.depth;
  lift.rows = one_based(ar);
  lift.cols = one_based(ac);
  lift.pivot_rows = one_based(pr);
  lift.pivot_cols = one_based(pc);
  lift.rank_pivot = static_cast<int>(pr.size());
  for (std::size_t a = 0; a < ar.size(); ++a)
    for (std::size_t b = 0; b < ac.size(); ++b)
      if (!w.is_known(ar[a], ac[b])) {
        const T v = in.val(a, b) + bdc(a, b);
        w.set(ar[a], ac[b], v);
        lift.assignments.push_back({{static_cast<int>(ar[a]) + 1, static_cast<int>(ac[b]) + 1}, v});
      }
  const Matrix<T> lifted = gather(w, concat(ar, pr), concat(ac, pc));
  lift.rank_inner = static_cast<int>(rank_within(in.val, lifted));
  lift.rank_lifted = static_cast<int>(matrix_rank(lifted));
  w.log->push_back(std::move(lift));
}

// ----------------------------------------------------------------------------
// Diagonal-unspecified recursion

template <typename T>
void circ1(Work<T>& w, const Index& r_idx, const Index& c_idx, int r) {
  const std::size_t n = r_idx.size();
  if (r == 0) {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t t = 0; t < n; ++t) cells.push_back({r_idx[t], c_idx[t]});
    assign_free(w, cells, "corank 0: diagonal drawn freely");
    return;
  }
  const std::size_t cr = static_cast<std::size_t>(circulant1_threshold(r));
  if (n < cr) throw ThresholdNotMet("circulant1: n = " + std::to_string(n) + " is below (4^r-1)/3 = " + std::to_string(cr));
  if (n > cr) {
    std::vector<std::pair<std::size_t, std::size_t>> extra;
    for (std::size_t t = cr; t < n; ++t) extra.push_back({r_idx[t], c_idx[t]});
    assign_free(w, extra, "diagonal cells outside the embedded G(" + std::to_string(cr) + ",1)");
    auto& enter = w.push(StepKind::RecursionEnter);
    enter.label = "G(" + std::to_string(cr) + ",1) embedded top-left, corank " + std::to_string(r);
    schur_step(w, slice(r_idx, 0, cr), slice(c_idx, 0, cr), slice(r_idx, cr, n), slice(c_idx, cr, n),
               [&](Work<T>& in) { circ1(in, iota_index(0, cr), iota_index(0, cr), r); });
    return;
  }
  if (r == 1) {
    const T zero(0);
    assign_free(w, {{r_idx[0], c_idx[0]}}, "corank 1 on a 1x1 block: fill with 0", &zero);
    return;
  }
  const std::size_t c = static_cast<std::size_t>(circulant1_threshold(r - 1));
  if (r == 2 && w.opt->five_route == CompleteOptions::Route::Subvariety) {
    auto& enter = w.push(StepKind::RecursionEnter);
    enter.label = "G(5,1): first three columns completed to rank 2, last four to rank 3";
    complete_block(w, r_idx, slice(c_idx, 0, 3), 2);
    complete_block(w, r_idx, slice(c_idx, 1, 5), 3);
    return;
  }
  auto& enter = w.push(StepKind::RecursionEnter);
  enter.label = "G(" + std::to_string(n) + ",1) -> G(" + std::to_string(c) + ",1), corank " + std::to_string(r) + " -> " +
                std::to_string(r - 1);
  // Bottom 2c+1 rows to rank 2c; the last of them then lies in the span.
  complete_block(w, slice(r_idx, 2 * c, n), c_idx, static_cast<int>(2 * c));
  schur_step(w, slice(r_idx, 0, 2 * c), slice(c_idx, 0, 2 * c + 1), slice(r_idx, 2 * c, 4 * c),
             slice(c_idx, 2 * c + 1, n), [&](Work<T>& b) {
               // b is 2c x (2c+1) with its diagonal unspecified.
               complete_block(b, iota_index(0, 2 * c), iota_index(c, 2 * c + 1), static_cast<int>(c));
               Index keep_c = iota_index(0, c);
               keep_c.push_back(2 * c);
               schur_step(b, iota_index(0, c), keep_c, iota_index(c, 2 * c), iota_index(c, 2 * c),
                          [&](Work<T>& in) { circ1(in, iota_index(0, c), iota_index(0, c), r - 1); });
             });
}

// ----------------------------------------------------------------------------
// Band-unspecified recursion, G'(n,k)

template <typename T>
void circk(Work<T>& w, const Index& r_idx, const Index& c_idx, int k, int m) {
  const std::size_t n = r_idx.size();
  const std::size_t cm = static_cast<std::size_t>(circulantk_threshold(k, m));
  if (n < cm)
    throw ThresholdNotMet("circulantk: n = " + std::to_string(n) + " is below c_m = " + std::to_string(cm));
  if (n > cm) {
    std::vector<std::pair<std::size_t, std::size_t>> extra;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if ((i >= cm || j >= cm) && !w.is_known(r_idx[i], c_idx[j])) extra.push_back({r_idx[i], c_idx[j]});
    assign_free(w, extra, "band cells outside the embedded G'(" + std::to_string(cm) + "," + std::to_string(k) + ")");
    if (cm == 0) return;
    auto& enter = w.push(StepKind::RecursionEnter);
    enter.label = "G'(" + std::to_string(cm) + "," + std::to_string(k) + ") embedded top-left";
    schur_step(w, slice(r_idx, 0, cm), slice(c_idx, 0, cm), slice(r_idx, cm, n), slice(c_idx, cm, n),
               [&](Work<T>& in) { circk(in, iota_index(0, cm), iota_index(0, cm), k, m); });
    return;
  }
  if (m == 0) {
    // (k-1) x (k-1) with the upper triangle unspecified: rank floor((k-1)/2).
    auto& enter = w.push(StepKind::RecursionEnter);
    enter.label = "G'(" + std::to_string(n) + "," + std::to_string(k) + ") base case";
    complete_block(w, r_idx, c_idx, (k - 1) / 2);
    return;
  }
  const std::size_t c = static_cast<std::size_t>(circulantk_threshold(k, m - 1));
  const std::size_t kk = static_cast<std::size_t>(k);
  if (c == 0) {
    complete_block(w, r_idx, c_idx, 0);
    return;
  }
  // Natural blocks (n = 4c + k): top rows [0,c), middle rows [c, 3c+k),
  // bottom rows [3c+k, n); eliminated columns [c+k, 3c+k).
  const Index top = slice(r_idx, 0, c);
  const Index mid = slice(r_idx, c, 3 * c + kk);
  const Index bottom = slice(r_idx, 3 * c + kk, n);
  const Index kept_r = concat(bottom, top);
  const Index kept_c = concat(slice(c_idx, 3 * c + kk, n), slice(c_idx, 0, c + kk));
  auto& enter = w.push(StepKind::RecursionEnter);
  enter.label = "G'(" + std::to_string(n) + "," + std::to_string(k) + ") -> G'(" + std::to_string(c) + "," +
                std::to_string(k) + "); rows/cols give the reduced layout in frame coordinates";
  enter.rows = one_based(concat(kept_r, mid));
  enter.cols = one_based(concat(kept_c, slice(c_idx, c + kk, 3 * c + kk)));

  complete_block(w, mid, c_idx, static_cast<int>(2 * c));
  schur_step(w, kept_r, kept_c, slice(mid, 0, 2 * c), slice(c_idx, c + kk, 3 * c + kk), [&](Work<T>& b) {
    // b: rows [0,c) bottom block, [c,2c) top block; cols [0,c) the bottom
    // block's own columns, [c, 2c+k) the first c+k columns.
    complete_block(b, iota_index(0, 2 * c), iota_index(c, 2 * c + kk), static_cast<int>(c));
    schur_step(b, iota_index(0, c), concat(iota_index(0, c), iota_index(2 * c, 2 * c + kk)), iota_index(c, 2 * c),
               iota_index(c, 2 * c), [&](Work<T>& in) { circk(in, iota_index(0, c), iota_index(0, c), k, m - 1); });
  });
}

template <typename T>
CompletionCertificate<T> finish(const std::string& method, const PartialMatrix<T>& a, int target, Work<T>& w,
                                std::vector<CompletionStep<T>>& log) {
  if (!w.all_known(iota_index(0, w.rows()), iota_index(0, w.cols())))
    throw Error(method + ": procedure left cells unfilled");
  CompletionCertificate<T> cert;
  cert.method = method;
  cert.input = a;
  cert.target_rank = target;
  cert.filled = w.val;
  cert.achieved_rank = static_cast<int>(matrix_rank(w.val));
  cert.steps = std::move(log);
  return cert;
}

template <typename T>
bool close(const T& a, const T& b, double scale) {
  if constexpr (std::is_same_v<T, Rational>) {
    (void)scale;
    return a == b;
  } else {
    return std::abs(a - b) <= kEntryTol * std::max(1.0, scale);
  }
}

template <typename T>
double magnitude(const T& x) {
  if constexpr (std::is_same_v<T, Rational>) return std::abs(x.get_d());
  else return std::abs(x);
}

}  // namespace

// ----------------------------------------------------------------------------
// Public operations

template <typename T>
std::vector<T> append_row_complete(const Matrix<T>& basis, const std::vector<std::optional<T>>& partial) {
  if (partial.size() != basis.cols()) throw ParameterError("append_row_complete: length mismatch");
  std::vector<CompletionStep<T>> log;
  std::mt19937_64 rng(0);
  const CompleteOptions opt;
  Work<T> w;
  w.val = Matrix<T>(basis.rows() + 1, basis.cols());
  w.val.set_block(0, 0, basis);
  w.known.assign(w.val.rows() * w.val.cols(), 1);
  for (std::size_t j = 0; j < partial.size(); ++j) {
    if (partial[j]) w.val(basis.rows(), j) = *partial[j];
    else w.known[basis.rows() * basis.cols() + j] = 0;
  }
  w.log = &log;
  w.rng = &rng;
  w.opt = &opt;
  const Index lines = iota_index(0, basis.rows());
  const int rho = static_cast<int>(lines.empty() ? 0 : independent_rows(basis).size());
  append_line(w, true, basis.rows(), lines, iota_index(0, basis.cols()), rho);
  std::vector<T> out(basis.cols());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = w.val(basis.rows(), j);
  return out;
}

template <typename T>
CompletionCertificate<T> codim_block_complete(const PartialMatrix<T>& a, int r, const CompleteOptions& opt) {
  const EntryPattern& p = a.pattern();
  std::vector<CompletionStep<T>> log;
  std::mt19937_64 rng(opt.seed);
  Work<T> w = make_work(a, log, rng, opt);
  const Index all_r = iota_index(0, static_cast<std::size_t>(p.rows()));
  const Index all_c = iota_index(0, static_cast<std::size_t>(p.cols()));
  if (p.num_unspecified() == 0) return finish("codimc", a, p.min_dim(), w, log);
  if (r < 1) throw ParameterError("codim_block_complete: r must be positive");

  auto fits = [&](bool by_rows) {
    const int lines = by_rows ? p.rows() : p.cols();
    const int width = by_rows ? p.cols() : p.rows();
    int full = 0;
    for (int l = 1; l <= lines; ++l) {
      const int d = by_rows ? p.row_degree(l) : p.col_degree(l);
      if (d == 0) ++full;
      else if (d != r) return false;
    }
    return full == width - r;
  };
  int rho = 0;
  if (fits(true)) rho = p.cols() - r;
  else if (fits(false)) rho = p.rows() - r;
  else throw PatternShape("codim_block_complete: lines must have 0 or r unspecified cells with n - r complete lines");
  complete_block(w, all_r, all_c, rho);
  return finish("codimc", a, rho, w, log);
}

template <typename T>
CompletionCertificate<T> schur_reduce_lift(const PartialMatrix<T>& a, int row_cut, int col_cut,
                                           const InnerRoutine<T>& inner) {
  const EntryPattern& p = a.pattern();
  if (row_cut < 0 || col_cut < 0 || row_cut > p.rows() || col_cut > p.cols())
    throw ParameterError("schur_reduce_lift: cut out of range");
  for (const Cell& c : p.unspecified())
    if (c.row > row_cut || c.col > col_cut) throw PatternShape("schur_reduce_lift: unspecified cell outside the leading block");
  std::vector<CompletionStep<T>> log;
  std::mt19937_64 rng(0);
  const CompleteOptions opt;
  Work<T> w = make_work(a, log, rng, opt);
  const auto rc = static_cast<std::size_t>(row_cut);
  const auto cc = static_cast<std::size_t>(col_cut);
  int inner_target = 0;
  schur_step(w, iota_index(0, rc), iota_index(0, cc), iota_index(rc, static_cast<std::size_t>(p.rows())),
             iota_index(cc, static_cast<std::size_t>(p.cols())), [&](Work<T>& in) {
               std::vector<Cell> unk;
               for (std::size_t i = 0; i < in.rows(); ++i)
                 for (std::size_t j = 0; j < in.cols(); ++j)
                   if (!in.is_known(i, j)) unk.push_back({static_cast<int>(i) + 1, static_cast<int>(j) + 1});
               const PartialMatrix<T> reduced(EntryPattern(row_cut, col_cut, unk), in.val);
               CompletionCertificate<T> ic = inner(reduced);
               if (ic.filled.rows() != rc || ic.filled.cols() != cc) throw Error("schur_reduce_lift: inner result has the wrong size");
               inner_target = ic.target_rank;
               for (auto& s : ic.steps) {
                 s.depth += in.depth;
                 in.log->push_back(std::move(s));
               }
               for (std::size_t i = 0; i < rc; ++i)
                 for (std::size_t j = 0; j < cc; ++j)
                   if (!in.is_known(i, j)) in.set(i, j, ic.filled(i, j));
             });
  return finish("schur", a, p.rows() - row_cut + inner_target, w, log);
}

template <typename T>
CompletionCertificate<T> diag_strip_complete(const PartialMatrix<T>& a, const CompleteOptions& opt) {
  const EntryPattern& p = a.pattern();
  if (!p.square()) throw PatternShape("diag_strip_complete: pattern must be square");
  const int n = p.rows();
  int k = -1;
  for (int t = 0; t <= n && k < 0; ++t)
    if (diag_strip(n, t) == p) k = t;
  if (k < 0) throw PatternShape("diag_strip_complete: pattern is not a diagonal strip S(n,k)");
  std::vector<CompletionStep<T>> log;
  std::mt19937_64 rng(opt.seed);
  Work<T> w = make_work(a, log, rng, opt);
  if (k < n) complete_block(w, iota_index(0, n), iota_index(0, n), k);
  return finish("diagstrip", a, k, w, log);
}

template <typename T>
CompletionCertificate<T> circulant1_complete(const PartialMatrix<T>& a, int r, const CompleteOptions& opt) {
  const EntryPattern& p = a.pattern();
  if (!p.square() || !(circulant(p.rows(), 1) == p))
    throw PatternShape("circulant1_complete: unspecified set must be the diagonal");
  if (r < 0 || r > p.rows()) throw ParameterError("circulant1_complete: corank out of range");
  std::vector<CompletionStep<T>> log;
  std::mt19937_64 rng(opt.seed);
  Work<T> w = make_work(a, log, rng, opt);
  const Index all = iota_index(0, static_cast<std::size_t>(p.rows()));
  circ1(w, all, all, r);
  return finish("circulant1", a, p.rows() - r, w, log);
}

template <typename T>
CompletionCertificate<T> circulantk_complete(const PartialMatrix<T>& a, int k, int m, const CompleteOptions& opt) {
  const EntryPattern& p = a.pattern();
  if (k < 1 || m < 0) throw ParameterError("circulantk_complete: need k >= 1, m >= 0");
  if (!p.square() || p.rows() + 1 < k || !(prime_circulant(p.rows(), k) == p))
    throw PatternShape("circulantk_complete: unspecified set must be G'(n,k)");
  std::vector<CompletionStep<T>> log;
  std::mt19937_64 rng(opt.seed);
  Work<T> w = make_work(a, log, rng, opt);
  const Index all = iota_index(0, static_cast<std::size_t>(p.rows()));
  circk(w, all, all, k, m);
  return finish("circulantk", a, std::max(0, p.rows() - circulantk_corank(k, m)), w, log);
}

CompletionCertificate<double> g52_complete(const PartialMatrix<double>& a, const CompleteOptions& opt) {
  FiberConfig cfg;
  cfg.seed = opt.seed;
  return g52_complete(a, opt, cfg);
}

CompletionCertificate<double> g52_complete(const PartialMatrix<double>& a, const CompleteOptions& opt,
                                           const FiberConfig& fiber) {
  if (!(a.pattern() == prime_circulant(5, 2))) throw PatternShape("g52_complete: pattern must be G'(5,2)");
  std::vector<CompletionStep<double>> log;
  std::mt19937_64 rng(opt.seed);
  Work<double> w = make_work(a, log, rng, opt);

  // Entry (3,3) from the vanishing minor on rows {3,4,5}, columns {1,2,3};
  // the minor is affine in it with slope det(rows {4,5} x cols {1,2}).
  const Index mr{2, 3, 4}, mc{0, 1, 2};
  Matrix<double> minor = gather(w, mr, mc);
  minor(0, 2) = 0.0;
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = minor(i, j);
  const double slope = e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0);
  const double scale = e.cwiseAbs().maxCoeff();
  if (std::abs(slope) <= 1e-12 * std::max(1.0, scale * scale)) throw NotGeneric("g52: cofactor of entry (3,3) vanishes");
  const double x33 = -e.determinant() / slope;
  w.set(2, 2, x33);
  auto& ms = w.push(StepKind::MinorSolve);
  ms.label = "entry (3,3) from the vanishing minor rows {3,4,5} x cols {1,2,3}";
  ms.rows = one_based(mr);
  ms.cols = one_based(mc);
  ms.assignments.push_back({{3, 3}, x33});

  const Index br{0, 1, 2, 4}, bc{0, 2, 3, 4};
  const PartialMatrix<double> inner(circulant(4, 1), gather(w, br, bc));
  std::vector<Matrix<double>> reals;
  try {
    const FiberReport rep = enumerate_fiber(inner, 2, fiber);
    reals = real_solutions(rep, inner);
  } catch (const EmptyFiberEvidence&) {
    // No certified point at all: treated like the all-complex case.
  }
  int target = 3;
  if (!reals.empty()) {
    target = 2;
    auto& fs = w.push(StepKind::MinorSolve);
    fs.label = "real rank-2 completion of the block rows {1,2,3,5} x cols {1,3,4,5} from the fiber counter";
    fs.rows = one_based(br);
    fs.cols = one_based(bc);
    for (std::size_t t = 0; t < 4; ++t) {
      w.set(br[t], bc[t], reals.front()(t, t));
      fs.assignments.push_back({{static_cast<int>(br[t]) + 1, static_cast<int>(bc[t]) + 1}, reals.front()(t, t)});
    }
  } else {
    complete_block(w, br, bc, 3);
  }
  append_line(w, false, 1, br, bc, target);
  append_line(w, true, 3, br, Index{0, 1, 2, 3, 4}, target);
  return finish("g52", a, target, w, log);
}

template <typename T>
VerifyResult verify_certificate(const CompletionCertificate<T>& c) {
  const EntryPattern& p = c.input.pattern();
  const auto n = static_cast<std::size_t>(p.rows());
  const auto m = static_cast<std::size_t>(p.cols());
  if (c.filled.rows() != n || c.filled.cols() != m) return {false, "filled matrix has the wrong size"};
  double scale = 0.0;
  for (const auto& x : c.input.values().data()) scale = std::max(scale, magnitude(x));

  for (const Cell& cell : p.specified())
    if (!close(c.filled(cell.row - 1, cell.col - 1), c.input.at(cell.row, cell.col), scale))
      return {false, "filled matrix disagrees with the input at (" + std::to_string(cell.row) + "," +
                         std::to_string(cell.col) + ")"};
  const std::size_t rk = matrix_rank(c.filled);
  if (static_cast<int>(rk) > c.target_rank)
    return {false, "rank " + std::to_string(rk) + " exceeds the target " + std::to_string(c.target_rank)};

  Matrix<T> replay = c.input.values();
  std::vector<char> known(n * m, 1);
  for (const Cell& cell : p.unspecified()) known[(cell.row - 1) * m + (cell.col - 1)] = 0;
  for (std::size_t s = 0; s < c.steps.size(); ++s) {
    const auto& st = c.steps[s];
    const std::string where = "step " + std::to_string(s) + " (" + std::string(to_string(st.kind)) + ")";
    if (st.kind == StepKind::SchurLift && st.rank_lifted != st.rank_pivot + st.rank_inner)
      return {false, where + ": Schur rank additivity fails"};
    if (st.depth != 0) continue;
    const bool is_append = st.kind == StepKind::AppendRow || st.kind == StepKind::AppendCol;
    if (is_append && st.mode != AppendMode::Free) {
      const bool row = st.kind == StepKind::AppendRow;
      if (st.coefficients.size() != st.basis.size()) return {false, where + ": coefficient count mismatch"};
      for (int pidx : st.span) {
        T v(0);
        for (std::size_t b = 0; b < st.basis.size(); ++b) {
          const std::size_t i = row ? st.basis[b] - 1 : pidx - 1;
          const std::size_t j = row ? pidx - 1 : st.basis[b] - 1;
          if (!known[i * m + j]) return {false, where + ": basis line uses an unknown cell"};
          v += st.coefficients[b] * replay(i, j);
        }
        const std::size_t i = row ? st.index - 1 : pidx - 1;
        const std::size_t j = row ? pidx - 1 : st.index - 1;
        if (known[i * m + j] && !close(v, replay(i, j), scale))
          return {false, where + ": appended line does not match a specified entry"};
      }
    }
    for (const auto& as : st.assignments) {
      const std::size_t i = static_cast<std::size_t>(as.cell.row - 1);
      const std::size_t j = static_cast<std::size_t>(as.cell.col - 1);
      if (i >= n || j >= m) return {false, where + ": assignment outside the grid"};
      if (known[i * m + j]) return {false, where + ": assignment overwrites a known cell"};
      if (is_append && st.mode != AppendMode::Free) {
        const bool row = st.kind == StepKind::AppendRow;
        T v(0);
        for (std::size_t b = 0; b < st.basis.size(); ++b)
          v += st.coefficients[b] * (row ? replay(st.basis[b] - 1, j) : replay(i, st.basis[b] - 1));
        if (!close(v, as.value, scale)) return {false, where + ": replayed value differs from the recorded one"};
      }
      replay(i, j) = as.value;
      known[i * m + j] = 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (!known[i * m + j]) return {false, "replay leaves cell (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") unfilled"};
      if (!close(replay(i, j), c.filled(i, j), scale)) return {false, "replay does not reproduce the filled matrix"};
    }
  return {true, "ok"};
}

template <typename T>
nlohmann::json to_json(const CompletionCertificate<T>& c) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : c.steps) {
    nlohmann::json j = {{"kind", to_string(s.kind)}, {"depth", s.depth}};
    if (s.kind == StepKind::AppendRow || s.kind == StepKind::AppendCol) {
      j["index"] = s.index;
      j["basis"] = s.basis;
      j["span"] = s.span;
      j["mode"] = to_string(s.mode);
      nlohmann::json coef = nlohmann::json::array();
      for (const auto& x : s.coefficients) coef.push_back(scalar_to_json(x));
      j["coefficients"] = coef;
    }
    if (!s.rows.empty()) j["rows"] = s.rows;
    if (!s.cols.empty()) j["cols"] = s.cols;
    if (!s.pivot_rows.empty()) {
      j["pivot_rows"] = s.pivot_rows;
      j["pivot_cols"] = s.pivot_cols;
    }
    if (s.rank_pivot >= 0) j["rank_pivot"] = s.rank_pivot;
    if (s.rank_inner >= 0) j["rank_inner"] = s.rank_inner;
    if (s.rank_lifted >= 0) j["rank_lifted"] = s.rank_lifted;
    if (!s.label.empty()) j["label"] = s.label;
    nlohmann::json as = nlohmann::json::array();
    for (const auto& a : s.assignments) as.push_back({a.cell.row, a.cell.col, scalar_to_json(a.value)});
    j["assignments"] = as;
    steps.push_back(std::move(j));
  }
  const VerifyResult v = verify_certificate(c);
  return {{"method", c.method},
          {"domain", to_string(c.domain)},
          {"target_rank", c.target_rank},
          {"achieved_rank", c.achieved_rank},
          {"input", partial_to_json(c.input)},
          {"filled", matrix_to_json(c.filled)},
          {"steps", steps},
          {"verification", {{"ok", v.ok}, {"diagnostic", v.diagnostic}}}};
}

#define LRMC_INSTANTIATE(T)                                                                                       \
  template std::vector<T> append_row_complete(const Matrix<T>&, const std::vector<std::optional<T>>&);            \
  template CompletionCertificate<T> codim_block_complete(const PartialMatrix<T>&, int, const CompleteOptions&);   \
  template CompletionCertificate<T> schur_reduce_lift(const PartialMatrix<T>&, int, int, const InnerRoutine<T>&); \
  template CompletionCertificate<T> diag_strip_complete(const PartialMatrix<T>&, const CompleteOptions&);         \
  template CompletionCertificate<T> circulant1_complete(const PartialMatrix<T>&, int, const CompleteOptions&);    \
  template CompletionCertificate<T> circulantk_complete(const PartialMatrix<T>&, int, int, const CompleteOptions&); \
  template VerifyResult verify_certificate(const CompletionCertificate<T>&);                                      \
  template nlohmann::json to_json(const CompletionCertificate<T>&);

LRMC_INSTANTIATE(Rational)
LRMC_INSTANTIATE(double)

}  // namespace lrmc
