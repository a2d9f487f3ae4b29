#include "lrmc/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lrmc/error.hpp"

namespace lrmc {

EntryPattern::EntryPattern(int rows, int cols, std::vector<Cell> unspecified)
    : rows_(rows), cols_(cols), cells_(std::move(unspecified)) {
  if (rows <= 0 || cols <= 0) {
    throw ParameterError("pattern dimensions must be positive");
  }
  for (const Cell& c : cells_) {
    if (c.row < 1 || c.row > rows || c.col < 1 || c.col > cols) {
      throw ParameterError("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols) + " grid");
    }
  }
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  mask_.assign(static_cast<std::size_t>(rows) * cols, 0);
  for (const Cell& c : cells_) {
    mask_[static_cast<std::size_t>(c.row - 1) * cols + (c.col - 1)] = 1;
  }
}

std::vector<Cell> EntryPattern::specified() const {
  std::vector<Cell> out;
  out.reserve(num_specified());
  for (int i = 1; i <= rows_; ++i) {
    for (int j = 1; j <= cols_; ++j) {
      if (!is_unspecified(i, j)) out.push_back({i, j});
    }
  }
  return out;
}

bool EntryPattern::is_unspecified(int row, int col) const {
  if (row < 1 || row > rows_ || col < 1 || col > cols_) return false;
  return mask_[static_cast<std::size_t>(row - 1) * cols_ + (col - 1)] != 0;
}

int EntryPattern::row_degree(int row) const {
  int d = 0;
  for (int j = 1; j <= cols_; ++j) d += is_unspecified(row, j);
  return d;
}

int EntryPattern::col_degree(int col) const {
  int d = 0;
  for (int i = 1; i <= rows_; ++i) d += is_unspecified(i, col);
  return d;
}

EntryPattern EntryPattern::transposed() const {
  std::vector<Cell> t;
  t.reserve(cells_.size());
  for (const Cell& c : cells_) t.push_back({c.col, c.row});
  return EntryPattern(cols_, rows_, std::move(t));
}

EntryPattern EntryPattern::embedded(int rows, int cols) const {
  if (rows < rows_ || cols < cols_) throw ParameterError("embedding grid smaller than pattern");
  return EntryPattern(rows, cols, cells_);
}

// ---------------------------------------------------------------------------
// Families

EntryPattern circulant(int n, int k) {
  if (n <= 0 || k < 0 || k > n) throw ParameterError("G(n,k) requires n > 0 and 0 <= k <= n");
  std::vector<Cell> cells;
  for (int i = 1; i <= n; ++i) {
    for (int t = 0; t < k; ++t) cells.push_back({i, (i - 1 + t) % n + 1});
  }
  EntryPattern p(n, n, std::move(cells));
  p.set_family("G(" + std::to_string(n) + "," + std::to_string(k) + ")");
  return p;
}

EntryPattern prime_circulant(int n, int k) {
  if (n <= 0 || k <= 0 || k > n + 1) throw ParameterError("G'(n,k) requires n > 0 and 0 < k <= n+1");
  std::vector<Cell> cells;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j < i + k && j <= n; ++j) cells.push_back({i, j});
  }
  EntryPattern p(n, n, std::move(cells));
  p.set_family("G'(" + std::to_string(n) + "," + std::to_string(k) + ")");
  return p;
}

EntryPattern diag_strip(int n, int k) {
  if (n <= 0 || k < 0 || k > n) throw ParameterError("S(n,k) requires n > 0 and 0 <= k <= n");
  std::vector<Cell> cells;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const int s = i + j;
      const bool in_strip = (n - k + 1 < s) && (s <= n + k + 1);
      if (!in_strip) cells.push_back({i, j});
    }
  }
  EntryPattern p(n, n, std::move(cells));
  p.set_family("S(" + std::to_string(n) + "," + std::to_string(k) + ")");
  return p;
}

EntryPattern codim_block(int n, int k, int r) {
  if (n <= 0 || k < 0 || r < 0 || r > n) throw ParameterError("K(n,k,r) requires n > 0, k >= 0, 0 <= r <= n");
  std::vector<Cell> cells;
  for (int i = 1; i <= r + k; ++i) {
    for (int j = 1; j <= r; ++j) cells.push_back({i, j});
  }
  EntryPattern p(n + k, n, std::move(cells));
  p.set_family("K(" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(r) + ")");
  return p;
}

EntryPattern two_typical_family(TwoTypicalKind kind, int n) {
  if (n < 1) throw ParameterError("two-typical families require n >= 1");
  std::vector<Cell> cells;
  for (int i = 1; i <= 4; ++i) cells.push_back({i, i});
  if (kind == TwoTypicalKind::Corank) {
    EntryPattern p(n + 4, n + 4, std::move(cells));
    p.set_family("T2C(" + std::to_string(n) + ")");
    return p;
  }
  const int size = n + 3;
  for (int i = 3; i <= size; ++i) {
    for (int j = 3; j <= size; ++j) {
      if (i <= 4 && j <= 4) continue;
      cells.push_back({i, j});
    }
  }
  EntryPattern p(size, size, std::move(cells));
  p.set_family("T2R(" + std::to_string(n) + ")");
  return p;
}

EntryPattern PatternFamily::instantiate() const {
  auto need = [&](std::size_t count) {
    if (params.size() != count) throw ParameterError("family " + descriptor() + " has wrong parameter count");
  };
  switch (kind) {
    case FamilyKind::Circulant:
      need(2);
      return circulant(params[0], params[1]);
    case FamilyKind::PrimeCirculant:
      need(2);
      return prime_circulant(params[0], params[1]);
    case FamilyKind::DiagStrip:
      need(2);
      return diag_strip(params[0], params[1]);
    case FamilyKind::CodimBlock:
      need(3);
      return codim_block(params[0], params[1], params[2]);
    case FamilyKind::TwoTypicalCorank:
      need(1);
      return two_typical_family(TwoTypicalKind::Corank, params[0]);
    case FamilyKind::TwoTypicalRank:
      need(1);
      return two_typical_family(TwoTypicalKind::Rank, params[0]);
  }
  throw ParameterError("unknown family kind");
}

namespace {

std::string_view family_prefix(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Circulant:
      return "G";
    case FamilyKind::PrimeCirculant:
      return "G'";
    case FamilyKind::DiagStrip:
      return "S";
    case FamilyKind::CodimBlock:
      return "K";
    case FamilyKind::TwoTypicalCorank:
      return "T2C";
    case FamilyKind::TwoTypicalRank:
      return "T2R";
  }
  return "?";
}

}  // namespace

std::string PatternFamily::descriptor() const {
  std::string out(family_prefix(kind));
  out += '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(params[i]);
  }
  out += ')';
  return out;
}

PatternFamily PatternFamily::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw ParameterError("malformed family descriptor '" + std::string(text) + "'");
  }
  const std::string_view head = trim(text.substr(0, open));
  PatternFamily fam;
  if (head == "G") {
    fam.kind = FamilyKind::Circulant;
  } else if (head == "G'") {
    fam.kind = FamilyKind::PrimeCirculant;
  } else if (head == "S") {
    fam.kind = FamilyKind::DiagStrip;
  } else if (head == "K") {
    fam.kind = FamilyKind::CodimBlock;
  } else if (head == "T2C") {
    fam.kind = FamilyKind::TwoTypicalCorank;
  } else if (head == "T2R") {
    fam.kind = FamilyKind::TwoTypicalRank;
  } else {
    throw ParameterError("unknown family '" + std::string(head) + "'");
  }
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view token = trim(body.substr(0, comma));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ParameterError("bad family parameter '" + std::string(token) + "'");
    }
    fam.params.push_back(value);
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  std::size_t arity = 2;
  if (fam.kind == FamilyKind::CodimBlock) arity = 3;
  if (fam.kind == FamilyKind::TwoTypicalCorank || fam.kind == FamilyKind::TwoTypicalRank) arity = 1;
  if (fam.params.size() != arity) {
    throw ParameterError("family '" + std::string(head) + "' takes " + std::to_string(arity) + " parameter(s)");
  }
  return fam;
}

EntryPattern complement(const EntryPattern& p) {
  EntryPattern c(p.rows(), p.cols(), p.specified());
  if (!p.family().empty()) c.set_family("~" + p.family());
  return c;
}

bool is_subset(const EntryPattern& p, const EntryPattern& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) return false;
  return std::all_of(p.unspecified().begin(), p.unspecified().end(),
                     [&](const Cell& c) { return q.is_unspecified(c.row, c.col); });
}

// ---------------------------------------------------------------------------
// k-core

std::vector<EntryPattern> k_core(const EntryPattern& p, int k) {
  if (k <= 0) throw ParameterError("k-core parameter must be positive");
  const int n = p.rows();
  const int m = p.cols();
  // Vertices 0..n-1 are rows, n..n+m-1 are columns.
  std::vector<int> degree(n + m, 0);
  for (const Cell& c : p.unspecified()) {
    ++degree[c.row - 1];
    ++degree[n + c.col - 1];
  }
  std::vector<char> alive(n + m, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n + m; ++v) {
      if (alive[v] && degree[v] < k) {
        alive[v] = 0;
        changed = true;
        for (const Cell& c : p.unspecified()) {
          const int a = c.row - 1;
          const int b = n + c.col - 1;
          if (a == v && alive[b]) --degree[b];
          if (b == v && alive[a]) --degree[a];
        }
      }
    }
  }

  std::vector<int> parent(n + m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<Cell> kept;
  for (const Cell& c : p.unspecified()) {
    const int a = c.row - 1;
    const int b = n + c.col - 1;
    if (alive[a] && alive[b]) {
      kept.push_back(c);
      parent[find(a)] = find(b);
    }
  }
  std::vector<int> roots;
  std::vector<std::vector<Cell>> groups;
  for (const Cell& c : kept) {
    const int root = find(c.row - 1);
    auto it = std::find(roots.begin(), roots.end(), root);
    if (it == roots.end()) {
      roots.push_back(root);
      groups.emplace_back();
      it = roots.end() - 1;
    }
    groups[static_cast<std::size_t>(it - roots.begin())].push_back(c);
  }
  std::vector<EntryPattern> out;
  out.reserve(groups.size());
  for (auto& g : groups) out.emplace_back(n, m, std::move(g));
  return out;
}

// ---------------------------------------------------------------------------
// Characterization of typical corank one

std::string_view to_string(CorankOneCase c) {
  switch (c) {
    case CorankOneCase::RowColUnion:
      return "RowColUnion";
    case CorankOneCase::G31:
      return "G31";
    case CorankOneCase::G41:
      return "G41";
    case CorankOneCase::None:
      return "None";
  }
  return "None";
}

namespace {

bool in_row_col_union(const EntryPattern& u) {
  for (int a = 1; a <= u.rows(); ++a) {
    for (int b = 1; b <= u.cols(); ++b) {
      const bool all = std::all_of(u.unspecified().begin(), u.unspecified().end(),
                                   [&](const Cell& c) { return c.row == a || c.col == b; });
      if (all) return true;
    }
  }
  return false;
}

// Cells in pairwise distinct rows and columns, i.e. a copy of G(|U|,1).
bool is_matching(const EntryPattern& u) {
  std::vector<int> rows;
  std::vector<int> cols;
  for (const Cell& c : u.unspecified()) {
    rows.push_back(c.row);
    cols.push_back(c.col);
  }
  std::sort(rows.begin(), rows.end());
  std::sort(cols.begin(), cols.end());
  return std::adjacent_find(rows.begin(), rows.end()) == rows.end() &&
         std::adjacent_find(cols.begin(), cols.end()) == cols.end();
}

}  // namespace

CorankOneVerdict has_typical_corank_one(const EntryPattern& u) {
  if (!u.square()) throw PatternShape("typical corank one characterization needs a square grid");
  const std::size_t size = u.num_unspecified();
  if (size == 0) return {false, CorankOneCase::None};
  if (in_row_col_union(u)) return {true, CorankOneCase::RowColUnion};
  if (size == 3 && is_matching(u)) return {true, CorankOneCase::G31};
  if (size == 4 && is_matching(u)) return {true, CorankOneCase::G41};
  return {false, CorankOneCase::None};
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

using Codes = std::vector<std::uint64_t>;

// Bit-matrix with `rows` <= 64; columns encoded top row = most significant bit.
struct BitGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::vector<char>> cell;  // [row][col]
};

BitGrid to_grid(const EntryPattern& p) {
  BitGrid g;
  g.rows = p.rows();
  g.cols = p.cols();
  g.cell.assign(g.rows, std::vector<char>(g.cols, 0));
  for (const Cell& c : p.unspecified()) g.cell[c.row - 1][c.col - 1] = 1;
  return g;
}

// Minimum over row permutations of the descending-sorted column codes.
Codes exhaustive_min(const BitGrid& g) {
  std::vector<int> perm(g.rows);
  std::iota(perm.begin(), perm.end(), 0);
  Codes best;
  Codes codes(g.cols);
  do {
    for (int j = 0; j < g.cols; ++j) {
      std::uint64_t code = 0;
      for (int i = 0; i < g.rows; ++i) code = (code << 1) | static_cast<std::uint64_t>(g.cell[perm[i]][j]);
      codes[j] = code;
    }
    std::sort(codes.begin(), codes.end(), std::greater<>());
    if (best.empty() || codes < best) best = codes;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

EntryPattern from_codes(const Codes& codes, int rows, int cols) {
  std::vector<Cell> cells;
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      if ((codes[j] >> (rows - 1 - i)) & 1U) cells.push_back({i + 1, j + 1});
    }
  }
  return EntryPattern(rows, cols, std::move(cells));
}

// Degree-refinement ordering for large grids; not a true canonical form.
EntryPattern heuristic_form(const EntryPattern& p) {
  const int n = p.rows();
  const int m = p.cols();
  std::vector<std::int64_t> row_color(n);
  std::vector<std::int64_t> col_color(m);
  for (int i = 0; i < n; ++i) row_color[i] = p.row_degree(i + 1);
  for (int j = 0; j < m; ++j) col_color[j] = p.col_degree(j + 1);
  for (int round = 0; round < 4; ++round) {
    std::vector<std::int64_t> nr(n);
    std::vector<std::int64_t> nc(m);
    for (int i = 0; i < n; ++i) {
      std::vector<std::int64_t> nb;
      for (int j = 0; j < m; ++j) {
        if (p.is_unspecified(i + 1, j + 1)) nb.push_back(col_color[j]);
      }
      std::sort(nb.begin(), nb.end());
      std::int64_t h = row_color[i];
      for (auto v : nb) h = h * 1000003 + v;
      nr[i] = h;
    }
    for (int j = 0; j < m; ++j) {
      std::vector<std::int64_t> nb;
      for (int i = 0; i < n; ++i) {
        if (p.is_unspecified(i + 1, j + 1)) nb.push_back(row_color[i]);
      }
      std::sort(nb.begin(), nb.end());
      std::int64_t h = col_color[j];
      for (auto v : nb) h = h * 1000003 + v;
      nc[j] = h;
    }
    row_color = nr;
    col_color = nc;
  }
  std::vector<int> rows(n);
  std::vector<int> cols(m);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) { return row_color[a] > row_color[b]; });
  std::stable_sort(cols.begin(), cols.end(), [&](int a, int b) { return col_color[a] > col_color[b]; });
  std::vector<int> row_pos(n);
  std::vector<int> col_pos(m);
  for (int i = 0; i < n; ++i) row_pos[rows[i]] = i;
  for (int j = 0; j < m; ++j) col_pos[cols[j]] = j;
  std::vector<Cell> cells;
  for (const Cell& c : p.unspecified()) cells.push_back({row_pos[c.row - 1] + 1, col_pos[c.col - 1] + 1});
  return EntryPattern(n, m, std::move(cells));
}

}  // namespace

EntryPattern canonical_form(const EntryPattern& p) {
  const int n = p.rows();
  const int m = p.cols();
  if (n <= kExactCanonicalLimit) {
    Codes best = exhaustive_min(to_grid(p));
    if (n == m) {
      Codes t = exhaustive_min(to_grid(p.transposed()));
      if (t < best) best = t;
    }
    return from_codes(best, n, m);
  }
  if (m <= kExactCanonicalLimit) {
    // Permute the short side exhaustively, sort the long side.
    const Codes best = exhaustive_min(to_grid(p.transposed()));
    return from_codes(best, m, n).transposed();
  }
  EntryPattern a = heuristic_form(p);
  if (n == m) {
    EntryPattern b = heuristic_form(p.transposed());
    if (std::lexicographical_compare(b.unspecified().begin(), b.unspecified().end(), a.unspecified().begin(),
                                     a.unspecified().end())) {
      return b;
    }
  }
  return a;
}

std::vector<EntryPattern> enumerate_canonical(int rows, int cols, int max_cells) {
  if (rows < 1 || cols < 1 || max_cells < 0) throw ParameterError("enumerate_canonical: bad grid or size");
  std::vector<EntryPattern> out{EntryPattern(rows, cols, {})};
  std::vector<EntryPattern> layer = out;
  const int limit = std::min(max_cells, rows * cols);
  for (int size = 1; size <= limit; ++size) {
    std::vector<std::vector<Cell>> found;
    for (const EntryPattern& p : layer) {
      for (int i = 1; i <= rows; ++i)
        for (int j = 1; j <= cols; ++j) {
          if (p.is_unspecified(i, j)) continue;
          std::vector<Cell> cells(p.unspecified().begin(), p.unspecified().end());
          cells.push_back({i, j});
          const EntryPattern c = canonical_form(EntryPattern(rows, cols, cells));
          found.emplace_back(c.unspecified().begin(), c.unspecified().end());
        }
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    layer.clear();
    for (auto& cells : found) layer.emplace_back(rows, cols, std::move(cells));
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// I/O

nlohmann::json pattern_to_json(const EntryPattern& p) {
  nlohmann::json cells = nlohmann::json::array();
  for (const Cell& c : p.unspecified()) cells.push_back({c.row, c.col});
  nlohmann::json doc;
  doc["rows"] = p.rows();
  doc["cols"] = p.cols();
  doc["indexing"] = "1-based";
  doc["unspecified"] = std::move(cells);
  if (!p.family().empty()) doc["family"] = p.family();
  return doc;
}

EntryPattern pattern_from_json(const nlohmann::json& doc) {
  if (doc.is_string()) return PatternFamily::parse(doc.get<std::string>()).instantiate();
  if (!doc.is_object()) throw ParameterError("pattern document must be an object or a family string");
  if (doc.contains("indexing") && doc.at("indexing") != "1-based") {
    throw ParameterError("only 1-based pattern documents are supported");
  }
  if (doc.contains("unspecified")) {
    const int rows = doc.at("rows").get<int>();
    const int cols = doc.at("cols").get<int>();
    std::vector<Cell> cells;
    for (const auto& pair : doc.at("unspecified")) {
      if (!pair.is_array() || pair.size() != 2) throw ParameterError("unspecified entries must be [i,j] pairs");
      cells.push_back({pair[0].get<int>(), pair[1].get<int>()});
    }
    EntryPattern p(rows, cols, std::move(cells));
    if (doc.contains("family")) p.set_family(doc.at("family").get<std::string>());
    return p;
  }
  if (doc.contains("family")) {
    EntryPattern p = PatternFamily::parse(doc.at("family").get<std::string>()).instantiate();
    if (doc.contains("rows") || doc.contains("cols")) {
      const int rows = doc.value("rows", p.rows());
      const int cols = doc.value("cols", p.cols());
      std::string fam = p.family();
      p = p.embedded(rows, cols);
      p.set_family(fam);
    }
    return p;
  }
  throw ParameterError("pattern document needs 'unspecified' or 'family'");
}

EntryPattern load_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open pattern file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("pattern file " + path + ": " + e.what());
  }
  return pattern_from_json(doc);
}

void save_pattern(const EntryPattern& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write pattern file " + path);
  out << pattern_to_json(p).dump(2) << '\n';
}

std::string render(const EntryPattern& p) {
  std::ostringstream os;
  for (int i = 1; i <= p.rows(); ++i) {
    for (int j = 1; j <= p.cols(); ++j) {
      if (j > 1) os << ' ';
      os << (p.is_unspecified(i, j) ? 'o' : '.');
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace lrmc
