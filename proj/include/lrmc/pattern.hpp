#pragma once

// Entry patterns: the set of unspecified positions inside an n x m grid,
// viewed as a bipartite graph between row and column vertices.
// All public indices are 1-based.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lrmc {

struct Cell {
  int row = 0;  // 1-based
  int col = 0;  // 1-based
  auto operator<=>(const Cell&) const = default;
};

class EntryPattern {
 public:
  EntryPattern() = default;
  /// Sorts and deduplicates `unspecified`; throws ParameterError on
  /// non-positive dimensions or out-of-range cells.
  EntryPattern(int rows, int cols, std::vector<Cell> unspecified);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  int min_dim() const { return rows_ < cols_ ? rows_ : cols_; }

  std::span<const Cell> unspecified() const { return cells_; }
  std::vector<Cell> specified() const;
  std::size_t num_unspecified() const { return cells_.size(); }
  std::size_t num_specified() const {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_) - cells_.size();
  }

  bool is_unspecified(int row, int col) const;
  bool is_specified(int row, int col) const { return !is_unspecified(row, col); }

  /// Number of unspecified cells in a row / column.
  int row_degree(int row) const;
  int col_degree(int col) const;

  EntryPattern transposed() const;
  /// Same cells in a larger grid (cells keep their indices).
  EntryPattern embedded(int rows, int cols) const;

  /// Optional family descriptor such as "G(7,3)"; carried through I/O.
  const std::string& family() const { return family_; }
  EntryPattern& set_family(std::string family) {
    family_ = std::move(family);
    return *this;
  }

  /// Equality compares the grid and the cell set only.
  friend bool operator==(const EntryPattern& a, const EntryPattern& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Cell> cells_;
  std::vector<char> mask_;  // row-major, 1 = unspecified
  std::string family_;
};

enum class FamilyKind { Circulant, PrimeCirculant, DiagStrip, CodimBlock, TwoTypicalCorank, TwoTypicalRank };

/// A named pattern family with its integer parameters.
///   Circulant        (n,k)   G(n,k)
///   PrimeCirculant   (n,k)   G'(n,k)
///   DiagStrip        (n,k)   S(n,k), the unspecified set is the complement of the strip
///   CodimBlock       (n,k,r) K_{r+k,r} in an (n+k) x n grid
///   TwoTypicalCorank (n)     G(4,1) in an (n+4) x (n+4) grid
///   TwoTypicalRank   (n)     the (n+3) x (n+3) two-typical-rank pattern
struct PatternFamily {
  FamilyKind kind = FamilyKind::Circulant;
  std::vector<int> params;

  EntryPattern instantiate() const;
  std::string descriptor() const;
  /// Parses "G(7,3)", "G'(6,2)", "S(6,2)", "K(4,2,2)", "T2C(3)", "T2R(4)".
  static PatternFamily parse(std::string_view text);
};

EntryPattern circulant(int n, int k);
EntryPattern prime_circulant(int n, int k);
EntryPattern diag_strip(int n, int k);
EntryPattern codim_block(int n, int k, int r);

enum class TwoTypicalKind { Corank, Rank };
EntryPattern two_typical_family(TwoTypicalKind kind, int n);

EntryPattern complement(const EntryPattern& p);

/// Connected components of the k-core of the bipartite graph of unspecified
/// cells (row vertices and column vertices). Empty when the core is empty.
std::vector<EntryPattern> k_core(const EntryPattern& p, int k);

enum class CorankOneCase { RowColUnion, G31, G41, None };
std::string_view to_string(CorankOneCase c);

struct CorankOneVerdict {
  bool typical = false;
  CorankOneCase which = CorankOneCase::None;
};

/// Whether 1 is a typical corank of the specified set of a square pattern.
CorankOneVerdict has_typical_corank_one(const EntryPattern& u);

/// Representative of the orbit under row and column permutations, plus
/// transposition on square grids. Exact when min(rows, cols) <= 8;
/// above that a degree-refinement heuristic is used which is not guaranteed
/// to identify isomorphic patterns.
EntryPattern canonical_form(const EntryPattern& p);
inline constexpr int kExactCanonicalLimit = 8;

/// Every canonical pattern on a rows x cols grid with at most max_cells
/// unspecified cells, ordered by size and then by cell list.
std::vector<EntryPattern> enumerate_canonical(int rows, int cols, int max_cells);

/// True when every cell of p is a cell of q (same grid required).
bool is_subset(const EntryPattern& p, const EntryPattern& q);

// Pattern documents: {"rows", "cols", "indexing": "1-based", "unspecified": [[i,j],...], "family"}.
nlohmann::json pattern_to_json(const EntryPattern& p);
EntryPattern pattern_from_json(const nlohmann::json& doc);
EntryPattern load_pattern(const std::string& path);
void save_pattern(const EntryPattern& p, const std::string& path);

/// Dot diagram: '.' specified, 'o' unspecified.
std::string render(const EntryPattern& p);

}  // namespace lrmc
