#pragma once

// Cubical cell complexes on boxes in Z^d: oriented cells, integer coboundary
// matrices, restriction and factor-2 subdivision cochain maps, and integer /
// real images of integer matrices.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "villain/linalg.hpp"

namespace villain {

/// A k-cell [v, v + e_a1] x ... x [v, v + e_ak] of Z^d.
///
/// `directions` holds 0-based axes in strictly increasing order; the textual
/// forms used by the CLI are 1-based. Equality and ordering ignore orientation.
struct Cell {
  std::vector<int> base_vertex;
  std::vector<int> directions;
  int orientation = 1;

  int dim() const { return static_cast<int>(directions.size()); }
  int ambient_dim() const { return static_cast<int>(base_vertex.size()); }

  Cell translated(const std::vector<int>& t) const {
    Cell c = *this;
    for (std::size_t i = 0; i < t.size() && i < c.base_vertex.size(); ++i) c.base_vertex[i] += t[i];
    return c;
  }

  Cell flipped() const {
    Cell c = *this;
    c.orientation = -c.orientation;
    return c;
  }

  friend bool operator==(const Cell& a, const Cell& b) {
    return a.base_vertex == b.base_vertex && a.directions == b.directions;
  }
  friend bool operator<(const Cell& a, const Cell& b) {
    if (a.base_vertex != b.base_vertex) return a.base_vertex < b.base_vertex;
    return a.directions < b.directions;
  }
};

inline void validate_cell(const Cell& c) {
  const int d = c.ambient_dim();
  if (c.orientation != 1 && c.orientation != -1) throw DomainError("cell orientation must be +1 or -1");
  for (std::size_t i = 0; i < c.directions.size(); ++i) {
    if (c.directions[i] < 0 || c.directions[i] >= d) throw DomainError("cell direction out of range");
    if (i > 0 && c.directions[i] <= c.directions[i - 1])
      throw DomainError("cell directions must be strictly increasing");
  }
}

inline std::ostream& operator<<(std::ostream& os, const Cell& c) {
  os << (c.orientation < 0 ? "-" : "") << "(";
  for (std::size_t i = 0; i < c.base_vertex.size(); ++i) os << (i ? "," : "") << c.base_vertex[i];
  os << ";";
  for (std::size_t i = 0; i < c.directions.size(); ++i) os << (i ? "," : "") << c.directions[i] + 1;
  return os << ")";
}

/// Product of intervals [lower_i, lower_i + sides_i] in Z^d.
struct Box {
  std::vector<int> lower;
  std::vector<int> sides;

  Box() = default;
  Box(std::vector<int> lo, std::vector<int> s) : lower(std::move(lo)), sides(std::move(s)) {
    if (lower.size() != sides.size()) throw DomainError("box: lower and sides differ in length");
    if (lower.empty()) throw DomainError("box: dimension must be positive");
    for (int s : sides)
      if (s < 1) throw DomainError("box: every side must be >= 1");
  }

  /// Box [0, side]^d.
  static Box cube(int d, int side = 1) { return Box(std::vector<int>(d, 0), std::vector<int>(d, side)); }

  int dim() const { return static_cast<int>(sides.size()); }

  bool contains(const Box& other) const {
    if (other.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      if (other.lower[i] < lower[i]) return false;
      if (other.lower[i] + other.sides[i] > lower[i] + sides[i]) return false;
    }
    return true;
  }

  bool contains(const Cell& c) const {
    if (c.ambient_dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      const int lo = lower[i];
      int hi = lower[i] + sides[i];
      if (std::binary_search(c.directions.begin(), c.directions.end(), i)) --hi;
      if (c.base_vertex[i] < lo || c.base_vertex[i] > hi) return false;
    }
    return true;
  }

  /// The factor-2 subdivision, in fine lattice units.
  Box subdivided() const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lower[i] *= 2;
      b.sides[i] *= 2;
    }
    return b;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// All sorted k-subsets of {0..d-1} in lexicographic order.
inline std::vector<std::vector<int>> direction_sets(int d, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > d) return out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

/// Closed-form count of k-cells of a box.
inline std::int64_t cell_count(const Box& box, int k) {
  std::int64_t total = 0;
  for (const auto& alpha : direction_sets(box.dim(), k)) {
    std::int64_t prod = 1;
    for (int i = 0; i < box.dim(); ++i) {
      const bool along = std::binary_search(alpha.begin(), alpha.end(), i);
      prod *= along ? box.sides[i] : box.sides[i] + 1;
    }
    total += prod;
  }
  return total;
}

/// k-cells of the box, ordered lexicographically by (base_vertex, directions).
inline std::vector<Cell> enumerate_cells(const Box& box, int k) {
  const int d = box.dim();
  if (k < 0 || k > d) throw DomainError("enumerate_cells: degree out of range");
  const auto alphas = direction_sets(d, k);
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(cell_count(box, k)));
  std::vector<int> v = box.lower;
  while (true) {
    for (const auto& alpha : alphas) {
      bool fits = true;
      for (int a : alpha)
        if (v[a] >= box.lower[a] + box.sides[a]) fits = false;
      if (fits) cells.push_back(Cell{v, alpha, 1});
    }
    int i = d - 1;
    while (i >= 0 && v[i] == box.lower[i] + box.sides[i]) {
      v[i] = box.lower[i];
      --i;
    }
    if (i < 0) break;
    ++v[i];
  }
  return cells;
}

/// Position lookup for the cells of one degree.
class CellIndex {
 public:
  explicit CellIndex(const std::vector<Cell>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      index_.emplace(Key{cells[i].base_vertex, cells[i].directions}, static_cast<Index>(i));
  }

  /// -1 when absent.
  Index find(const std::vector<int>& v, const std::vector<int>& dirs) const {
    auto it = index_.find(Key{v, dirs});
    return it == index_.end() ? -1 : it->second;
  }
  Index find(const Cell& c) const { return find(c.base_vertex, c.directions); }

 private:
  using Key = std::pair<std::vector<int>, std::vector<int>>;
  std::map<Key, Index> index_;
};

/// Matrix of d_k : C^k -> C^{k+1} in the enumerate_cells bases.
///
/// (d c)(v; a_0 < ... < a_k) = sum_pos (-1)^pos [c(v + e_{a_pos}; face) - c(v; face)],
/// where face omits a_pos.
inline IntegerMatrix coboundary_matrix(const Box& box, int k) {
  const int d = box.dim();
  if (k < 0 || k > d - 1) throw DomainError("coboundary_matrix: degree out of range");
  const auto lo_cells = enumerate_cells(box, k);
  const auto hi_cells = enumerate_cells(box, k + 1);
  const CellIndex lo_index(lo_cells);
  std::vector<Eigen::Triplet<std::int64_t, Index>> trips;
  trips.reserve(hi_cells.size() * 2 * (k + 1));
  for (std::size_t r = 0; r < hi_cells.size(); ++r) {
    const Cell& cell = hi_cells[r];
    for (int pos = 0; pos <= k; ++pos) {
      const int axis = cell.directions[pos];
      std::vector<int> face = cell.directions;
      face.erase(face.begin() + pos);
      const std::int64_t sign = (pos % 2 == 0) ? 1 : -1;
      std::vector<int> shifted = cell.base_vertex;
      ++shifted[axis];
      const Index back = lo_index.find(cell.base_vertex, face);
      const Index front = lo_index.find(shifted, face);
      if (back < 0 || front < 0) throw IntegrityError("coboundary_matrix: face outside box");
      trips.emplace_back(static_cast<Index>(r), front, sign);
      trips.emplace_back(static_cast<Index>(r), back, -sign);
    }
  }
  IntegerMatrix m(static_cast<Index>(hi_cells.size()), static_cast<Index>(lo_cells.size()));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

/// Restriction of k-cochains from `sup` to the nested box `sub` (rows: sub cells).
inline IntegerMatrix restriction_matrix(const Box& sub, const Box& sup, int k) {
  if (!sup.contains(sub)) throw DomainError("restriction_matrix: boxes are not nested");
  const auto sub_cells = enumerate_cells(sub, k);
  const CellIndex sup_index(enumerate_cells(sup, k));
  std::vector<Eigen::Triplet<std::int64_t, Index>> trips;
  trips.reserve(sub_cells.size());
  for (std::size_t r = 0; r < sub_cells.size(); ++r)
    trips.emplace_back(static_cast<Index>(r), sup_index.find(sub_cells[r]), 1);
  IntegerMatrix m(static_cast<Index>(sub_cells.size()), static_cast<Index>(cell_count(sup, k)));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

/// Factor-2 subdivision map from k-cochains on coarse.subdivided() to k-cochains
/// on coarse: a coarse k-cell receives the sum of its 2^k fine sub-cells.
/// k = 0 is vertex restriction.
inline IntegerMatrix subdivision_matrix(const Box& coarse, int k) {
  if (k < 0 || k > 2 || k > coarse.dim()) throw DomainError("subdivision_matrix: unsupported degree");
  const Box fine = coarse.subdivided();
  const auto coarse_cells = enumerate_cells(coarse, k);
  const CellIndex fine_index(enumerate_cells(fine, k));
  std::vector<Eigen::Triplet<std::int64_t, Index>> trips;
  for (std::size_t r = 0; r < coarse_cells.size(); ++r) {
    const Cell& c = coarse_cells[r];
    for (int mask = 0; mask < (1 << k); ++mask) {
      std::vector<int> v = c.base_vertex;
      for (int& x : v) x *= 2;
      for (int b = 0; b < k; ++b)
        if (mask & (1 << b)) ++v[c.directions[b]];
      const Index col = fine_index.find(v, c.directions);
      if (col < 0) throw IntegrityError("subdivision_matrix: sub-cell outside fine box");
      trips.emplace_back(static_cast<Index>(r), col, 1);
    }
  }
  IntegerMatrix m(static_cast<Index>(coarse_cells.size()), static_cast<Index>(cell_count(fine, k)));
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw IntegrityError("integer overflow in lattice reduction");
  return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw IntegrityError("integer overflow in lattice reduction");
  return r;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Extended gcd: returns g >= 0 with x*a + y*b = g.
inline std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  x = old_s;
  y = old_t;
  return old_r;
}

}  // namespace detail

/// Column Hermite normal form: unimodular column operations bring `a` to
/// lower echelon form with positive pivots and reduced entries left of each
/// pivot. Returns the rank; the first `rank` columns of `a` then form a basis
/// of the integer column lattice and the remaining columns are zero.
/// `pivot_rows` (if given) receives the row of each pivot.
inline Index column_hnf(IntMatrix& a, std::vector<Index>* pivot_rows = nullptr) {
  using detail::checked_add;
  using detail::checked_mul;
  const Index rows = a.rows();
  const Index cols = a.cols();
  Index pc = 0;
  if (pivot_rows) pivot_rows->clear();
  for (Index r = 0; r < rows && pc < cols; ++r) {
    for (Index j = pc + 1; j < cols; ++j) {
      const std::int64_t b = a(r, j);
      if (b == 0) continue;
      const std::int64_t p = a(r, pc);
      std::int64_t x, y;
      const std::int64_t g = detail::ext_gcd(p, b, x, y);
      const std::int64_t pg = p / g, bg = b / g;
      for (Index i = r; i < rows; ++i) {
        const std::int64_t u = a(i, pc), w = a(i, j);
        a(i, pc) = checked_add(checked_mul(x, u), checked_mul(y, w));
        a(i, j) = checked_add(checked_mul(-bg, u), checked_mul(pg, w));
      }
    }
    if (a(r, pc) == 0) continue;
    if (a(r, pc) < 0) a.col(pc) = -a.col(pc);
    const std::int64_t piv = a(r, pc);
    for (Index k = 0; k < pc; ++k) {
      const std::int64_t q = detail::floor_div(a(r, k), piv);
      if (q == 0) continue;
      for (Index i = r; i < rows; ++i) a(i, k) = checked_add(a(i, k), checked_mul(-q, a(i, pc)));
    }
    if (pivot_rows) pivot_rows->push_back(r);
    ++pc;
  }
  return pc;
}

/// True iff the lattice spanned by the (independent) columns of `basis` equals
/// (real span) cap Z^rows; equivalently the gcd of the maximal minors is 1.
inline bool is_saturated(const IntMatrix& basis) {
  if (basis.cols() == 0) return true;
  IntMatrix t = basis.transpose();
  const Index r = column_hnf(t);
  if (r != basis.cols()) return false;
  for (Index i = 0, row = 0; i < r; ++i) {
    while (t(row, i) == 0) ++row;
    if (t(row, i) != 1) return false;
    ++row;
  }
  return true;
}

/// Basis (as columns) of the integer image lattice of `m`. Throws
/// IntegrityError if that lattice is not saturated.
inline IntMatrix image_lattice(const IntMatrix& m) {
  IntMatrix h = m;
  const Index r = column_hnf(h);
  IntMatrix basis = h.leftCols(r);
  if (!is_saturated(basis))
    throw IntegrityError("image_lattice: integer image is not saturated (non-contractible input?)");
  return basis;
}

inline IntMatrix image_lattice(const IntegerMatrix& m) { return image_lattice(to_dense(m)); }

/// Gram-orthogonal projector onto the column span of m.
inline Matrix real_image_projector(const Matrix& m, const Matrix& gram) {
  require_spd(gram, "real_image_projector");
  if (gram.rows() != m.rows()) throw DomainError("real_image_projector: gram size mismatch");
  const Matrix q = orthonormal_column_basis(m);
  if (q.cols() == 0) return Matrix::Zero(m.rows(), m.rows());
  const Matrix gq = gram * q;
  const Matrix small = q.transpose() * gq;
  return q * Eigen::LLT<Matrix>(small).solve(gq.transpose());
}

inline Matrix real_image_projector(const IntegerMatrix& m, const Matrix& gram) {
  return real_image_projector(to_real(m), gram);
}

/// Coordinate-list text: one "row col value" line per nonzero, 0-based.
inline void write_coordinate_list(std::ostream& os, const IntegerMatrix& m) {
  os << "# rows " << m.rows() << " cols " << m.cols() << " nnz " << m.nonZeros() << "\n";
  std::vector<std::tuple<Index, Index, std::int64_t>> entries;
  for (Index c = 0; c < m.outerSize(); ++c)
    for (IntegerMatrix::InnerIterator it(m, c); it; ++it)
      if (it.value() != 0) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end());
  for (const auto& [r, c, v] : entries) os << r << " " << c << " " << v << "\n";
}

}  // namespace villain
