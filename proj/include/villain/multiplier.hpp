#pragma once

// Translation-invariant operators on l^2 cochains of Z^d as Fourier
// multipliers on Lambda^k(C^d)-valued 0-cochains. Matrix entries between Dirac
// cochains are extracted with a uniform frequency grid, which is exactly the
// matrix entry of the same operator on the periodic lattice Z_N^d.
//
// DFT convention: (F c)(xi) = sum_v c(v) exp(-i v.xi), so forward differences
// have symbol exp(i xi_j) - 1 and
//   <delta_p, A delta_q> = (2 pi)^{-d} int exp(-i (v_q - v_p).xi) M_{a_p a_q}(xi) dxi.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <thread>
#include <vector>

#include "villain/complex.hpp"

namespace villain {

using Complex = std::complex<double>;

/// Sorted k-multi-indices of {0..d-1} in lexicographic order.
class ExteriorBasis {
 public:
  ExteriorBasis(int d, int k) : d_(d), k_(k) {
    if (d < 1 || k < 0 || k > d) throw DomainError("ExteriorBasis: degree out of range");
    indices_ = direction_sets(d, k);
  }

  int dim() const { return d_; }
  int degree() const { return k_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  const std::vector<int>& operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }

  Index index_of(const std::vector<int>& alpha) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), alpha);
    if (it == indices_.end() || *it != alpha) throw DomainError("ExteriorBasis: multi-index not in basis");
    return static_cast<Index>(it - indices_.begin());
  }

 private:
  int d_, k_;
  std::vector<std::vector<int>> indices_;
};

/// A symbol evaluated at one frequency. `degenerate` marks xi = 0, where the
/// projection symbol is given its identity value.
struct SymbolMatrix {
  Vector xi;
  ComplexMatrix entries;
  bool degenerate = false;
};

/// m(xi)_j = exp(i xi_j) - 1.
inline ComplexVector m_vector(const Vector& xi) {
  ComplexVector m(xi.size());
  for (Index j = 0; j < xi.size(); ++j) m(j) = Complex(std::cos(xi(j)) - 1.0, std::sin(xi(j)));
  return m;
}

/// |m(xi)|^2 = 4 sum_j sin^2(xi_j / 2).
inline double m_norm_sq(const Vector& xi) {
  double s = 0.0;
  for (Index j = 0; j < xi.size(); ++j) {
    const double h = std::sin(0.5 * xi(j));
    s += 4.0 * h * h;
  }
  return s;
}

/// Symbol of d_k: e_beta -> m(xi) wedge e_beta, a C(d,k+1) x C(d,k) matrix.
inline SymbolMatrix symbol_d(const Vector& xi, int k) {
  const int d = static_cast<int>(xi.size());
  if (k < 0 || k > d - 1) throw DomainError("symbol_d: degree out of range");
  const ExteriorBasis src(d, k), dst(d, k + 1);
  const ComplexVector m = m_vector(xi);
  SymbolMatrix out{xi, ComplexMatrix::Zero(dst.size(), src.size()), false};
  for (Index c = 0; c < src.size(); ++c) {
    const auto& beta = src[c];
    for (int r = 0; r < d; ++r) {
      if (std::binary_search(beta.begin(), beta.end(), r)) continue;
      // e_r ^ e_beta = (-1)^{#{b in beta : b < r}} e_{sorted}
      const auto pos = std::lower_bound(beta.begin(), beta.end(), r) - beta.begin();
      std::vector<int> gamma = beta;
      gamma.insert(gamma.begin() + pos, r);
      out.entries(dst.index_of(gamma), c) += (pos % 2 == 0 ? 1.0 : -1.0) * m(r);
    }
  }
  return out;
}

/// Symbol of d_k^* : Lambda^k -> Lambda^{k-1}, the conjugate transpose of symbol_d(xi, k-1).
inline SymbolMatrix symbol_dstar(const Vector& xi, int k) {
  const int d = static_cast<int>(xi.size());
  if (k < 1 || k > d) throw DomainError("symbol_dstar: degree out of range");
  SymbolMatrix s = symbol_d(xi, k - 1);
  s.entries = s.entries.adjoint().eval();
  return s;
}

/// Symbol of the projection onto the closure of Im d_1 on 2-cochains:
/// Id - d_2^* d_2 / |m|^2. Identity at xi = 0 (flagged degenerate).
inline SymbolMatrix symbol_projection(const Vector& xi) {
  const int d = static_cast<int>(xi.size());
  if (d < 2) throw DomainError("symbol_projection: need d >= 2");
  const Index n2 = ExteriorBasis(d, 2).size();
  SymbolMatrix out{xi, ComplexMatrix::Identity(n2, n2), false};
  const double msq = m_norm_sq(xi);
  if (msq == 0.0) {
    out.degenerate = true;
    return out;
  }
  if (d == 2) return out;
  const ComplexMatrix dd = symbol_d(xi, 2).entries;
  out.entries -= dd.adjoint() * dd / msq;
  return out;
}

/// F0(xi) = sum_{r not in alpha} sin^2(xi_r/2) / sum_r sin^2(xi_r/2); 0 at xi = 0.
inline double f0_value(const Vector& xi, const std::vector<int>& alpha) {
  double num = 0.0, den = 0.0;
  for (Index r = 0; r < xi.size(); ++r) {
    const double h = std::sin(0.5 * xi(r));
    const double s = h * h;
    den += s;
    if (!std::binary_search(alpha.begin(), alpha.end(), static_cast<int>(r))) num += s;
  }
  return den == 0.0 ? 0.0 : num / den;
}

/// Which evaluation route pi_entry takes.
enum class SymbolPath {
  automatic,    ///< scalar 1 - F0 when the planes agree, full matrix otherwise
  scalar,       ///< scalar 1 - F0 (planes must agree)
  full_matrix,  ///< symbol_projection at every frequency
};

struct GridOptions {
  SymbolPath path = SymbolPath::automatic;
  unsigned threads = 1;
};

namespace detail {

inline void check_plaquette_pair(const Cell& p, const Cell& q) {
  if (p.dim() != 2 || q.dim() != 2) throw DomainError("pi_entry: cells must be 2-dimensional");
  if (p.ambient_dim() != q.ambient_dim()) throw DomainError("pi_entry: cells live in different dimensions");
  validate_cell(p);
  validate_cell(q);
}

// Runs body(k0, partial) over slices k0 = 0..n-1 of the first frequency axis,
// split into contiguous blocks, one per worker; partial sums are combined in
// slice order, so the result depends only on the inputs.
template <class Body>
double sweep_first_axis(int n, unsigned threads, Body&& body) {
  std::vector<double> slice(static_cast<std::size_t>(n), 0.0);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (int k0 = 0; k0 < n; ++k0) slice[k0] = body(k0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      const int lo = static_cast<int>(static_cast<long>(n) * w / threads);
      const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / threads);
      pool.emplace_back([&, lo, hi] {
        for (int k0 = lo; k0 < hi; ++k0) slice[k0] = body(k0);
      });
    }
    for (auto& t : pool) t.join();
  }
  // pairwise reduction
  std::size_t len = slice.size();
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) slice[i] += slice[i + half];
    len = half;
  }
  return slice.empty() ? 0.0 : slice[0];
}

// Per-axis tables: sin^2(pi k / n) and the phase angle of exp(-i t xi).
struct AxisTables {
  std::vector<double> sin_sq;
  std::vector<std::vector<double>> cos_phase, sin_phase;  // per axis

  AxisTables(int n, const std::vector<int>& offset) {
    sin_sq.resize(n);
    for (int k = 0; k < n; ++k) {
      const double h = std::sin(kPi * k / n);
      sin_sq[k] = h * h;
    }
    cos_phase.resize(offset.size());
    sin_phase.resize(offset.size());
    for (std::size_t a = 0; a < offset.size(); ++a) {
      cos_phase[a].resize(n);
      sin_phase[a].resize(n);
      for (int k = 0; k < n; ++k) {
        // reduce t*k mod n so the angle stays exact for large offsets
        const long long tk = ((static_cast<long long>(offset[a]) * k) % n + n) % n;
        const double ang = -2.0 * kPi * static_cast<double>(tk) / n;
        cos_phase[a][k] = std::cos(ang);
        sin_phase[a][k] = std::sin(ang);
      }
    }
  }
};

}  // namespace detail

/// <delta_p, Pi delta_q> on Z^d approximated by the grid sum over
/// xi = 2 pi k / grid_n, i.e. the exact entry of Pi on the periodic lattice
/// Z_{grid_n}^d. The xi = 0 point carries the identity value of the symbol.
inline double pi_entry(const Cell& p, const Cell& q, int grid_n, const GridOptions& opts = {}) {
  detail::check_plaquette_pair(p, q);
  if (grid_n < 4) throw DomainError("pi_entry: grid_n must be >= 4");
  const int d = p.ambient_dim();
  std::vector<int> offset(d);
  for (int a = 0; a < d; ++a) offset[a] = q.base_vertex[a] - p.base_vertex[a];
  const double sign = static_cast<double>(p.orientation * q.orientation);
  const bool same_plane = p.directions == q.directions;
  SymbolPath path = opts.path;
  if (path == SymbolPath::automatic) path = same_plane ? SymbolPath::scalar : SymbolPath::full_matrix;
  if (path == SymbolPath::scalar && !same_plane) throw DomainError("pi_entry: scalar path needs equal planes");

  const int n = grid_n;
  const detail::AxisTables tab(n, offset);
  const double total = static_cast<double>(n) * std::pow(static_cast<double>(n), d - 1);

  bool zero_offset = true;
  for (int a = 0; a < d; ++a)
    if (((offset[a] % n) + n) % n != 0) zero_offset = false;

  if (path == SymbolPath::scalar) {
    // Pi - Id has symbol -F0 on the diagonal; the identity part contributes
    // the periodic Kronecker delta exactly.
    const auto& alpha = p.directions;
    std::vector<char> in_alpha(d, 0);
    for (int a : alpha) in_alpha[a] = 1;
    const double sum = detail::sweep_first_axis(n, opts.threads, [&](int k0) {
      std::vector<int> k(d, 0);
      k[0] = k0;
      double acc = 0.0;
      // iterate remaining axes
      while (true) {
        double num = 0.0, den = 0.0, re = 1.0, im = 0.0;
        for (int a = 0; a < d; ++a) {
          const double s = tab.sin_sq[k[a]];
          den += s;
          if (!in_alpha[a]) num += s;
          const double c = tab.cos_phase[a][k[a]], sn = tab.sin_phase[a][k[a]];
          const double nre = re * c - im * sn;
          im = re * sn + im * c;
          re = nre;
        }
        if (den > 0.0) acc -= re * (num / den);
        int a = d - 1;
        while (a >= 1 && k[a] == n - 1) {
          k[a] = 0;
          --a;
        }
        if (a < 1) break;
        ++k[a];
      }
      return acc;
    });
    return sign * ((zero_offset ? 1.0 : 0.0) + sum / total);
  }

  const ExteriorBasis lam2(d, 2);
  const Index ip = lam2.index_of(p.directions), iq = lam2.index_of(q.directions);
  const double sum = detail::sweep_first_axis(n, opts.threads, [&](int k0) {
    std::vector<int> k(d, 0);
    k[0] = k0;
    Vector xi(d);
    double acc = 0.0;
    while (true) {
      double re = 1.0, im = 0.0;
      for (int a = 0; a < d; ++a) {
        xi(a) = 2.0 * kPi * k[a] / n;
        const double c = tab.cos_phase[a][k[a]], sn = tab.sin_phase[a][k[a]];
        const double nre = re * c - im * sn;
        im = re * sn + im * c;
        re = nre;
      }
      const Complex entry = symbol_projection(xi).entries(ip, iq);
      acc += (Complex(re, im) * entry).real();
      int a = d - 1;
      while (a >= 1 && k[a] == n - 1) {
        k[a] = 0;
        --a;
      }
      if (a < 1) break;
      ++k[a];
    }
    return acc;
  });
  return sign * sum / total;
}

/// Convenience form: p at the origin in plane alpha_p, q at `offset` in plane
/// alpha_q (0-based axes).
inline double pi_entry(int d, const std::vector<int>& offset, const std::vector<int>& alpha_p,
                       const std::vector<int>& alpha_q, int grid_n, const GridOptions& opts = {}) {
  if (static_cast<int>(offset.size()) != d) throw DomainError("pi_entry: offset has wrong length");
  return pi_entry(Cell{std::vector<int>(d, 0), alpha_p, 1}, Cell{offset, alpha_q, 1}, grid_n, opts);
}

/// The same entry from dense linear algebra on the periodic lattice Z_N^d:
/// Pi = Id - d2^T Delta3^+ d2 with Delta3 = d2 d2^T + d3^T d3. The kernel of
/// Delta3 (constant 3-cochains per orientation) is orthogonal to the range of
/// d2, so Delta3 + (projector onto that kernel) is solved instead.
inline double pi_entry_oracle(const Cell& p, const Cell& q, int period_n) {
  detail::check_plaquette_pair(p, q);
  const int d = p.ambient_dim();
  if (period_n < 2) throw DomainError("pi_entry_oracle: period must be >= 2");
  std::int64_t volume = 1;
  for (int i = 0; i < d; ++i) volume *= period_n;
  const double sign = static_cast<double>(p.orientation * q.orientation);
  auto wrap = [period_n](int x) { return ((x % period_n) + period_n) % period_n; };
  auto same = [&](const Cell& a, const Cell& b) {
    if (a.directions != b.directions) return false;
    for (int i = 0; i < d; ++i)
      if (wrap(a.base_vertex[i]) != wrap(b.base_vertex[i])) return false;
    return true;
  };
  const double kron = same(p, q) ? 1.0 : 0.0;
  if (d < 3) return sign * kron;
  if (volume * static_cast<std::int64_t>(ExteriorBasis(d, 3).size()) > 20000)
    throw DomainError("pi_entry_oracle: periodic lattice too large for dense solve");

  const ExteriorBasis l2(d, 2), l3(d, 3);
  const Index n2 = volume * l2.size(), n3 = volume * l3.size();
  const Index n4 = d >= 4 ? volume * ExteriorBasis(d, 4).size() : 0;

  auto vertex_index = [&](const std::vector<int>& v) {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * period_n + wrap(v[i]);
    return static_cast<Index>(idx);
  };
  auto cell_index = [&](const ExteriorBasis& b, const std::vector<int>& v, const std::vector<int>& alpha) {
    return vertex_index(v) * b.size() + b.index_of(alpha);
  };
  // coboundary of degree k on the periodic lattice (cubical incidence rule)
  auto periodic_coboundary = [&](int k) {
    const ExteriorBasis lo(d, k), hi(d, k + 1);
    Matrix m = Matrix::Zero(volume * hi.size(), volume * lo.size());
    std::vector<int> v(d, 0);
    for (std::int64_t vi = 0; vi < volume; ++vi) {
      std::int64_t rem = vi;
      for (int i = d - 1; i >= 0; --i) {
        v[i] = static_cast<int>(rem % period_n);
        rem /= period_n;
      }
      for (Index h = 0; h < hi.size(); ++h) {
        const auto& alpha = hi[h];
        const Index row = cell_index(hi, v, alpha);
        for (int pos = 0; pos <= k; ++pos) {
          std::vector<int> face = alpha;
          face.erase(face.begin() + pos);
          std::vector<int> front = v;
          ++front[alpha[pos]];
          const double s = (pos % 2 == 0) ? 1.0 : -1.0;
          m(row, cell_index(lo, front, face)) += s;
          m(row, cell_index(lo, v, face)) -= s;
        }
      }
    }
    return m;
  };

  const Matrix d2 = periodic_coboundary(2);
  Matrix lap = d2 * d2.transpose();
  if (n4 > 0) {
    const Matrix d3 = periodic_coboundary(3);
    lap += d3.transpose() * d3;
  }
  // projector onto constant 3-cochains of each orientation
  for (Index a = 0; a < n3; ++a)
    for (Index b = a % l3.size(); b < n3; b += l3.size()) lap(a, b) += 1.0 / static_cast<double>(volume);

  Eigen::LDLT<Matrix> ldlt(lap);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * ldlt.vectorD().maxCoeff())
    throw IntegrityError("pi_entry_oracle: regularized Laplacian is singular");

  Vector dp = Vector::Zero(n2), dq = Vector::Zero(n2);
  dp(cell_index(l2, p.base_vertex, p.directions)) = 1.0;
  dq(cell_index(l2, q.base_vertex, q.directions)) = 1.0;
  const Vector x = ldlt.solve(Vector(d2 * dq));
  const double correction = (d2 * dp).dot(x);
  return sign * (kron - correction);
}

/// Grid sum of 1 - F0 over all of {0..n-1}^d (xi = 0 included with value 1).
inline double diagonal_grid_sum(int d, const std::vector<int>& alpha, int grid_n, unsigned threads = 1) {
  const double mean = pi_entry(d, std::vector<int>(d, 0), alpha, alpha, grid_n, {SymbolPath::scalar, threads});
  return mean * std::pow(static_cast<double>(grid_n), d);
}

}  // namespace villain
