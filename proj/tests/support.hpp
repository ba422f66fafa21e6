#pragma once

// Helpers shared by the test suites: brute-force oracles that do not go
// through the library's own enumeration or elimination code.

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "villain/complex.hpp"

namespace villain::testing {

/// Every box with 1 <= side <= max_side in dimension d, lower corner 0.
inline std::vector<Box> all_boxes(int d, int max_side) {
  std::vector<Box> out;
  std::vector<int> s(d, 1);
  while (true) {
    out.emplace_back(std::vector<int>(d, 0), s);
    int i = d - 1;
    while (i >= 0 && s[i] == max_side) s[i--] = 1;
    if (i < 0) break;
    ++s[i];
  }
  return out;
}

/// Counts k-cells by scanning every lattice point of the box and every
/// k-subset of axes, keeping those whose cell fits.
inline long brute_force_cell_count(const Box& b, int k) {
  const int d = b.dim();
  long count = 0;
  std::vector<int> v = b.lower;
  while (true) {
    for (int mask = 0; mask < (1 << d); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      bool fits = true;
      for (int a = 0; a < d; ++a)
        if ((mask >> a & 1) && v[a] + 1 > b.lower[a] + b.sides[a]) fits = false;
      count += fits;
    }
    int i = d - 1;
    while (i >= 0 && v[i] == b.lower[i] + b.sides[i]) {
      v[i] = b.lower[i];
      --i;
    }
    if (i < 0) break;
    ++v[i];
  }
  return count;
}

/// Rank through Eigen's full-pivot LU, independent of the library's own
/// elimination.
inline Index lu_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-10);
  return lu.rank();
}

inline Matrix random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

}  // namespace villain::testing
