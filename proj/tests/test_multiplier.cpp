#include <gtest/gtest.h>

#include <random>

#include "villain/multiplier.hpp"

using namespace villain;

namespace {

Vector random_xi(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  Vector xi(d);
  for (int i = 0; i < d; ++i) xi(i) = u(rng);
  return xi;
}

Cell plaquette(std::vector<int> v, std::vector<int> dirs, int orientation = 1) {
  return Cell{std::move(v), std::move(dirs), orientation};
}

double max_abs_c(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(MVector, ZeroAndCorner) {
  EXPECT_EQ(max_abs_c(m_vector(Vector::Zero(4))), 0.0);
  const Vector pi = Vector::Constant(3, kPi);
  const ComplexVector m = m_vector(pi);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(m(j) - Complex(-2.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(m_norm_sq(pi), 12.0, 1e-14);
}

TEST(MVector, NormIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vector xi = random_xi(1 + i % 5, rng);
    EXPECT_NEAR(m_vector(xi).squaredNorm(), m_norm_sq(xi), 1e-14);
  }
}

TEST(ExteriorBasis, SizesAndOrder) {
  EXPECT_EQ(ExteriorBasis(5, 2).size(), 10);
  EXPECT_EQ(ExteriorBasis(4, 0).size(), 1);
  const ExteriorBasis b(3, 2);
  EXPECT_EQ(b[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(b[1], (std::vector<int>{0, 2}));
  EXPECT_EQ(b[2], (std::vector<int>{1, 2}));
  EXPECT_EQ(b.index_of({1, 2}), 2);
  EXPECT_THROW(b.index_of({2, 1}), DomainError);
  EXPECT_THROW(ExteriorBasis(3, 4), DomainError);
}

TEST(SymbolD, ZeroAtOriginAndRangeChecks) {
  EXPECT_EQ(max_abs_c(symbol_d(Vector::Zero(3), 1).entries), 0.0);
  EXPECT_THROW(symbol_d(Vector::Zero(3), 3), DomainError);
  EXPECT_THROW(symbol_dstar(Vector::Zero(3), 0), DomainError);
  EXPECT_EQ(max_abs_c(symbol_dstar(Vector::Zero(3), 2).entries), 0.0);
}

TEST(SymbolD, HandEvaluatedWedge) {
  // d = 3, k = 1, xi = (pi, 0, 0): m = -2 e1, so e2 -> -2 e1^e2 and e3 -> -2 e1^e3
  Vector xi(3);
  xi << kPi, 0.0, 0.0;
  const ComplexMatrix s = symbol_d(xi, 1).entries;
  const ExteriorBasis l1(3, 1), l2(3, 2);
  ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
  expected(l2.index_of({0, 1}), l1.index_of({1})) = -2.0;
  expected(l2.index_of({0, 2}), l1.index_of({2})) = -2.0;
  EXPECT_LT(max_abs_c(s - expected), 1e-15);
}

TEST(SymbolD, SquaresToZero) {
  std::mt19937_64 rng(2);
  for (int d = 2; d <= 5; ++d)
    for (int i = 0; i < 50; ++i) {
      const Vector xi = random_xi(d, rng);
      for (int k = 0; k + 2 <= d; ++k)
        EXPECT_LE(max_abs_c(symbol_d(xi, k + 1).entries * symbol_d(xi, k).entries), 1e-13);
    }
}

TEST(SymbolDstar, AdjointPairing) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int d = 2; d <= 5; ++d) {
    const Vector xi = random_xi(d, rng);
    for (int k = 0; k < d; ++k) {
      const ComplexMatrix a = symbol_d(xi, k).entries, as = symbol_dstar(xi, k + 1).entries;
      ComplexVector u(a.cols()), v(a.rows());
      for (Index i = 0; i < u.size(); ++i) u(i) = Complex(g(rng), g(rng));
      for (Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
      EXPECT_LE(std::abs(v.dot(a * u) - (as * v).dot(u)), 1e-13 * (1 + u.norm() * v.norm()));
    }
  }
}

TEST(SymbolLaplacian, HodgeIdentity) {
  std::mt19937_64 rng(4);
  for (int d = 2; d <= 5; ++d)
    for (int i = 0; i < 30; ++i) {
      const Vector xi = random_xi(d, rng);
      const double msq = m_norm_sq(xi);
      for (int k = 0; k <= d; ++k) {
        const Index n = ExteriorBasis(d, k).size();
        ComplexMatrix lap = ComplexMatrix::Zero(n, n);
        if (k < d) lap += symbol_dstar(xi, k + 1).entries * symbol_d(xi, k).entries;
        if (k > 0) lap += symbol_d(xi, k - 1).entries * symbol_dstar(xi, k).entries;
        EXPECT_LE(max_abs_c(lap - msq * ComplexMatrix::Identity(n, n)), 1e-12);
      }
    }
}

TEST(Projection, PlanarIsIdentity) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(max_abs_c(symbol_projection(random_xi(2, rng)).entries - ComplexMatrix::Identity(1, 1)), 0.0);
}

TEST(Projection, CornerValueTwoThirds) {
  const SymbolMatrix s = symbol_projection(Vector::Constant(3, kPi));
  EXPECT_NEAR(s.entries(0, 0).real(), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f0_value(Vector::Constant(3, kPi), {0, 1}), 1.0 / 3.0, 1e-15);
}

TEST(Projection, HermitianIdempotentAndDiagonalIsOneMinusF0) {
  std::mt19937_64 rng(6);
  for (int d = 2; d <= 5; ++d) {
    const ExteriorBasis l2(d, 2);
    for (int i = 0; i < 200; ++i) {
      const Vector xi = random_xi(d, rng);
      const ComplexMatrix m = symbol_projection(xi).entries;
      EXPECT_LE(max_abs_c(m * m - m), 1e-12);
      EXPECT_LE(max_abs_c(m - m.adjoint()), 1e-12);
      for (Index a = 0; a < l2.size(); ++a) EXPECT_NEAR(m(a, a).real(), 1.0 - f0_value(xi, l2[a]), 1e-12);
      // real operators: M(-xi) = conj M(xi)
      EXPECT_LE(max_abs_c(symbol_projection(-xi).entries - m.conjugate()), 1e-12);
    }
  }
}

TEST(Projection, OriginIsFlaggedIdentity) {
  const SymbolMatrix s = symbol_projection(Vector::Zero(4));
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(max_abs_c(s.entries - ComplexMatrix::Identity(6, 6)), 0.0);
  EXPECT_FALSE(symbol_projection(Vector::Constant(3, 0.1)).degenerate);
  EXPECT_THROW(symbol_projection(Vector::Zero(1)), DomainError);
}

TEST(PiEntry, DiagonalIsTwoOverD) {
  EXPECT_NEAR(pi_entry(3, {0, 0, 0}, {0, 1}, {0, 1}, 256), 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(pi_entry(4, {0, 0, 0, 0}, {1, 3}, {1, 3}, 32, {SymbolPath::scalar, 1}), 0.5, 1e-4);
}

TEST(PiEntry, PlanarOffDiagonalVanishes) {
  EXPECT_NEAR(pi_entry(2, {3, -1}, {0, 1}, {0, 1}, 64), 0.0, 1e-12);
  EXPECT_NEAR(pi_entry(2, {0, 0}, {0, 1}, {0, 1}, 64), 1.0, 1e-12);
}

TEST(PiEntry, TranslationInvarianceIsExact) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> e(-5, 5);
  const std::vector<std::vector<int>> planes = {{0, 1}, {0, 2}, {1, 2}};
  for (int i = 0; i < 10; ++i) {
    const Cell p = plaquette({e(rng), e(rng), e(rng)}, planes[i % 3]);
    const Cell q = plaquette({e(rng), e(rng), e(rng)}, planes[(i + 1) % 3]);
    const std::vector<int> t = {e(rng), e(rng), e(rng)};
    EXPECT_EQ(pi_entry(p, q, 16), pi_entry(p.translated(t), q.translated(t), 16));
  }
}

TEST(PiEntry, DependsOnlyOnOffsetAndPlanes) {
  const Cell p = plaquette({2, -1, 4}, {0, 2});
  const Cell q = plaquette({3, 1, 4}, {1, 2});
  EXPECT_EQ(pi_entry(p, q, 16), pi_entry(3, {1, 2, 0}, {0, 2}, {1, 2}, 16));
}

TEST(PiEntry, OrientationSigns) {
  const Cell p = plaquette({0, 0, 0}, {0, 1});
  const Cell q = plaquette({1, 0, 0}, {1, 2});
  EXPECT_EQ(pi_entry(p.flipped(), q, 16), -pi_entry(p, q, 16));
  EXPECT_EQ(pi_entry(p.flipped(), q.flipped(), 16), pi_entry(p, q, 16));
}

TEST(PiEntry, MatchesDensePeriodicOracle) {
  const std::vector<std::pair<Cell, Cell>> pairs = {
      {plaquette({0, 0, 0}, {0, 1}), plaquette({0, 0, 0}, {0, 1})},
      {plaquette({0, 0, 0}, {0, 1}), plaquette({1, 0, 0}, {0, 1})},
      {plaquette({0, 0, 0}, {0, 1}), plaquette({0, 0, 1}, {0, 1})},
      {plaquette({0, 0, 0}, {0, 1}), plaquette({1, 0, 0}, {1, 2})},
      {plaquette({0, 0, 0}, {0, 1}), plaquette({0, 1, 3}, {0, 2}, -1)},
      {plaquette({2, 3, 1}, {1, 2}), plaquette({0, 0, 0}, {0, 2})},
  };
  for (const auto& [p, q] : pairs) {
    const double grid = pi_entry(p, q, 8);
    const double oracle = pi_entry_oracle(p, q, 8);
    EXPECT_NEAR(grid, oracle, 1e-10) << p << " " << q;
  }
}

TEST(PiEntry, OracleDiagonalAndPlanarCases) {
  const Cell p = plaquette({0, 0, 0}, {0, 1});
  const double diag = pi_entry_oracle(p, p, 8);
  EXPECT_GT(diag, 0.0);
  EXPECT_LT(diag, 1.0);
  EXPECT_NEAR(pi_entry_oracle(plaquette({0, 0}, {0, 1}), plaquette({0, 0}, {0, 1}), 6), 1.0, 1e-12);
  EXPECT_NEAR(pi_entry_oracle(plaquette({0, 0}, {0, 1}), plaquette({2, 1}, {0, 1}), 6), 0.0, 1e-12);
  EXPECT_THROW(pi_entry_oracle(p, p, 40), DomainError);
}

TEST(PiEntry, ScalarAndFullPathsAgree) {
  for (const std::vector<int>& off : {std::vector<int>{0, 0, 0}, {3, 0, 0}, {1, -2, 5}}) {
    const double s = pi_entry(3, off, {0, 2}, {0, 2}, 16, {SymbolPath::scalar, 1});
    const double f = pi_entry(3, off, {0, 2}, {0, 2}, 16, {SymbolPath::full_matrix, 1});
    EXPECT_NEAR(s, f, 1e-12);
  }
  EXPECT_THROW(pi_entry(3, {0, 0, 0}, {0, 1}, {0, 2}, 16, {SymbolPath::scalar, 1}), DomainError);
}

TEST(PiEntry, ThreadCountIsReproducible) {
  const double a = pi_entry(3, {5, 0, 0}, {0, 1}, {0, 1}, 64, {SymbolPath::scalar, 3});
  const double b = pi_entry(3, {5, 0, 0}, {0, 1}, {0, 1}, 64, {SymbolPath::scalar, 3});
  const double c = pi_entry(3, {5, 0, 0}, {0, 1}, {0, 1}, 64, {SymbolPath::scalar, 1});
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a, c, 1e-15);
}

TEST(PiEntry, DiagonalGridNormalisation) {
  for (int d = 3; d <= 4; ++d) {
    const int n = d == 3 ? 32 : 12;
    const double total = std::pow(static_cast<double>(n), d);
    // axis symmetry away from the origin, which contributes 1
    EXPECT_NEAR(diagonal_grid_sum(d, {0, 1}, n), 2.0 / d * (total - 1.0) + 1.0, 1e-9 * total);
  }
}

TEST(PiEntry, RejectsBadInput) {
  const Cell p = plaquette({0, 0, 0}, {0, 1});
  EXPECT_THROW(pi_entry(p, plaquette({0, 0, 0}, {0}), 16), DomainError);
  EXPECT_THROW(pi_entry(p, p, 2), DomainError);
  EXPECT_THROW(pi_entry(3, {0, 0}, {0, 1}, {0, 1}, 16), DomainError);
}
