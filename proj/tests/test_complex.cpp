#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "villain/complex.hpp"

using namespace villain;
using villain::testing::all_boxes;
using villain::testing::brute_force_cell_count;
using villain::testing::lu_rank;

TEST(Cells, UnitCubeCounts) {
  const Box cube = Box::cube(3);
  EXPECT_EQ(enumerate_cells(cube, 0).size(), 8u);
  EXPECT_EQ(enumerate_cells(cube, 1).size(), 12u);
  EXPECT_EQ(enumerate_cells(cube, 2).size(), 6u);
  EXPECT_EQ(enumerate_cells(cube, 3).size(), 1u);
}

TEST(Cells, CountsMatchBruteForceScan) {
  for (int d = 1; d <= 4; ++d)
    for (const Box& b : all_boxes(d, 3))
      for (int k = 0; k <= d; ++k) {
        EXPECT_EQ(cell_count(b, k), brute_force_cell_count(b, k));
        EXPECT_EQ(static_cast<long>(enumerate_cells(b, k).size()), brute_force_cell_count(b, k));
      }
}

TEST(Cells, DegreeOutOfRangeThrows) {
  EXPECT_THROW(enumerate_cells(Box::cube(3), 4), DomainError);
  EXPECT_THROW(enumerate_cells(Box::cube(3), -1), DomainError);
  EXPECT_THROW(coboundary_matrix(Box::cube(3), 3), DomainError);
}

TEST(Cells, OrderingIsLexicographicAndStrict) {
  const Box b({-1, 2, 0}, {2, 1, 3});
  for (int k = 0; k <= 3; ++k) {
    const auto cells = enumerate_cells(b, k);
    for (std::size_t i = 1; i < cells.size(); ++i) EXPECT_TRUE(cells[i - 1] < cells[i]);
    for (const auto& c : cells) {
      EXPECT_EQ(c.orientation, 1);
      EXPECT_TRUE(b.contains(c));
    }
  }
}

TEST(Cells, EqualityIgnoresOrientation) {
  const Cell a{{0, 0, 0}, {0, 1}, 1};
  EXPECT_EQ(a, a.flipped());
  EXPECT_FALSE(a < a.flipped());
  EXPECT_THROW(validate_cell(Cell{{0, 0, 0}, {1, 0}, 1}), DomainError);
  EXPECT_THROW(validate_cell(Cell{{0, 0, 0}, {0, 3}, 1}), DomainError);
  EXPECT_THROW(validate_cell(Cell{{0, 0, 0}, {0, 1}, 2}), DomainError);
}

TEST(Cells, InvalidBoxesThrow) {
  EXPECT_THROW(Box({0, 0}, {1, 0}), DomainError);
  EXPECT_THROW(Box({0}, {1, 1}), DomainError);
}

TEST(Coboundary, UnitSquareHasOnePlaquetteRow) {
  const IntMatrix d1 = to_dense(coboundary_matrix(Box::cube(2), 1));
  ASSERT_EQ(d1.rows(), 1);
  ASSERT_EQ(d1.cols(), 4);
  // edges in order: (0,0;1) (0,0;2) (0,1;1) (1,0;2); boundary = e1 + e2' - e1' - e2
  IntMatrix expected(1, 4);
  expected << 1, -1, -1, 1;
  EXPECT_EQ(d1, expected);
  EXPECT_EQ(lu_rank(to_real(d1)), 1);
}

TEST(Coboundary, UnitCubeRankIsEdgesMinusVerticesPlusOne) {
  const IntMatrix d1 = to_dense(coboundary_matrix(Box::cube(3), 1));
  EXPECT_EQ(real_rank(to_real(d1)), 12 - 8 + 1);
  EXPECT_EQ(lu_rank(to_real(d1)), 5);
}

TEST(Coboundary, EntriesAndColumnSparsity) {
  for (int d = 2; d <= 4; ++d)
    for (int k = 0; k < d; ++k) {
      const IntegerMatrix m = coboundary_matrix(Box::cube(d, 2), k);
      for (Index c = 0; c < m.outerSize(); ++c) {
        int nnz = 0;
        for (IntegerMatrix::InnerIterator it(m, c); it; ++it) {
          EXPECT_TRUE(it.value() == 1 || it.value() == -1);
          ++nnz;
        }
        EXPECT_LE(nnz, 2 * (d - k));
      }
    }
}

TEST(Coboundary, SquaresToZeroExactly) {
  for (int d = 2; d <= 4; ++d)
    for (const Box& b : all_boxes(d, 2))
      for (int k = 0; k + 1 < d; ++k) {
        const IntMatrix prod = to_dense(coboundary_matrix(b, k + 1)) * to_dense(coboundary_matrix(b, k));
        EXPECT_EQ(prod.cwiseAbs().maxCoeff(), 0);
      }
}

TEST(Coboundary, ContractibilityRanks) {
  for (int d = 2; d <= 3; ++d)
    for (const Box& b : all_boxes(d, 3)) {
      const Index v = cell_count(b, 0);
      const Index e = cell_count(b, 1);
      const Index f = cell_count(b, 2);
      const Index r0 = lu_rank(to_real(coboundary_matrix(b, 0)));
      const Index r1 = lu_rank(to_real(coboundary_matrix(b, 1)));
      EXPECT_EQ(r0, v - 1);
      EXPECT_EQ(e - r1, r0);  // ker d1 = Im d0
      if (d >= 3) {
        const Index r2 = lu_rank(to_real(coboundary_matrix(b, 2)));
        EXPECT_EQ(f - r2, r1);  // ker d2 = Im d1
      }
      EXPECT_EQ(real_rank(to_real(coboundary_matrix(b, 1))), r1);
    }
}

TEST(Restriction, IdentityWhenBoxesCoincide) {
  const Box b({1, 0, -1}, {2, 1, 2});
  for (int k = 0; k <= 3; ++k) {
    const IntMatrix r = to_dense(restriction_matrix(b, b, k));
    EXPECT_EQ(r, IntMatrix::Identity(r.rows(), r.cols()));
  }
}

TEST(Restriction, UnitCubeInsideSideTwoCube) {
  const IntMatrix r = to_dense(restriction_matrix(Box::cube(3, 1), Box::cube(3, 2), 1));
  EXPECT_EQ(r.rows(), 12);
  EXPECT_EQ(r.cols(), cell_count(Box::cube(3, 2), 1));
  for (Index i = 0; i < r.rows(); ++i) EXPECT_EQ(r.row(i).sum(), 1);
  for (Index j = 0; j < r.cols(); ++j) EXPECT_LE(r.col(j).sum(), 1);
}

TEST(Restriction, NonNestedThrows) {
  EXPECT_THROW(restriction_matrix(Box({1, 1}, {2, 2}), Box::cube(2, 2), 1), DomainError);
}

TEST(Restriction, CommutesWithCoboundaryOnRandomPairs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    std::uniform_int_distribution<int> side(1, 3), lo(-1, 1);
    std::vector<int> sup_lo(d), sup_s(d), sub_lo(d), sub_s(d);
    for (int i = 0; i < d; ++i) {
      sup_lo[i] = lo(rng);
      sup_s[i] = side(rng);
      std::uniform_int_distribution<int> ss(1, sup_s[i]);
      sub_s[i] = ss(rng);
      std::uniform_int_distribution<int> off(0, sup_s[i] - sub_s[i]);
      sub_lo[i] = sup_lo[i] + off(rng);
    }
    const Box sup(sup_lo, sup_s), sub(sub_lo, sub_s);
    for (int k = 0; k + 1 <= d - 1; ++k) {
      const IntMatrix lhs = to_dense(restriction_matrix(sub, sup, k + 1)) * to_dense(coboundary_matrix(sup, k));
      const IntMatrix rhs = to_dense(coboundary_matrix(sub, k)) * to_dense(restriction_matrix(sub, sup, k));
      EXPECT_EQ(lhs, rhs);
    }
  }
}

TEST(Subdivision, CoarseEdgeIsSumOfTwoHalves) {
  const IntMatrix s = to_dense(subdivision_matrix(Box::cube(2), 1));
  const auto fine_edges = enumerate_cells(Box::cube(2, 2), 1);
  const auto coarse_edges = enumerate_cells(Box::cube(2), 1);
  for (Index r = 0; r < s.rows(); ++r) {
    EXPECT_EQ(s.row(r).sum(), 2);
    for (Index c = 0; c < s.cols(); ++c)
      if (s(r, c)) EXPECT_EQ(fine_edges[c].directions, coarse_edges[r].directions);
  }
  // the first coarse edge (0,0;1) covers fine edges (0,0;1) and (1,0;1)
  const CellIndex fine(fine_edges);
  EXPECT_EQ(s(0, fine.find({0, 0}, {0})), 1);
  EXPECT_EQ(s(0, fine.find({1, 0}, {0})), 1);
}

TEST(Subdivision, CoarsePlaquetteIsSumOfFour) {
  const IntMatrix s = to_dense(subdivision_matrix(Box::cube(3), 2));
  EXPECT_EQ(s.rows(), 6);
  for (Index r = 0; r < s.rows(); ++r) EXPECT_EQ(s.row(r).sum(), 4);
  EXPECT_THROW(subdivision_matrix(Box::cube(3), 3), DomainError);
}

TEST(Subdivision, CommutesWithCoboundary) {
  for (const Box& coarse : {Box::cube(2), Box::cube(3), Box({0, 1, 0}, {2, 1, 1})})
    for (int k = 0; k <= 1; ++k) {
      const Box fine = coarse.subdivided();
      const IntMatrix lhs = to_dense(subdivision_matrix(coarse, k + 1)) * to_dense(coboundary_matrix(fine, k));
      const IntMatrix rhs = to_dense(coboundary_matrix(coarse, k)) * to_dense(subdivision_matrix(coarse, k));
      EXPECT_EQ(lhs, rhs);
    }
}

TEST(ImageLattice, TrivialCases) {
  EXPECT_EQ(image_lattice(IntMatrix(IntMatrix::Zero(3, 2))).cols(), 0);
  EXPECT_EQ(image_lattice(IntMatrix(IntMatrix::Identity(4, 4))), IntMatrix(IntMatrix::Identity(4, 4)));
}

TEST(ImageLattice, UnitCubeImageHasRankFive) {
  const IntegerMatrix d1 = coboundary_matrix(Box::cube(3), 1);
  const IntMatrix b = image_lattice(d1);
  EXPECT_EQ(b.cols(), 5);
  EXPECT_TRUE(is_saturated(b));
  EXPECT_EQ(lu_rank(to_real(b)), 5);
}

TEST(ImageLattice, SpansSameSpaceAndContainsColumns) {
  for (const Box& box : {Box::cube(3, 2), Box({0, 0, 0}, {1, 2, 3}), Box::cube(2, 3)}) {
    const IntMatrix m = to_dense(coboundary_matrix(box, 1));
    const IntMatrix b = image_lattice(m);
    const Matrix br = to_real(b);
    EXPECT_EQ(lu_rank(br), lu_rank(to_real(m)));
    // every column of m is an integer combination of the basis
    const Matrix coef = br.colPivHouseholderQr().solve(to_real(m));
    EXPECT_LT((coef.array() - coef.array().round()).abs().maxCoeff(), 1e-9);
    EXPECT_LT((br * coef - to_real(m)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ImageLattice, IndexTwoSublatticeIsNotSaturated) {
  IntMatrix m(2, 2);
  m << 1, 1, 1, -1;
  EXPECT_THROW(image_lattice(m), IntegrityError);
  IntMatrix b(2, 1);
  b << 2, 0;
  EXPECT_FALSE(is_saturated(b));
}

TEST(ImageLattice, OverflowIsDetected) {
  IntMatrix m(2, 2);
  m << std::numeric_limits<std::int64_t>::max() / 2 + 7, 3, std::numeric_limits<std::int64_t>::max() / 3, 5;
  EXPECT_ANY_THROW(image_lattice(m));
}

TEST(Projector, FullRankIsIdentityAndZeroIsZero) {
  std::mt19937_64 rng(3);
  const Matrix g = villain::testing::random_spd(4, rng);
  Matrix m(4, 4);
  m << 1, 2, 0, 0, 0, 1, 0, 3, 1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((real_image_projector(m, g) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(real_image_projector(Matrix::Zero(4, 2), g).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Projector, IdempotentAndGramSelfAdjoint) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> e(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    Matrix m(n, 3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = e(rng);
    const Matrix g = villain::testing::random_spd(n, rng);
    const Matrix p = real_image_projector(m, g);
    EXPECT_LE((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((g * p - p.transpose() * g).cwiseAbs().maxCoeff(), 1e-12 * g.cwiseAbs().maxCoeff());
    // range oracle: P m = m
    EXPECT_LE((p * m - m).cwiseAbs().maxCoeff(), 1e-12 * 10);
  }
}

TEST(Projector, NonSpdGramThrows) {
  Matrix g = Matrix::Identity(3, 3);
  g(2, 2) = -1;
  EXPECT_THROW(real_image_projector(Matrix::Identity(3, 3), g), DomainError);
}

TEST(Export, CoordinateListFormat) {
  std::ostringstream os;
  write_coordinate_list(os, coboundary_matrix(Box::cube(2), 1));
  EXPECT_EQ(os.str(), "# rows 1 cols 4 nnz 4\n0 0 1\n0 1 -1\n0 2 -1\n0 3 1\n");
}
