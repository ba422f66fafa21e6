#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "villain/errors.hpp"

namespace villain {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Sparse integer matrix; coboundary, restriction and subdivision maps use it.
using IntegerMatrix = Eigen::SparseMatrix<std::int64_t, Eigen::ColMajor, Index>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPiSq = 4.0 * kPi * kPi;

inline Matrix to_real(const IntegerMatrix& m) { return Matrix(m.cast<double>()); }
inline Matrix to_real(const IntMatrix& m) { return m.cast<double>(); }

inline IntMatrix to_dense(const IntegerMatrix& m) { return IntMatrix(m); }

/// Max-abs entry, 0 for empty matrices.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return static_cast<double>(m.cwiseAbs().maxCoeff());
}

/// Rank by Gaussian elimination with partial pivoting. A pivot counts when its
/// magnitude exceeds rel_tol times the largest pivot seen so far (and the
/// largest input entry before any pivot is accepted).
inline Index real_rank(Matrix a, double rel_tol = 1e-10) {
  const Index rows = a.rows();
  const Index cols = a.cols();
  if (rows == 0 || cols == 0) return 0;
  double scale = max_abs(a);
  if (scale == 0.0) return 0;
  Index rank = 0;
  for (Index c = 0; c < cols && rank < rows; ++c) {
    Index piv = rank;
    double best = std::abs(a(rank, c));
    for (Index r = rank + 1; r < rows; ++r) {
      double v = std::abs(a(r, c));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= rel_tol * scale) continue;
    scale = std::max(scale, best);
    if (piv != rank) a.row(piv).swap(a.row(rank));
    const double p = a(rank, c);
    for (Index r = rank + 1; r < rows; ++r) {
      const double f = a(r, c) / p;
      if (f == 0.0) continue;
      a(r, c) = 0.0;
      for (Index j = c + 1; j < cols; ++j) a(r, j) -= f * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

/// Throws DomainError unless m is square, symmetric to sym_tol (relative) and
/// positive definite.
inline void require_spd(const Matrix& m, const std::string& what, double sym_tol = 1e-12) {
  if (m.rows() != m.cols()) throw DomainError(what + ": matrix is not square");
  if (m.rows() == 0) return;
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(Matrix(m - m.transpose())) > sym_tol * scale)
    throw DomainError(what + ": matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw DomainError(what + ": matrix is not positive definite");
}

/// Orthonormal basis of the column span (via SVD, threshold rel_tol * sigma_max).
inline Matrix orthonormal_column_basis(const Matrix& m, double rel_tol = 1e-10) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Matrix(m.rows(), 0);
  Index r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the null space (via SVD, same threshold convention).
inline Matrix null_space_basis(const Matrix& m, double rel_tol = 1e-10) {
  if (m.cols() == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Index r = 0;
  if (s.size() > 0 && s(0) > 0.0)
    while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

/// Symmetric square root-free inverse through LLT; throws DomainError when not SPD.
inline Matrix spd_inverse(const Matrix& m, const std::string& what) {
  if (m.rows() == 0) return Matrix(0, 0);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw DomainError(what + ": Cholesky failed");
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace villain
