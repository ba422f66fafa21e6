#pragma once

// Renormalized inner products on the image spaces Im d1 along a chain of
// complexes, making the induced maps between image tori co-isometries so the
// heat-kernel measures become a projective system.

#include <random>
#include <vector>

#include "villain/gauge.hpp"

namespace villain {

/// A finite chain K_0 <- K_1 <- ... with linking maps between image tori.
///
/// maps[i-1] is the integer matrix (r_{i-1} x r_i) of (P^2_i)_bullet in
/// image-basis coordinates; base_grams[i] is <.,.>_i in the same coordinates.
struct ComplexChain {
  std::vector<Box> complexes;
  std::vector<IntMatrix> image_bases;
  std::vector<IntMatrix> maps;
  std::vector<Matrix> base_grams;

  std::size_t size() const { return complexes.size(); }
};

/// Coordinates of a cochain-level map on image lattices: solves
/// target_basis * p = ambient_map * source_basis exactly over the integers.
inline IntMatrix induced_image_map(const IntMatrix& target_basis, const IntegerMatrix& ambient_map,
                                   const IntMatrix& source_basis) {
  const IntMatrix image = to_dense(ambient_map) * source_basis;
  const Matrix tb = to_real(target_basis);
  const Matrix sol = tb.colPivHouseholderQr().solve(to_real(image));
  IntMatrix p = sol.array().round().cast<std::int64_t>().matrix();
  if (target_basis * p != image)
    throw IntegrityError("induced_image_map: map does not preserve the image lattices");
  return p;
}

/// Nested boxes (smallest first) with restriction maps.
inline ComplexChain restriction_chain(const std::vector<Box>& boxes, const InnerProductSpec& spec = EuclideanProduct{}) {
  if (boxes.empty()) throw DomainError("restriction_chain: empty chain");
  ComplexChain chain;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (i > 0 && !boxes[i].contains(boxes[i - 1])) throw DomainError("restriction_chain: boxes are not nested");
    const GaugeComplexData g = build(boxes[i], spec);
    chain.complexes.push_back(boxes[i]);
    chain.image_bases.push_back(g.image_basis);
    chain.base_grams.push_back(g.gram_image);
    if (i > 0)
      chain.maps.push_back(induced_image_map(chain.image_bases[i - 1], restriction_matrix(boxes[i - 1], boxes[i], 2),
                                             chain.image_bases[i]));
  }
  return chain;
}

/// coarse, coarse.subdivided(), ... (levels + 1 complexes) with subdivision
/// maps. Base products are h^power times Euclidean, h = 2^{-level}.
inline ComplexChain subdivision_chain(const Box& coarse, int levels, double power) {
  ComplexChain chain;
  Box b = coarse;
  for (int i = 0; i <= levels; ++i) {
    const double h = std::ldexp(1.0, -i);
    const GaugeComplexData g = build(b, ScaledProduct{h, power});
    chain.complexes.push_back(b);
    chain.image_bases.push_back(g.image_basis);
    chain.base_grams.push_back(g.gram_image);
    if (i > 0)
      chain.maps.push_back(induced_image_map(chain.image_bases[i - 1], subdivision_matrix(chain.complexes[i - 1], 2),
                                             chain.image_bases[i]));
    b = b.subdivided();
  }
  return chain;
}

/// One renormalization step. Splits the source space as Im(p*) + ker p, where
/// Im(p*) = range(gram_i^{-1} p^T) is the gram_i-orthocomplement of ker p
/// (independent of the inner product on the target). The result is the
/// pullback of gram_prev_r on the first summand, gram_i on the second, with
/// the summands orthogonal.
inline Matrix renormalize_step(const Matrix& gram_prev_r, const Matrix& gram_i, const IntMatrix& p) {
  require_spd(gram_prev_r, "renormalize_step (previous gram)");
  require_spd(gram_i, "renormalize_step (current gram)");
  const Index r_prev = p.rows(), r_i = p.cols();
  if (gram_prev_r.rows() != r_prev || gram_i.rows() != r_i) throw DomainError("renormalize_step: shape mismatch");
  const Matrix pr = to_real(p);
  if (real_rank(pr) != r_prev) throw DomainError("renormalize_step: map is not surjective");
  if (r_i == 0) return Matrix(0, 0);

  const Matrix gi_inv = spd_inverse(gram_i, "renormalize_step");
  const Matrix adjoint_range = orthonormal_column_basis(gi_inv * pr.transpose());
  const Matrix kernel = null_space_basis(pr);
  if (adjoint_range.cols() != r_prev || kernel.cols() != r_i - r_prev)
    throw IntegrityError("renormalize_step: decomposition has the wrong dimensions");

  Matrix basis(r_i, r_i);
  basis << adjoint_range, kernel;
  Matrix block = Matrix::Zero(r_i, r_i);
  const Matrix pa = pr * adjoint_range;
  block.topLeftCorner(r_prev, r_prev) = pa.transpose() * gram_prev_r * pa;
  block.bottomRightCorner(r_i - r_prev, r_i - r_prev) = kernel.transpose() * gram_i * kernel;
  const Matrix basis_inv = basis.fullPivLu().inverse();
  Matrix out = basis_inv.transpose() * block * basis_inv;
  out = 0.5 * (out + out.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(out, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw IntegrityError("renormalize_step: result lost positive definiteness");
  return out;
}

struct RenormalizedGrams {
  std::vector<Matrix> grams_r;
};

inline RenormalizedGrams renormalize_chain(const ComplexChain& chain) {
  if (chain.size() == 0) throw DomainError("renormalize_chain: empty chain");
  RenormalizedGrams out;
  out.grams_r.push_back(chain.base_grams.front());
  for (std::size_t i = 1; i < chain.size(); ++i)
    out.grams_r.push_back(renormalize_step(out.grams_r.back(), chain.base_grams[i], chain.maps[i - 1]));
  return out;
}

/// max |p G_r^{-1} p^T - G_prev_r^{-1}|.
inline double coisometry_residual(const Matrix& gram_prev_r, const Matrix& gram_r, const IntMatrix& p) {
  const Matrix pr = to_real(p);
  return max_abs(Matrix(pr * spd_inverse(gram_r, "coisometry_residual") * pr.transpose() -
                        spd_inverse(gram_prev_r, "coisometry_residual")));
}

struct StageReport {
  std::size_t stage = 0;  ///< index i of the finer complex of the step i -> i-1
  double coisometry_residual = 0.0;
  double ft_residual = 0.0;
  /// max |q_{i-1}(xi) - q_i(p^T xi)| over the same characters (dual norms
  /// squared); unlike ft_residual it does not shrink when the FTs underflow.
  double dual_norm_residual = 0.0;
};

/// For random characters xi of stage i-1, compares the heat Fourier
/// coefficients of stage i-1 at xi and of stage i at p^T xi (pushforward
/// consistency). Characters have entries uniform in [-max_entry, max_entry].
template <class Rng>
std::vector<StageReport> verify_projective_measures(const ComplexChain& chain, const std::vector<Matrix>& grams,
                                                    double beta, int num_characters, Rng& rng, int max_entry = 2) {
  require_positive_beta(beta);
  if (grams.size() != chain.size()) throw DomainError("verify_projective_measures: gram count mismatch");
  std::vector<StageReport> out;
  std::uniform_int_distribution<std::int64_t> entry(-max_entry, max_entry);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const TorusGroup coarse(grams[i - 1]);
    const TorusGroup fine(grams[i]);
    const IntMatrix& p = chain.maps[i - 1];
    const MeasureFT pushed = pushforward_ft(p, heat_measure_ft(fine, beta));
    StageReport rep;
    rep.stage = i;
    rep.coisometry_residual = coisometry_residual(grams[i - 1], grams[i], p);
    for (int c = 0; c < num_characters; ++c) {
      IntVector xi(p.rows());
      for (Index k = 0; k < xi.size(); ++k) xi(k) = entry(rng);
      const double lhs = heat_fourier(coarse, beta, xi);
      const double rhs = pushed(xi).real();
      rep.ft_residual = std::max(rep.ft_residual, std::abs(lhs - rhs));
      const IntVector pulled = p.transpose() * xi;
      rep.dual_norm_residual =
          std::max(rep.dual_norm_residual, std::abs(coarse.dual_norm_sq(xi) - fine.dual_norm_sq(pulled)));
    }
    out.push_back(rep);
  }
  return out;
}

inline double max_ft_residual(const std::vector<StageReport>& reports) {
  double m = 0.0;
  for (const auto& r : reports) m = std::max(m, r.ft_residual);
  return m;
}

/// Operator norm of `map` restricted to the column span of `source_span`,
/// with the source and target inner products scale_source * Euclid and
/// scale_target * Euclid. Zero for a zero map or an empty span.
inline double restricted_operator_norm(const Matrix& map, const Matrix& source_span, double scale_source,
                                       double scale_target) {
  const Matrix q = orthonormal_column_basis(source_span);
  if (q.cols() == 0 || map.rows() == 0) return 0.0;
  const Matrix restricted = map * q;
  if (max_abs(restricted) == 0.0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(restricted);
  return svd.singularValues()(0) * std::sqrt(scale_target / scale_source);
}

/// Operator norm of the factor-2 subdivision map on image spaces,
/// (Im d1 fine, h_f^{d-4} Euclid) -> (Im d1 coarse, h_c^{d-4} Euclid), with
/// h_c = 1 and h_f = 1/2.
inline double subdivision_contraction_check(const Box& coarse) {
  const int d = coarse.dim();
  if (d < 2) throw DomainError("subdivision_contraction_check: need d >= 2");
  const Matrix s = to_real(subdivision_matrix(coarse, 2));
  const Matrix fine_image = to_real(coboundary_matrix(coarse.subdivided(), 1));
  return restricted_operator_norm(s, fine_image, std::pow(0.5, d - 4), 1.0);
}

}  // namespace villain
