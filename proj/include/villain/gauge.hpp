#pragma once

// Modified Villain measure on a box: density H^I_beta(d1 c) against Haar
// measure on C^1, represented through the heat-kernel measure on the image
// torus Im d1 and its inverse image under the injective map C^1/C^0 -> Im d1.

#include <complex>
#include <optional>
#include <random>
#include <variant>

#include "villain/complex.hpp"
#include "villain/torus.hpp"

namespace villain {

/// Inner product on the ambient 2-cochains, restricted to Im d1.
struct EuclideanProduct {};
/// h^power times the Euclidean product.
struct ScaledProduct {
  double h = 1.0;
  double power = 0.0;
};
/// Explicit ambient Gram matrix (must be SPD, size = number of 2-cells).
struct ExplicitProduct {
  Matrix gram;
};
using InnerProductSpec = std::variant<EuclideanProduct, ScaledProduct, ExplicitProduct>;

inline Matrix ambient_gram(const InnerProductSpec& spec, Index n) {
  return std::visit(
      [n](const auto& s) -> Matrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EuclideanProduct>) {
          return Matrix::Identity(n, n);
        } else if constexpr (std::is_same_v<T, ScaledProduct>) {
          if (!(s.h > 0.0)) throw DomainError("scaled inner product: h must be positive");
          return std::pow(s.h, s.power) * Matrix::Identity(n, n);
        } else {
          if (s.gram.rows() != n || s.gram.cols() != n) throw DomainError("explicit inner product: wrong size");
          require_spd(s.gram, "explicit inner product");
          return s.gram;
        }
      },
      spec);
}

/// Everything needed to sample and evaluate the measure on one box.
struct GaugeComplexData {
  Box box;
  IntegerMatrix d0, d1, d2;
  std::vector<Cell> edges;
  std::vector<Cell> plaquettes;
  /// Columns: basis of Im d1 cap Z^{#plaquettes} (saturated).
  IntMatrix image_basis;
  /// Ambient Gram on 2-cochains.
  Matrix ambient_gram;
  /// image_basis^T * ambient_gram * image_basis.
  Matrix gram_image;
  TorusGroup image_torus{Matrix(0, 0)};
  Matrix d1_real;
  Matrix basis_real;
  std::shared_ptr<const CellIndex> plaquette_lookup;
  /// Min-norm least-squares solver for d1 c = y.
  std::shared_ptr<const Eigen::CompleteOrthogonalDecomposition<Matrix>> d1_solver;
  /// Solver for image coordinates: image_basis t = y.
  std::shared_ptr<const Eigen::ColPivHouseholderQR<Matrix>> basis_solver;

  Index image_dim() const { return image_basis.cols(); }
  /// Row of p among the plaquettes, -1 if absent.
  Index plaquette_index(const Cell& p) const { return plaquette_lookup->find(p); }
};

inline GaugeComplexData build(const Box& box, const InnerProductSpec& spec = EuclideanProduct{}) {
  if (box.dim() < 2) throw DomainError("gauge build: need dimension >= 2");
  GaugeComplexData g;
  g.box = box;
  g.d0 = coboundary_matrix(box, 0);
  g.d1 = coboundary_matrix(box, 1);
  if (box.dim() >= 3) g.d2 = coboundary_matrix(box, 2);
  else g.d2 = IntegerMatrix(0, g.d1.rows());
  g.edges = enumerate_cells(box, 1);
  g.plaquettes = enumerate_cells(box, 2);
  if (IntMatrix(to_dense(g.d1) * to_dense(g.d0)).cwiseAbs().maxCoeff() != 0)
    throw IntegrityError("gauge build: d1 d0 != 0");
  g.plaquette_lookup = std::make_shared<CellIndex>(g.plaquettes);
  g.image_basis = image_lattice(g.d1);
  g.ambient_gram = ambient_gram(spec, g.d1.rows());
  g.d1_real = to_real(g.d1);
  g.basis_real = to_real(g.image_basis);
  const Matrix& b = g.basis_real;
  g.gram_image = b.transpose() * g.ambient_gram * b;
  g.gram_image = 0.5 * (g.gram_image + g.gram_image.transpose());
  g.image_torus = TorusGroup(g.gram_image);
  g.d1_solver = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(g.d1_real);
  g.basis_solver = std::make_shared<Eigen::ColPivHouseholderQR<Matrix>>(b);
  return g;
}

/// Class of a real 1-cochain mod 1 under c ~ c + d0 c0 + (integer cochain).
struct GaugeClass {
  Vector rep;
};

/// Equality of classes: by injectivity of C^1/C^0 -> Im d1 (trivial H^1),
/// reps are equivalent iff d1 (a - b) is an integer cochain.
inline bool equivalent(const GaugeComplexData& g, const GaugeClass& a, const GaugeClass& b, double tol = 1e-9) {
  const Vector y = g.d1_real * (a.rep - b.rep);
  for (Index i = 0; i < y.size(); ++i)
    if (std::abs(y(i) - std::round(y(i))) > tol) return false;
  return true;
}

/// Evaluation at p as a character of the image torus.
struct WilsonCharacter {
  IntVector character;
  double dual_norm_sq = 0.0;
};

inline WilsonCharacter wilson_character(const GaugeComplexData& g, const Cell& p) {
  if (p.dim() != 2 || !g.box.contains(p)) throw DomainError("wilson_character: p is not a 2-cell of the box");
  const Index row = g.plaquette_index(p);
  if (row < 0) throw DomainError("wilson_character: p is not a 2-cell of the box");
  IntVector v = g.image_basis.row(row).transpose();
  if (p.orientation < 0) v = -v;
  return {v, g.image_torus.dual_norm_sq(v)};
}

/// E[conj W_p] in closed form: the heat Fourier coefficient at the Wilson character.
inline double exact_wilson_expectation(const GaugeComplexData& g, double beta, const Cell& p) {
  return heat_fourier(g.image_torus, beta, wilson_character(g, p).character);
}

/// Draw x from the image-torus heat measure and lift it to the min-norm
/// 1-cochain c with d1 c = image_basis x.
template <class Rng>
GaugeClass sample_gauge_class(const GaugeComplexData& g, double beta, Rng& rng) {
  const Vector x = sample_heat(g.image_torus, beta, rng);
  const Vector y = g.basis_real * x;
  Vector c = g.d1_solver->solve(y);
  const double res = max_abs(Vector(g.d1_real * c - y));
  if (res > 1e-9) throw IntegrityError("sample_gauge_class: lift residual " + std::to_string(res));
  return {mod_one(c)};
}

/// Plaquette values (d1 rep) of a class, as reals (not reduced).
inline Vector field_strength(const GaugeComplexData& g, const GaugeClass& c) { return g.d1_real * c.rep; }

struct McEstimate {
  std::complex<double> mean;
  double stderr = 0.0;       ///< standard error of the real part
  double stderr_imag = 0.0;  ///< standard error of the imaginary part
};

/// Monte Carlo estimate of E[conj W_p] = E[exp(-2 pi i (d1 c)(p))].
template <class Rng>
McEstimate mc_wilson(const GaugeComplexData& g, double beta, const Cell& p, Index num_samples, Rng& rng) {
  if (num_samples < 100) throw DomainError("mc_wilson: need at least 100 samples");
  if (p.dim() != 2 || !g.box.contains(p)) throw DomainError("mc_wilson: p is not a 2-cell of the box");
  const Index row = g.plaquette_index(p);
  const Vector d1_row = g.d1_real.row(row).transpose();
  double sr = 0, si = 0, sr2 = 0, si2 = 0;
  for (Index s = 0; s < num_samples; ++s) {
    const GaugeClass c = sample_gauge_class(g, beta, rng);
    const double ph = -2.0 * kPi * p.orientation * d1_row.dot(c.rep);
    const double re = std::cos(ph), im = std::sin(ph);
    sr += re;
    si += im;
    sr2 += re * re;
    si2 += im * im;
  }
  const double n = static_cast<double>(num_samples);
  const double mr = sr / n, mi = si / n;
  const double vr = std::max(0.0, (sr2 - n * mr * mr) / (n - 1));
  const double vi = std::max(0.0, (si2 - n * mi * mi) / (n - 1));
  return {{mr, mi}, std::sqrt(vr / n), std::sqrt(vi / n)};
}

/// Image-torus coordinates t (mod 1) with image_basis t = d1 c.
inline Vector image_coordinates(const GaugeComplexData& g, const Vector& c) {
  const Vector y = g.d1_real * c;
  const Vector t = g.basis_solver->solve(y);
  return mod_one(t);
}

/// H^I_beta(d1 c); gauge invariant, normalized so its Haar integral is 1.
inline double density_unnormalized(const GaugeComplexData& g, double beta, const Vector& c) {
  if (c.size() != g.d1.cols()) throw DomainError("density_unnormalized: cochain has wrong length");
  return heat_kernel_eval(g.image_torus, beta, image_coordinates(g, c));
}

}  // namespace villain
