#pragma once

// Tori g / Lambda in lattice coordinates (points are vectors mod 1, characters
// are integer vectors, chi_xi(x) = exp(2 pi i xi.x)), their heat kernels and
// heat-kernel measures, and Fourier-transform pushforwards along integer
// homomorphisms.

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <random>

#include "villain/linalg.hpp"

namespace villain {

/// Torus R^n / Z^n with an inner product on R^n given by `gram` (in lattice
/// coordinates). Immutable; the dual Gram is computed once.
class TorusGroup {
 public:
  explicit TorusGroup(Matrix gram) : gram_(std::move(gram)) {
    require_spd(gram_, "TorusGroup");
    dual_gram_ = spd_inverse(gram_, "TorusGroup");
    if (dim() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(dual_gram_, Eigen::EigenvaluesOnly);
      dual_min_eig_ = es.eigenvalues().minCoeff();
      Eigen::LLT<Matrix> llt(dual_gram_);
      dual_chol_ = llt.matrixL();
    }
  }

  static TorusGroup euclidean(int n) { return TorusGroup(Matrix::Identity(n, n)); }

  int dim() const { return static_cast<int>(gram_.rows()); }
  const Matrix& gram() const { return gram_; }
  /// gram^{-1}: the induced inner product on characters.
  const Matrix& dual_gram() const { return dual_gram_; }
  /// Smallest eigenvalue of gram^{-1}.
  double dual_min_eigenvalue() const { return dual_min_eig_; }
  /// Lower Cholesky factor of gram^{-1}.
  const Matrix& dual_cholesky() const { return dual_chol_; }

  /// ||xi||^2 in the dual norm.
  double dual_norm_sq(const Vector& xi) const {
    check(xi.size());
    return xi.dot(dual_gram_ * xi);
  }
  double dual_norm_sq(const IntVector& xi) const { return dual_norm_sq(Vector(xi.cast<double>())); }

  void check(Index n) const {
    if (n != dim()) throw DomainError("torus: character/point has wrong dimension");
  }

 private:
  Matrix gram_;
  Matrix dual_gram_;
  Matrix dual_chol_;
  double dual_min_eig_ = 0.0;
};

inline void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
}

/// Fourier coefficient exp(-4 pi^2 beta ||xi||^2_*) of the heat kernel.
inline double heat_fourier(const TorusGroup& t, double beta, const IntVector& xi) {
  require_positive_beta(beta);
  return std::exp(-kFourPiSq * beta * t.dual_norm_sq(xi));
}

/// Upper bound for sum over integer xi with |xi|_2 > radius of
/// exp(-4 pi^2 beta ||xi||^2_*). Each lattice point is compared with its unit
/// cell, which lies within sqrt(n)/2 of it, giving a radial Gaussian integral
/// evaluated through incomplete gamma functions.
inline double heat_tail_bound(const TorusGroup& t, double beta, double radius) {
  require_positive_beta(beta);
  const int n = t.dim();
  if (n == 0) return 0.0;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double lower = radius - sqrt_n;
  if (lower <= 0.0) return std::numeric_limits<double>::infinity();
  const double a = kFourPiSq * beta * t.dual_min_eigenvalue();
  // surface area of the unit sphere in R^n
  const double area = 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
  // integral_{lower}^inf (s + sqrt n)^{n-1} exp(-a s^2) ds, expanded binomially
  double integral = 0.0;
  for (int j = 0; j <= n - 1; ++j) {
    const double coef = boost::math::binomial_coefficient<double>(n - 1, j) * std::pow(sqrt_n, n - 1 - j);
    const double h = 0.5 * (j + 1);
    const double piece = 0.5 * std::pow(a, -h) * boost::math::tgamma(h, a * lower * lower);
    integral += coef * piece;
  }
  return area * integral;
}

/// Smallest integer radius whose tail bound is below tol.
inline double heat_series_cutoff(const TorusGroup& t, double beta, double tol = 1e-12) {
  require_positive_beta(beta);
  if (t.dim() == 0) return 0.0;
  double r = std::ceil(std::sqrt(static_cast<double>(t.dim()))) + 1.0;
  while (heat_tail_bound(t, beta, r) >= tol) {
    r += 1.0;
    if (r > 1e4) throw PrecisionError("heat_series_cutoff: radius diverges (beta too small)", heat_tail_bound(t, beta, r));
  }
  return r;
}

namespace detail {

// Visits integer points of the Euclidean ball of radius r that are
// lexicographically positive (first nonzero coordinate > 0).
template <class F>
void visit_half_ball(int n, double r, F&& f) {
  IntVector xi = IntVector::Zero(n);
  std::function<void(int, double, bool)> rec = [&](int i, double rem_sq, bool positive) {
    if (i == n) {
      if (positive) f(xi);
      return;
    }
    const auto bound = static_cast<std::int64_t>(std::floor(std::sqrt(std::max(0.0, rem_sq))));
    const std::int64_t lo = positive ? -bound : 0;
    for (std::int64_t v = lo; v <= bound; ++v) {
      xi(i) = v;
      rec(i + 1, rem_sq - static_cast<double>(v * v), positive || v > 0);
    }
    xi(i) = 0;
  };
  rec(0, r * r, false);
}

}  // namespace detail

/// Heat kernel H_beta(x) as the truncated character series over |xi| <= cutoff,
/// with (xi, -xi) paired so the result is real. Throws PrecisionError carrying
/// the tail bound if the cutoff does not push it below 1e-12.
inline double heat_kernel_eval(const TorusGroup& t, double beta, const Vector& x, double cutoff) {
  require_positive_beta(beta);
  t.check(x.size());
  if (t.dim() == 0) return 1.0;
  const double tail = heat_tail_bound(t, beta, cutoff);
  if (!(tail < 1e-12)) throw PrecisionError("heat_kernel_eval: cutoff too small for the 1e-12 tail budget", tail);
  double sum = 1.0;
  detail::visit_half_ball(t.dim(), cutoff, [&](const IntVector& xi) {
    const double w = std::exp(-kFourPiSq * beta * t.dual_norm_sq(xi));
    sum += 2.0 * w * std::cos(2.0 * kPi * xi.cast<double>().dot(x));
  });
  return sum;
}

inline double heat_kernel_eval(const TorusGroup& t, double beta, const Vector& x) {
  return heat_kernel_eval(t, beta, x, heat_series_cutoff(t, beta));
}

/// Componentwise reduction to [0, 1).
inline Vector mod_one(Vector x) {
  for (Index i = 0; i < x.size(); ++i) {
    x(i) -= std::floor(x(i));
    if (x(i) >= 1.0) x(i) = 0.0;
  }
  return x;
}

/// Draw from the heat-kernel measure: a centred Gaussian with covariance
/// 2 beta gram^{-1}, reduced mod 1.
template <class Rng>
Vector sample_heat(const TorusGroup& t, double beta, Rng& rng) {
  require_positive_beta(beta);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(t.dim());
  for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  if (t.dim() == 0) return z;
  return mod_one(std::sqrt(2.0 * beta) * (t.dual_cholesky() * z));
}

/// Fourier transform of a probability measure on an n-torus, as a function of
/// integer characters: mu^(xi) = integral conj(chi_xi) dmu.
struct MeasureFT {
  int dim = 0;
  std::function<std::complex<double>(const IntVector&)> fn;

  std::complex<double> operator()(const IntVector& xi) const {
    if (xi.size() != dim) throw DomainError("MeasureFT: character has wrong dimension");
    return fn(xi);
  }
};

inline MeasureFT heat_measure_ft(const TorusGroup& t, double beta) {
  require_positive_beta(beta);
  return MeasureFT{t.dim(), [t, beta](const IntVector& xi) { return std::complex<double>(heat_fourier(t, beta, xi), 0.0); }};
}

/// FT of the pushforward of mu along the homomorphism with integer matrix f
/// (codomain_dim x domain_dim): xi -> mu^(f^T xi).
inline MeasureFT pushforward_ft(const IntMatrix& f, const MeasureFT& mu) {
  if (f.cols() != mu.dim) throw DomainError("pushforward_ft: map domain does not match measure dimension");
  IntMatrix ft = f.transpose();
  return MeasureFT{static_cast<int>(f.rows()), [ft, mu](const IntVector& xi) { return mu(IntVector(ft * xi)); }};
}

/// max |gram2^{-1} - f gram1^{-1} f^T|: zero iff the dual of f is an isometry
/// from (Z^{n2}, gram2^{-1}) into (Z^{n1}, gram1^{-1}).
struct IsometryCheck {
  bool is_isometry = false;
  double residual = 0.0;
};

inline IsometryCheck dual_isometry_check(const IntMatrix& f, const Matrix& gram1, const Matrix& gram2, double tol = 1e-10) {
  if (f.cols() != gram1.rows() || f.rows() != gram2.rows())
    throw DomainError("dual_isometry_check: shapes are inconsistent");
  const Matrix fr = f.cast<double>();
  const Matrix diff = spd_inverse(gram2, "dual_isometry_check") - fr * spd_inverse(gram1, "dual_isometry_check") * fr.transpose();
  const double res = max_abs(diff);
  return {res <= tol, res};
}

/// Empirical FT estimate from samples (columns), with standard errors of the
/// real and imaginary parts.
struct EmpiricalFT {
  std::complex<double> mean;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
};

inline EmpiricalFT empirical_ft(const Matrix& samples, const IntVector& xi) {
  const Index n = samples.cols();
  if (n < 2) throw DomainError("empirical_ft: need at least two samples");
  double sr = 0, si = 0, sr2 = 0, si2 = 0;
  const Vector xr = xi.cast<double>();
  for (Index s = 0; s < n; ++s) {
    const double ph = -2.0 * kPi * xr.dot(samples.col(s));
    const double c = std::cos(ph), sn = std::sin(ph);
    sr += c;
    si += sn;
    sr2 += c * c;
    si2 += sn * sn;
  }
  const double nn = static_cast<double>(n);
  const double mr = sr / nn, mi = si / nn;
  const double vr = std::max(0.0, (sr2 - nn * mr * mr) / (nn - 1));
  const double vi = std::max(0.0, (si2 - nn * mi * mi) / (nn - 1));
  return {{mr, mi}, std::sqrt(vr / nn), std::sqrt(vi / nn)};
}

}  // namespace villain
