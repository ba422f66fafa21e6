#pragma once

// Connected two-point function of conjugated plaquette Wilson loops for the
// translation-invariant infinite-lattice measure:
//   O(p, q) = exp(-4 pi^2 beta (Pi_pp + Pi_qq)) (exp(-8 pi^2 beta Pi_pq) - 1),
// its decay along a lattice axis, and power-law fits of that decay.

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "villain/multiplier.hpp"
#include "villain/torus.hpp"

namespace villain {

inline double connected_two_point(double beta, double pi_pp, double pi_qq, double pi_pq) {
  return std::exp(-kFourPiSq * beta * (pi_pp + pi_qq)) * std::expm1(-2.0 * kFourPiSq * beta * pi_pq);
}

/// Lower bound for |O| from |exp(-t) - 1| >= |t| / (1 + |t|), t = 8 pi^2 beta Pi_pq.
inline double certified_floor(double beta, double pi_pp, double pi_qq, double pi_pq) {
  const double t = std::abs(2.0 * kFourPiSq * beta * pi_pq);
  return std::exp(-kFourPiSq * beta * (pi_pp + pi_qq)) * t / (1.0 + t);
}

inline double two_point(double beta, const Cell& p, const Cell& q, int grid_n, const GridOptions& opts = {}) {
  require_positive_beta(beta);
  GridOptions diag = opts;
  diag.path = SymbolPath::scalar;
  const double pi_pp = pi_entry(p, p, grid_n, diag);
  const double pi_qq = p.directions == q.directions ? pi_pp : pi_entry(q, q, grid_n, diag);
  const double pi_pq = pi_entry(p, q, grid_n, opts);
  return connected_two_point(beta, pi_pp, pi_qq, pi_pq);
}

struct CorrelationPoint {
  int n = 0;
  double value = 0.0;
  int grid_n = 0;
  double beta = 0.0;
  /// <delta_p, Pi delta_{p+ne}>; absent for synthetic data.
  std::optional<double> cross_term;
  /// <delta_p, Pi delta_p>.
  std::optional<double> diagonal;

  std::optional<double> floor() const {
    if (!cross_term || !diagonal) return std::nullopt;
    return certified_floor(beta, *diagonal, *diagonal, *cross_term);
  }
};

/// O(p, p + n e_axis) for p at the origin in `plane`, all n at once: the grid
/// sum of -F0 is first marginalised onto the `axis` frequency, then each
/// separation is a single cosine transform of that marginal.
inline std::vector<CorrelationPoint> decay_series(int d, double beta, int axis, const std::vector<int>& ns, int grid_n,
                                                  const std::vector<int>& plane = {0, 1}, unsigned threads = 1) {
  require_positive_beta(beta);
  if (d < 2) throw DomainError("decay_series: need d >= 2");
  if (axis < 0 || axis >= d) throw DomainError("decay_series: axis out of range");
  if (plane.size() != 2 || plane[0] < 0 || plane[1] >= d || plane[0] >= plane[1])
    throw DomainError("decay_series: plane must be two increasing axes");
  for (int n : ns) {
    if (n < 0) throw DomainError("decay_series: separations must be non-negative");
    if (8 * n > grid_n)
      throw PrecisionError("decay_series: grid too small for separation (need grid_n >= 8 n)", 8.0 * n);
  }
  if (grid_n < 4) throw DomainError("decay_series: grid_n must be >= 4");

  const int n = grid_n;
  std::vector<double> sin_sq(n);
  for (int k = 0; k < n; ++k) {
    const double h = std::sin(kPi * k / n);
    sin_sq[k] = h * h;
  }
  std::vector<char> in_plane(d, 0);
  in_plane[plane[0]] = in_plane[plane[1]] = 1;

  // marginal[k] = sum over the other axes of -F0, with the axis frequency at k
  std::vector<double> marginal(n, 0.0);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  auto fill = [&](int lo, int hi) {
    std::vector<int> k(d, 0);
    for (int ka = lo; ka < hi; ++ka) {
      double acc = 0.0;
      std::fill(k.begin(), k.end(), 0);
      k[axis] = ka;
      while (true) {
        double num = 0.0, den = 0.0;
        for (int a = 0; a < d; ++a) {
          const double s = sin_sq[k[a]];
          den += s;
          if (!in_plane[a]) num += s;
        }
        if (den > 0.0) acc -= num / den;
        int a = d - 1;
        while (a >= 0 && (a == axis || k[a] == n - 1)) {
          if (a != axis) k[a] = 0;
          --a;
        }
        if (a < 0) break;
        ++k[a];
      }
      marginal[ka] = acc;
    }
  };
  if (workers == 1) {
    fill(0, n);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(fill, static_cast<int>(static_cast<long>(n) * w / workers),
                        static_cast<int>(static_cast<long>(n) * (w + 1) / workers));
    for (auto& t : pool) t.join();
  }

  const double total = std::pow(static_cast<double>(n), d);
  auto entry_at = [&](int sep) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const long long tk = (static_cast<long long>(sep) * k) % n;
      acc += std::cos(2.0 * kPi * static_cast<double>(tk) / n) * marginal[k];
    }
    return (sep % n == 0 ? 1.0 : 0.0) + acc / total;
  };

  const double diag = entry_at(0);
  std::vector<CorrelationPoint> out;
  out.reserve(ns.size());
  for (int sep : ns) {
    CorrelationPoint pt;
    pt.n = sep;
    pt.grid_n = grid_n;
    pt.beta = beta;
    pt.diagonal = diag;
    pt.cross_term = entry_at(sep);
    pt.value = connected_two_point(beta, diag, diag, *pt.cross_term);
    out.push_back(pt);
  }
  return out;
}

struct DecayFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double max_log_residual = 0.0;
  int n_min = 0;
  int n_max = 0;
  std::size_t points_used = 0;
  /// Every point with a cross term satisfied |O| >= certified floor.
  bool floor_ok = true;
};

/// Least-squares line through (log n, log |value|) over points with n > 0 and
/// |value| > 1e-300.
inline DecayFit fit_power_law(const std::vector<CorrelationPoint>& points) {
  std::vector<double> xs, ys;
  DecayFit fit;
  fit.n_min = std::numeric_limits<int>::max();
  fit.n_max = 0;
  for (const auto& pt : points) {
    if (const auto fl = pt.floor(); fl && std::abs(pt.value) < *fl) fit.floor_ok = false;
    if (pt.n <= 0 || !(std::abs(pt.value) > 1e-300)) continue;
    xs.push_back(std::log(static_cast<double>(pt.n)));
    ys.push_back(std::log(std::abs(pt.value)));
    fit.n_min = std::min(fit.n_min, pt.n);
    fit.n_max = std::max(fit.n_max, pt.n);
  }
  if (xs.size() < 4) throw DomainError("fit_power_law: need at least 4 usable points");
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_power_law: separations must not all coincide");
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.max_log_residual = std::max(fit.max_log_residual, std::abs(ys[i] - fit.log_prefactor - fit.exponent * xs[i]));
  fit.points_used = xs.size();
  return fit;
}

struct MarginalEstimate {
  double estimate = 0.0;
  double stderr = 0.0;
  double exact = 0.0;
};

/// Monte Carlo estimate of E[conj W_p conj W_q] - E[conj W_p] E[conj W_q]
/// from the exact joint law of (x_p, x_q): a wrapped Gaussian with covariance
/// 2 beta [[Pi_pp, Pi_pq], [Pi_pq, Pi_qq]].
template <class Rng>
MarginalEstimate marginal_mc_two_point(double beta, const Cell& p, const Cell& q, int grid_n, Index num_samples,
                                       Rng& rng, const GridOptions& opts = {}) {
  require_positive_beta(beta);
  if (num_samples < 2) throw DomainError("marginal_mc_two_point: need at least 2 samples");
  GridOptions diag = opts;
  diag.path = SymbolPath::scalar;
  const double pp = pi_entry(p, p, grid_n, diag);
  const double qq = pi_entry(q, q, grid_n, diag);
  const double pq = pi_entry(p, q, grid_n, opts);
  Eigen::Matrix2d cov;
  cov << pp, pq, pq, qq;
  cov *= 2.0 * beta;
  const double det = cov.determinant();
  const double scale = std::max(cov(0, 0), cov(1, 1));
  if (cov(0, 0) < 0 || cov(1, 1) < 0 || det < -1e-10 * scale * scale)
    throw IntegrityError("marginal_mc_two_point: covariance is not positive semi-definite");
  cov += 1e-12 * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(cov).matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Complex> a(num_samples), b(num_samples);
  Complex ma(0, 0), mb(0, 0);
  for (Index s = 0; s < num_samples; ++s) {
    const Eigen::Vector2d z(normal(rng), normal(rng));
    const Eigen::Vector2d x = l * z;
    a[s] = std::polar(1.0, -2.0 * kPi * x(0));
    b[s] = std::polar(1.0, -2.0 * kPi * x(1));
    ma += a[s];
    mb += b[s];
  }
  const double n = static_cast<double>(num_samples);
  ma /= n;
  mb /= n;
  double su = 0.0, su2 = 0.0;
  for (Index s = 0; s < num_samples; ++s) {
    const double u = ((a[s] - ma) * (b[s] - mb)).real();
    su += u;
    su2 += u * u;
  }
  const double mean_u = su / n;
  const double var_u = std::max(0.0, (su2 - n * mean_u * mean_u) / (n - 1));
  MarginalEstimate out;
  out.estimate = su / (n - 1);
  out.stderr = std::sqrt(var_u / n);
  out.exact = connected_two_point(beta, pp, qq, pq);
  return out;
}

}  // namespace villain
