#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "gue/eigensolver.hpp"
#include "gue/quadrature.hpp"

namespace gue::gaudin_mehta {

inline constexpr std::size_t kDefaultNodes = 40;
inline constexpr double kConvergenceTolerance = 1e-9;
inline constexpr double kDensityFloor = -1e-9;

/// Sine kernel at unit mean spacing: sin(pi (x-y)) / (pi (x-y)), 1 on the diagonal.
inline double sine_kernel(double x, double y) noexcept {
  const double u = std::numbers::pi * (x - y);
  if (std::abs(x - y) < 1e-6) {
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  }
  return std::sin(u) / u;
}

namespace detail {

/// det of a symmetric matrix, row-major, destroyed in place. Cholesky when
/// the matrix is positive definite, partial-pivot LU otherwise.
inline double symmetric_determinant(std::vector<double>& a, std::size_t n) {
  std::vector<double> work(a);
  double logdet = 0.0;
  bool spd = true;
  for (std::size_t j = 0; j < n && spd; ++j) {
    double d = work[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= work[j * n + k] * work[j * n + k];
    if (!(d > 0.0)) {
      spd = false;
      break;
    }
    const double ljj = std::sqrt(d);
    work[j * n + j] = ljj;
    logdet += 2.0 * std::log(ljj);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = work[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= work[i * n + k] * work[j * n + k];
      work[i * n + j] = v / ljj;
    }
  }
  if (spd) return std::exp(logdet);

  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    det *= a[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

}  // namespace detail

/**
 * Nystrom approximation of E(s) = det(I - K_sine) on L^2[0, s] with an
 * n-point Gauss-Legendre rule:
 *
 *   A_ij = delta_ij - sqrt(w_i) K(x_i, x_j) sqrt(w_j).
 *
 * For s < 0 the rule runs backwards and carries negative weights; the
 * symmetric form then becomes delta_ij + sqrt|w_i| K sqrt|w_j|, which is the
 * analytic continuation of E used by the centred difference stencils at s ~ 0.
 */
inline double fredholm_determinant(double s, std::size_t nodes) {
  if (s == 0.0) return 1.0;
  const quadrature::Rule rule =
      quadrature::map_to_interval(quadrature::gauss_legendre(nodes), 0.0, s);
  const double sign = s > 0.0 ? -1.0 : 1.0;
  std::vector<double> root_w(nodes);
  for (std::size_t i = 0; i < nodes; ++i) root_w[i] = std::sqrt(std::abs(rule.weights[i]));
  std::vector<double> a(nodes * nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = 0; j < nodes; ++j)
      a[i * nodes + j] = (i == j ? 1.0 : 0.0) +
                         sign * root_w[i] * sine_kernel(rule.nodes[i], rule.nodes[j]) * root_w[j];
  return detail::symmetric_determinant(a, nodes);
}

struct FredholmEvaluation {
  double s = 0.0;
  std::size_t nodes = 0;
  double e_value = 1.0;
  double e_prime = -1.0;
  double e_second = 0.0;
  double doubling_delta = 0.0;  // |E_{2n}(s) - E_n(s)|
  bool converged = true;
};

/**
 * E(s) with its first two derivatives. Derivatives are centred differences
 * at steps h and h/2, h = max(1e-3, 1e-3 s), combined by one Richardson
 * step. Convergence is judged by re-evaluating E with twice the nodes.
 */
inline FredholmEvaluation fredholm_E(double s, std::size_t nodes = kDefaultNodes,
                                     double tolerance = kConvergenceTolerance) {
  if (!(s >= 0.0)) throw std::invalid_argument("fredholm_E: s must be >= 0");
  if (nodes < 5) throw std::invalid_argument("fredholm_E: need at least 5 nodes");

  FredholmEvaluation out;
  out.s = s;
  out.nodes = nodes;
  if (s == 0.0) return out;  // empty domain: E = 1, E' = -1, E'' = 0 exactly

  auto e = [nodes](double x) { return fredholm_determinant(x, nodes); };
  const double h = std::max(1e-3, 1e-3 * s);
  const double e0 = e(s);
  const double ep1 = e(s + h), em1 = e(s - h);
  const double ep2 = e(s + 0.5 * h), em2 = e(s - 0.5 * h);

  const double d1_h = (ep1 - em1) / (2.0 * h);
  const double d1_h2 = (ep2 - em2) / h;
  const double d2_h = (ep1 - 2.0 * e0 + em1) / (h * h);
  const double d2_h2 = (ep2 - 2.0 * e0 + em2) / (0.25 * h * h);

  out.e_value = e0;
  out.e_prime = (4.0 * d1_h2 - d1_h) / 3.0;
  out.e_second = (4.0 * d2_h2 - d2_h) / 3.0;
  out.doubling_delta = std::abs(fredholm_determinant(s, 2 * nodes) - e0);
  out.converged = out.doubling_delta < tolerance;
  return out;
}

inline const FredholmEvaluation& require_converged(const FredholmEvaluation& ev) {
  if (!ev.converged)
    throw ConvergenceError("Fredholm determinant not converged at s = " + std::to_string(ev.s) +
                           " with " + std::to_string(ev.nodes) + " nodes (doubling delta " +
                           std::to_string(ev.doubling_delta) + ")");
  return ev;
}

/// Thrown when E'' dips below the numerical floor; that means the
/// discretisation is broken, not that the density is negative.
class NegativeDensityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double density_from(const FredholmEvaluation& ev) {
  if (ev.e_second < kDensityFloor)
    throw NegativeDensityError("Gaudin-Mehta density " + std::to_string(ev.e_second) +
                               " below floor at s = " + std::to_string(ev.s));
  return std::max(ev.e_second, 0.0);
}

inline double cdf_from(const FredholmEvaluation& ev) {
  return std::clamp(1.0 + ev.e_prime, 0.0, 1.0);
}

/// Gap density p(s) = E''(s).
inline double gap_density(double s, std::size_t nodes = kDefaultNodes) {
  return density_from(require_converged(fredholm_E(s, nodes)));
}

/// Gap distribution function F(s) = 1 + E'(s).
inline double gap_cdf(double s, std::size_t nodes = kDefaultNodes) {
  return cdf_from(require_converged(fredholm_E(s, nodes)));
}

/// Mean of the law: integral_0^L s p(s) ds plus the tail E(L) - L E'(L)
/// (integration by parts of s E'' beyond L, where E and E' vanish at infinity).
inline double gm_mean(double upper = 10.0, std::size_t nodes = kDefaultNodes) {
  const double body = quadrature::composite(
      [nodes](double s) { return s * gap_density(s, nodes); }, 0.0, upper, 10, 16);
  const auto end = require_converged(fredholm_E(upper, nodes));
  return body + end.e_value - upper * end.e_prime;
}

/// Tabulated distribution function for repeated lookups and inverse-CDF
/// sampling. Linear interpolation between grid points; 1 beyond the grid.
class GapLawTable {
 public:
  GapLawTable(double s_max, std::size_t points, std::size_t nodes = kDefaultNodes)
      : s_max_(s_max) {
    if (points < 2 || !(s_max > 0.0)) throw std::invalid_argument("GapLawTable: bad grid");
    grid_.resize(points);
    cdf_.resize(points);
    for (std::size_t k = 0; k < points; ++k) {
      grid_[k] = s_max * static_cast<double>(k) / static_cast<double>(points - 1);
      cdf_[k] = gap_cdf(grid_[k], nodes);
    }
    // enforce monotone table so inversion is well defined
    for (std::size_t k = 1; k < points; ++k) cdf_[k] = std::max(cdf_[k], cdf_[k - 1]);
  }

  double cdf(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= s_max_) return 1.0;
    const double pos = s / s_max_ * static_cast<double>(grid_.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return cdf_[k] + frac * (cdf_[k + 1] - cdf_[k]);
  }

  double inverse_cdf(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= cdf_.back()) return s_max_;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto k = static_cast<std::size_t>(it - cdf_.begin());
    const double f0 = cdf_[k - 1], f1 = cdf_[k];
    const double frac = f1 > f0 ? (u - f0) / (f1 - f0) : 0.0;
    return grid_[k - 1] + frac * (grid_[k] - grid_[k - 1]);
  }

 private:
  double s_max_;
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

}  // namespace gue::gaudin_mehta
