#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace gue::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]. Nodes come out ascending.
inline Rule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: need at least one node");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n(z) and its derivative
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Affine map of a [-1, 1] rule onto [a, b]. Weights carry the sign of b - a.
inline Rule map_to_interval(const Rule& ref, double a, double b) {
  Rule out = ref;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
    out.nodes[i] = mid + half * ref.nodes[i];
    out.weights[i] = half * ref.weights[i];
  }
  return out;
}

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
template <class F>
double composite(F&& f, double a, double b, std::size_t panels, std::size_t order = 20) {
  const Rule ref = gauss_legendre(order);
  const double width = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + width * static_cast<double>(k);
    const Rule r = map_to_interval(ref, lo, lo + width);
    for (std::size_t i = 0; i < order; ++i) total += r.weights[i] * f(r.nodes[i]);
  }
  return total;
}

namespace detail {

template <class F>
double adaptive_step(F& f, const Rule& ref, double a, double b, double whole, double tol,
                     int depth) {
  const double mid = 0.5 * (a + b);
  auto panel = [&](double lo, double hi) {
    const Rule r = map_to_interval(ref, lo, hi);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
  };
  const double left = panel(a, mid);
  const double right = panel(mid, b);
  if (depth <= 0 || std::abs(left + right - whole) <= tol) return left + right;
  return adaptive_step(f, ref, a, mid, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, ref, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive bisection on 15-point Gauss-Legendre panels until the split
/// estimate agrees with the unsplit one to `tol`.
template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-13, int max_depth = 40) {
  const Rule ref = gauss_legendre(15);
  const Rule r = map_to_interval(ref, a, b);
  double whole = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) whole += r.weights[i] * f(r.nodes[i]);
  return detail::adaptive_step(f, ref, a, b, whole, tol, max_depth);
}

}  // namespace gue::quadrature
