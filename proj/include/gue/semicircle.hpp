#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gue/eigensolver.hpp"

namespace gue::semicircle {

/// rho_sc(x) = 2 sqrt((1 - x^2)_+) / pi
inline double density(double x) noexcept {
  const double r = 1.0 - x * x;
  return r > 0.0 ? 2.0 * std::sqrt(r) / std::numbers::pi : 0.0;
}

inline double cdf(double x) noexcept {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / std::numbers::pi;
}

inline constexpr double kQuantileTolerance = 1e-12;
inline constexpr int kQuantileMaxSteps = 200;

/**
 * Semicircle quantile gamma_p: the solution of cdf(gamma) = p on (-1, 1).
 *
 * Newton steps are taken while they stay inside the current bracket;
 * otherwise the bracket is bisected. Near the edges the density vanishes
 * and the bisection branch carries the iteration.
 */
inline double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("sc_quantile: p must lie in (0, 1)");
  double lo = -1.0, hi = 1.0;
  double x = std::sin(std::numbers::pi * (p - 0.5));  // crude but monotone start
  for (int step = 0; step < kQuantileMaxSteps; ++step) {
    const double f = cdf(x) - p;
    if (std::abs(f) <= 0.25 * kQuantileTolerance) return x;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double slope = density(x);
    double next = slope > 0.0 ? x - f / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) return x;
    x = next;
  }
  return x;
}

/// Local predicted spacing S(i, N) = sqrt(2/N) / rho_sc(gamma_{i/N}), 1-based i.
inline double gap_scale(std::size_t i, std::size_t big_n) {
  if (big_n < 2 || i < 1 || i > big_n - 1)
    throw std::invalid_argument("gap_scale: index must satisfy 1 <= i <= N-1");
  const double rho = density(quantile(static_cast<double>(i) / static_cast<double>(big_n)));
  if (rho < 1e-8)
    throw std::domain_error("gap_scale: index " + std::to_string(i) +
                            " is too close to the spectral edge");
  return std::sqrt(2.0 / static_cast<double>(big_n)) / rho;
}

/// Bulk index window [ceil(delta N), floor((1 - delta) N)] clipped to [1, N-1].
struct IndexWindow {
  std::size_t lo = 1;
  std::size_t hi = 1;

  std::size_t count() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
};

inline IndexWindow bulk_window(std::size_t big_n, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("delta must be in (0, 0.5)");
  const double n = static_cast<double>(big_n);
  // Guard against delta*N landing a hair above an integer.
  const auto lo = static_cast<std::size_t>(std::ceil(delta * n - 1e-9));
  const auto hi = static_cast<std::size_t>(std::floor((1.0 - delta) * n + 1e-9));
  IndexWindow w{std::max<std::size_t>(lo, 1), std::min(hi, big_n - 1)};
  if (w.hi < w.lo) throw std::invalid_argument("bulk window is empty for this N and delta");
  return w;
}

/// Semicircle-renormalised gaps g_i pooled over indices (and usually matrices).
struct GapObservations {
  std::size_t big_n = 0;
  IndexWindow index_range;
  std::vector<double> values;
  /// Parallel to `values`: which matrix each observation came from.
  std::vector<std::uint64_t> matrix_index;
  std::vector<std::size_t> gap_index;
  std::optional<std::uint64_t> master_seed;
  std::optional<double> delta;
};

/// Precomputed S(i, N) over a window so repeated renormalisation skips the
/// quantile solves.
class GapScaleTable {
 public:
  GapScaleTable(std::size_t big_n, std::size_t i_lo, std::size_t i_hi) : big_n_(big_n), lo_(i_lo) {
    if (i_lo < 1 || i_hi < i_lo || i_hi > big_n - 1)
      throw std::invalid_argument("renormalize_gaps: need 1 <= i_lo <= i_hi <= N-1");
    scales_.reserve(i_hi - i_lo + 1);
    for (std::size_t i = i_lo; i <= i_hi; ++i) scales_.push_back(gap_scale(i, big_n));
  }

  std::size_t big_n() const noexcept { return big_n_; }
  std::size_t lo() const noexcept { return lo_; }
  std::size_t hi() const noexcept { return lo_ + scales_.size() - 1; }
  double operator[](std::size_t i) const { return scales_.at(i - lo_); }

 private:
  std::size_t big_n_;
  std::size_t lo_;
  std::vector<double> scales_;
};

/// Appends g_i = (lambda_{i+1} - lambda_i) / S(i, N) for i in the table's window.
inline void append_gaps(const Spectrum& spectrum, const GapScaleTable& scales,
                        std::uint64_t matrix_index, GapObservations& out) {
  if (spectrum.n != scales.big_n())
    throw std::invalid_argument("renormalize_gaps: spectrum size does not match N");
  for (std::size_t i = scales.lo(); i <= scales.hi(); ++i) {
    out.values.push_back((spectrum.lambda(i + 1) - spectrum.lambda(i)) / scales[i]);
    out.matrix_index.push_back(matrix_index);
    out.gap_index.push_back(i);
  }
}

inline GapObservations renormalize_gaps(const Spectrum& spectrum, std::size_t i_lo,
                                        std::size_t i_hi) {
  const GapScaleTable scales(spectrum.n, i_lo, i_hi);
  GapObservations out;
  out.big_n = spectrum.n;
  out.index_range = {i_lo, i_hi};
  append_gaps(spectrum, scales, 0, out);
  return out;
}

}  // namespace gue::semicircle
