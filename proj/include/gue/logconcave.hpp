#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gue/quadrature.hpp"

namespace gue::logconcave {

/// Observations of one scalar random variable. When `blocks` is non-empty it
/// runs parallel to `values` and labels correlated groups (e.g. all gaps of
/// one matrix); standard errors are then cluster-robust over those groups.
struct EmpiricalSample {
  std::vector<double> values;
  std::vector<std::uint64_t> blocks;
  std::string provenance;
};

inline void validate(const EmpiricalSample& s, std::size_t min_size = 1) {
  if (s.values.size() < min_size)
    throw std::invalid_argument("sample too small: need at least " + std::to_string(min_size) +
                                " observations, got " + std::to_string(s.values.size()));
  if (!s.blocks.empty() && s.blocks.size() != s.values.size())
    throw std::invalid_argument("sample block labels must parallel the values");
  for (double v : s.values)
    if (!std::isfinite(v)) throw std::invalid_argument("sample contains a non-finite value");
}

enum class Verdict { holds, holds_within_noise, violated };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_within_noise: return "holds_within_noise";
    case Verdict::violated: return "violated";
  }
  return "violated";
}

/// `upper`: the bound caps the empirical value from above. `lower`: from below.
enum class Direction { upper, lower };

inline constexpr double kNoiseSigmas = 3.0;

struct BoundReport {
  std::string bound_name;
  double param = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  double mc_stderr = 0.0;
  Direction direction = Direction::upper;
  Verdict verdict = Verdict::holds;

  bool passes() const noexcept { return verdict != Verdict::violated; }
};

inline Verdict judge(double empirical, double bound, double se, Direction dir) {
  const double excess = dir == Direction::upper ? empirical - bound : bound - empirical;
  if (excess <= 0.0) return Verdict::holds;
  if (excess <= kNoiseSigmas * se) return Verdict::holds_within_noise;
  return Verdict::violated;
}

inline BoundReport make_report(std::string name, double param, double empirical, double bound,
                               double se, Direction dir = Direction::upper) {
  BoundReport r{std::move(name), param, empirical, bound, se, dir, Verdict::holds};
  r.verdict = judge(empirical, bound, se, dir);
  return r;
}

/// Mean of y and its Monte Carlo standard error. With block labels the
/// error is the cluster-robust (sandwich) estimate over blocks, otherwise
/// the i.i.d. one.
struct MeanEstimate {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};

inline MeanEstimate estimate_mean(std::span<const double> y,
                                  std::span<const std::uint64_t> blocks = {}) {
  const auto n = static_cast<double>(y.size());
  if (y.empty()) return {};
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;

  if (!blocks.empty()) {
    std::map<std::uint64_t, double> resid;
    for (std::size_t i = 0; i < y.size(); ++i) resid[blocks[i]] += y[i] - mean;
    const auto groups = static_cast<double>(resid.size());
    if (groups >= 2.0) {
      double ss = 0.0;
      for (const auto& [_, r] : resid) ss += r * r;
      return {mean, std::sqrt(groups / (groups - 1.0) * ss) / n};
    }
  }
  if (y.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

inline double sample_mean(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

/// Values divided by their sample mean (the expectation-normalised variable).
inline std::vector<double> mean_normalised(const EmpiricalSample& s) {
  validate(s);
  const double mean = sample_mean(s.values);
  if (!(mean > 0.0)) throw std::invalid_argument("mean normalisation needs a positive mean");
  std::vector<double> out(s.values);
  for (double& v : out) v /= mean;
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms and the convex-order integrals

/// P(X >= h) <= e^{1-h} for unit-mean log-concave X >= 0.
inline double exp_upper_tail_bound(double h) { return std::exp(1.0 - h); }

/// P(X <= h) <= 2h.
inline double lower_tail_bound(double h) { return 2.0 * h; }

/// E[X^p] <= p! (Gamma(p+1) for non-integer p).
inline double moment_bound(double p) { return std::tgamma(p + 1.0); }

inline double gruenbaum_bound() { return std::exp(-1.0); }

/// P(|X| > t) <= e^{1-t} for log-concave X with E[X^2] <= 1.
inline double lv_tail_bound(double t) { return std::exp(1.0 - t); }

/**
 * Integral of (x - (h-1)) e^{-x} over [h-1, h+60] by adaptive quadrature.
 * The closed form of the untruncated integral is e^{1-h}; this is the
 * expectation of the call-option payoff that dominates 1{x >= h}.
 */
inline double call_option_integral(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("call_option_integral: h must be positive");
  const double strike = h - 1.0;
  return quadrature::adaptive(
      [strike](double x) { return (x - strike) * std::exp(-x); }, strike, h + 60.0, 1e-14);
}

/// (1/h) * integral_0^{2h} (2h - x) e^{-x} dx = (2h - 1 + e^{-2h}) / h.
inline double put_option_integral(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("put_option_integral: h must be positive");
  const double y = 2.0 * h;
  double numer;
  if (y < 0.1) {
    // e^{-y} - 1 + y = sum_{k>=2} (-y)^k / k!, cancellation-free
    numer = 0.0;
    double term = y * y / 2.0;
    for (int k = 2; k < 30 && term != 0.0; ++k) {
      numer += term;
      term *= -y / (k + 1.0);
    }
  } else {
    numer = std::expm1(-y) + y;
  }
  return numer / h;
}

// ---------------------------------------------------------------------------
// Empirical certificates. Samples are mean-normalised first.

inline std::vector<BoundReport> verify_upper_tail(const EmpiricalSample& s,
                                                  std::span<const double> h_grid) {
  const auto x = mean_normalised(s);
  std::vector<BoundReport> out;
  std::vector<double> ind(x.size());
  for (double h : h_grid) {
    for (std::size_t i = 0; i < x.size(); ++i) ind[i] = x[i] >= h ? 1.0 : 0.0;
    const auto est = estimate_mean(ind, s.blocks);
    out.push_back(make_report("upper_tail", h, est.mean,
                              std::min(1.0, exp_upper_tail_bound(h)), est.stderr_of_mean));
  }
  return out;
}

inline std::vector<BoundReport> verify_lower_tail(const EmpiricalSample& s,
                                                  std::span<const double> h_grid) {
  const auto x = mean_normalised(s);
  std::vector<BoundReport> out;
  std::vector<double> ind(x.size());
  for (double h : h_grid) {
    for (std::size_t i = 0; i < x.size(); ++i) ind[i] = x[i] <= h ? 1.0 : 0.0;
    const auto est = estimate_mean(ind, s.blocks);
    out.push_back(make_report("lower_tail", h, est.mean, std::min(1.0, lower_tail_bound(h)),
                              est.stderr_of_mean));
  }
  return out;
}

inline std::vector<BoundReport> verify_moments(const EmpiricalSample& s,
                                               std::span<const double> p_list) {
  const auto x = mean_normalised(s);
  std::vector<BoundReport> out;
  std::vector<double> pw(x.size());
  for (double p : p_list) {
    if (!(p >= 1.0)) throw std::invalid_argument("verify_moments: p must be >= 1");
    for (std::size_t i = 0; i < x.size(); ++i) pw[i] = std::pow(x[i], p);
    const auto est = estimate_mean(pw, s.blocks);
    out.push_back(make_report("moment", p, est.mean, moment_bound(p), est.stderr_of_mean));
  }
  return out;
}

/// P(X >= E X) >= 1/e, checked as a lower bound.
inline BoundReport verify_gruenbaum(const EmpiricalSample& s) {
  const auto x = mean_normalised(s);
  std::vector<double> ind(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ind[i] = x[i] >= 1.0 ? 1.0 : 0.0;
  const auto est = estimate_mean(ind, s.blocks);
  return make_report("gruenbaum", 1.0, est.mean, gruenbaum_bound(), est.stderr_of_mean,
                     Direction::lower);
}

/// Scales the (already centred) sample to unit root-mean-square, then checks
/// P(|X| > t) against e^{1-t}.
inline std::vector<BoundReport> verify_lv_tail(const EmpiricalSample& s,
                                               std::span<const double> t_grid,
                                               const std::string& name = "lv_tail") {
  validate(s);
  double ms = 0.0;
  for (double v : s.values) ms += v * v;
  const double rms = std::sqrt(ms / static_cast<double>(s.values.size()));
  if (!(rms > 0.0)) throw std::invalid_argument("verify_lv_tail: sample is identically zero");
  std::vector<BoundReport> out;
  std::vector<double> ind(s.values.size());
  for (double t : t_grid) {
    for (std::size_t i = 0; i < ind.size(); ++i)
      ind[i] = std::abs(s.values[i] / rms) > t ? 1.0 : 0.0;
    const auto est = estimate_mean(ind, s.blocks);
    out.push_back(
        make_report(name, t, est.mean, std::min(1.0, lv_tail_bound(t)), est.stderr_of_mean));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histogram log-concavity diagnostic

inline constexpr std::size_t kDiagnosticMinSample = 10000;
inline constexpr double kDiagnosticMinCount = 25.0;
inline constexpr std::size_t kDiagnosticMinBins = 5;

struct CurvatureViolation {
  double center = 0.0;  // centre of the middle bin
  double second_difference = 0.0;
  double noise = 0.0;
};

struct LogConcavityReport {
  bool consistent = true;
  double bin_width = 0.0;
  std::size_t total_bins = 0;
  std::size_t qualifying_bins = 0;
  std::size_t checks = 0;
  double max_standardized = -INFINITY;  // largest second_difference / noise seen
  std::vector<CurvatureViolation> violations;
};

/// Type-7 sample quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

/**
 * Freedman-Diaconis histogram, then second differences of log-counts over
 * the bins holding at least 25 observations. Qualifying bins need not be
 * adjacent: for bin positions k1 < k2 < k3 the difference of slopes
 *
 *   D = (L3 - L2) / (k3 - k2) - (L2 - L1) / (k2 - k1)
 *
 * is used, which is L1 - 2 L2 + L3 on adjacent bins. Its Poisson noise is
 * propagated from Var(log c) ~ 1/c. A log-concave law has D <= 0; the sample
 * is flagged when any D exceeds 3 noise units.
 */
inline LogConcavityReport logconcavity_diagnostic(const EmpiricalSample& s) {
  validate(s, kDiagnosticMinSample);
  std::vector<double> sorted(s.values);
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  if (!(iqr > 0.0)) throw std::invalid_argument("logconcavity_diagnostic: zero interquartile range");

  LogConcavityReport rep;
  rep.bin_width = 2.0 * iqr / std::cbrt(n);
  const double lo = sorted.front();
  rep.total_bins =
      static_cast<std::size_t>(std::floor((sorted.back() - lo) / rep.bin_width)) + 1;
  std::vector<double> counts(rep.total_bins, 0.0);
  for (double v : sorted) {
    auto k = static_cast<std::size_t>(std::floor((v - lo) / rep.bin_width));
    counts[std::min(k, rep.total_bins - 1)] += 1.0;
  }

  std::vector<std::size_t> q;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] >= kDiagnosticMinCount) q.push_back(k);
  rep.qualifying_bins = q.size();
  if (q.size() < kDiagnosticMinBins)
    throw std::invalid_argument("logconcavity_diagnostic: fewer than 5 bins with >= 25 counts");

  for (std::size_t a = 0; a + 2 < q.size(); ++a) {
    const double c1 = counts[q[a]], c2 = counts[q[a + 1]], c3 = counts[q[a + 2]];
    const auto d1 = static_cast<double>(q[a + 1] - q[a]);
    const auto d2 = static_cast<double>(q[a + 2] - q[a + 1]);
    const double diff =
        (std::log(c3) - std::log(c2)) / d2 - (std::log(c2) - std::log(c1)) / d1;
    const double mid = 1.0 / d1 + 1.0 / d2;
    const double noise =
        std::sqrt(1.0 / (c1 * d1 * d1) + mid * mid / c2 + 1.0 / (c3 * d2 * d2));
    ++rep.checks;
    rep.max_standardized = std::max(rep.max_standardized, diff / noise);
    if (diff > kNoiseSigmas * noise) {
      const double center = lo + (static_cast<double>(q[a + 1]) + 0.5) * rep.bin_width;
      rep.violations.push_back({center, diff, noise});
    }
  }
  rep.consistent = rep.violations.empty();
  return rep;
}

}  // namespace gue::logconcave
