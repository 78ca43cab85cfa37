#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gue/eigensolver.hpp"
#include "gue/gaudin_mehta.hpp"
#include "gue/logconcave.hpp"
#include "gue/parallel.hpp"
#include "gue/sampler.hpp"
#include "gue/semicircle.hpp"

namespace gue::experiments {

/// A configuration problem, tagged with the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::size_t n = 0;
  std::size_t num_matrices = 0;
  double delta = 0.3;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> m_list{2, 8, 32};
  std::vector<double> h_grid{0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> t_grid{1.0, 2.0, 3.0};
  std::vector<double> p_list{2.0, 3.0, 4.0};
  std::string out_dir = "results";
  // Minor-process run; 0 picks min(n, 50) and min(num_matrices, 100).
  std::size_t gt_n = 0;
  std::size_t gt_matrices = 0;

  semicircle::IndexWindow window() const { return semicircle::bulk_window(n, delta); }
  std::size_t effective_gt_n() const { return gt_n ? gt_n : std::min<std::size_t>(n, 50); }
  std::size_t effective_gt_matrices() const {
    return gt_matrices ? gt_matrices : std::min<std::size_t>(num_matrices, 100);
  }

  void validate() const {
    if (n < 2) throw ConfigError("n", "must be at least 2");
    if (num_matrices < 1) throw ConfigError("num_matrices", "must be at least 1");
    if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta", "delta must be in (0, 0.5)");
    semicircle::IndexWindow w;
    try {
      w = window();
    } catch (const std::invalid_argument&) {
      throw ConfigError("delta", "bulk window [delta N, (1 - delta) N] is empty");
    }
    for (std::size_t m : m_list)
      if (m < 1 || m > w.count())
        throw ConfigError("m_list", "window size " + std::to_string(m) +
                                        " must lie in [1, " + std::to_string(w.count()) + "]");
    for (double h : h_grid)
      if (!(h > 0.0)) throw ConfigError("h_grid", "entries must be positive");
    for (double t : t_grid)
      if (!(t > 0.0)) throw ConfigError("t_grid", "entries must be positive");
    for (double p : p_list)
      if (!(p >= 1.0)) throw ConfigError("p_list", "entries must be >= 1");
    if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
    if (effective_gt_n() < 2) throw ConfigError("gt_n", "must be at least 2");
  }
};

// ---------------------------------------------------------------------------
// Interlacing

struct InterlacingCheck {
  std::size_t checks = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;  // largest amount by which an inequality fails
  std::vector<std::size_t> violating_j;  // 1-based
};

/// Checks outer_j <= inner_j <= outer_{j+1} for the k eigenvalues of a
/// k-by-k minor inside the (k+1)-by-(k+1) outer spectrum.
inline InterlacingCheck check_interlacing(const Spectrum& outer, const Spectrum& inner,
                                          double tolerance) {
  if (outer.n != inner.n + 1)
    throw std::invalid_argument("check_interlacing: minor must be one size smaller");
  InterlacingCheck out;
  for (std::size_t j = 1; j <= inner.n; ++j) {
    const double below = outer.lambda(j) - inner.lambda(j);
    const double above = inner.lambda(j) - outer.lambda(j + 1);
    const double excess = std::max(below, above);
    out.checks += 2;
    out.max_excess = std::max(out.max_excess, excess);
    if (excess > tolerance) {
      ++out.violations;
      out.violating_j.push_back(j);
    }
  }
  return out;
}

inline double spectral_radius(const Spectrum& s) {
  return std::max(std::abs(s.values.front()), std::abs(s.values.back()));
}

inline constexpr double kMinorInterlacingTolerance = 1e-9;
inline constexpr double kGtInterlacingTolerance = 1e-8;

// ---------------------------------------------------------------------------
// Gap experiment

struct RigiditySample {
  std::size_t m = 0;
  std::vector<double> sums;  // g_i + ... + g_{i+m-1} - m
  std::vector<std::uint64_t> blocks;
  double sigma_hat = 0.0;

  static constexpr std::size_t kReportableSize = 1000;
  bool reportable() const noexcept { return sums.size() >= kReportableSize; }
};

struct GapExperiment {
  semicircle::GapObservations gaps;
  std::vector<RigiditySample> rigidity;
  std::size_t minor_checks = 0;
  std::size_t minor_violations = 0;
  double minor_max_relative_excess = 0.0;
};

inline double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = logconcave::sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/**
 * Samples cfg.num_matrices GUE matrices (task t uses SeedSpec{master_seed, t}),
 * diagonalises each, renormalises the gaps over the bulk window and pools
 * them in task order. Rigidity sums for each m use the non-overlapping
 * windows [i_lo + r m, i_lo + (r+1) m - 1] inside the bulk window. Every
 * matrix is also checked against its (N-1) minor for Cauchy interlacing.
 */
inline GapExperiment run_gap_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  const auto window = cfg.window();
  const semicircle::GapScaleTable scales(cfg.n, window.lo, window.hi);

  struct TaskResult {
    std::vector<double> gaps;
    std::vector<std::vector<double>> sums;
    InterlacingCheck minor;
    double radius = 1.0;
  };
  std::vector<TaskResult> results(cfg.num_matrices);

  parallel_for(cfg.num_matrices, threads, [&](std::size_t t) {
    const SeedSpec seed{cfg.master_seed, t};
    const HermitianMatrix m = sample_gue(cfg.n, seed);
    Spectrum spec, minor_spec;
    try {
      spec = hermitian_eigenvalues(m);
      minor_spec = hermitian_eigenvalues(principal_minor(m, cfg.n - 1));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " (master_seed " +
                             std::to_string(seed.master_seed) + ", task " + std::to_string(t) +
                             ")");
    }
    TaskResult& r = results[t];
    r.gaps.reserve(window.count());
    for (std::size_t i = window.lo; i <= window.hi; ++i)
      r.gaps.push_back((spec.lambda(i + 1) - spec.lambda(i)) / scales[i]);
    for (std::size_t m_size : cfg.m_list) {
      std::vector<double> sums;
      for (std::size_t start = 0; start + m_size <= r.gaps.size(); start += m_size) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m_size; ++k) acc += r.gaps[start + k];
        sums.push_back(acc - static_cast<double>(m_size));
      }
      r.sums.push_back(std::move(sums));
    }
    r.radius = spectral_radius(spec);
    r.minor = check_interlacing(spec, minor_spec, kMinorInterlacingTolerance * r.radius);
  });

  GapExperiment out;
  out.gaps.big_n = cfg.n;
  out.gaps.index_range = window;
  out.gaps.master_seed = cfg.master_seed;
  out.gaps.delta = cfg.delta;
  out.rigidity.resize(cfg.m_list.size());
  for (std::size_t k = 0; k < cfg.m_list.size(); ++k) out.rigidity[k].m = cfg.m_list[k];

  for (std::size_t t = 0; t < results.size(); ++t) {
    const TaskResult& r = results[t];
    for (std::size_t k = 0; k < r.gaps.size(); ++k) {
      out.gaps.values.push_back(r.gaps[k]);
      out.gaps.matrix_index.push_back(t);
      out.gaps.gap_index.push_back(window.lo + k);
    }
    for (std::size_t k = 0; k < r.sums.size(); ++k) {
      auto& rs = out.rigidity[k];
      rs.sums.insert(rs.sums.end(), r.sums[k].begin(), r.sums[k].end());
      rs.blocks.insert(rs.blocks.end(), r.sums[k].size(), t);
    }
    out.minor_checks += r.minor.checks;
    out.minor_violations += r.minor.violations;
    out.minor_max_relative_excess =
        std::max(out.minor_max_relative_excess, r.minor.max_excess / r.radius);
  }
  for (auto& rs : out.rigidity) rs.sigma_hat = sample_std(rs.sums);
  return out;
}

inline logconcave::EmpiricalSample as_sample(const semicircle::GapObservations& g) {
  logconcave::EmpiricalSample s;
  s.values = g.values;
  s.blocks.assign(g.matrix_index.begin(), g.matrix_index.end());
  s.provenance = "pooled g_i, N=" + std::to_string(g.big_n) + ", i in [" +
                 std::to_string(g.index_range.lo) + ", " + std::to_string(g.index_range.hi) + "]";
  if (g.master_seed) s.provenance += ", master_seed=" + std::to_string(*g.master_seed);
  return s;
}

// ---------------------------------------------------------------------------
// Bound verification

struct ThmMainSection {
  double mean_gap = 0.0;
  double mean_gap_stderr = 0.0;
  std::vector<std::pair<std::size_t, double>> per_index_means;
  std::vector<logconcave::BoundReport> bounds;
};

/// Upper tail, lower tail, moments and Gruenbaum on the mean-normalised pooled
/// sample; the raw mean is reported separately since it should approach 1.
inline ThmMainSection verify_thm_main(const semicircle::GapObservations& g,
                                      std::span<const double> h_grid,
                                      std::span<const double> p_list) {
  const auto sample = as_sample(g);
  logconcave::validate(sample, 2);

  ThmMainSection out;
  const auto est = logconcave::estimate_mean(sample.values, sample.blocks);
  out.mean_gap = est.mean;
  out.mean_gap_stderr = est.stderr_of_mean;

  std::map<std::size_t, std::pair<double, std::size_t>> by_index;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    const std::size_t i = k < g.gap_index.size() ? g.gap_index[k] : 0;
    auto& acc = by_index[i];
    acc.first += g.values[k];
    ++acc.second;
  }
  for (const auto& [i, acc] : by_index)
    out.per_index_means.emplace_back(i, acc.first / static_cast<double>(acc.second));

  auto append = [&out](std::vector<logconcave::BoundReport> r) {
    out.bounds.insert(out.bounds.end(), r.begin(), r.end());
  };
  append(logconcave::verify_upper_tail(sample, h_grid));
  append(logconcave::verify_lower_tail(sample, h_grid));
  append(logconcave::verify_moments(sample, p_list));
  out.bounds.push_back(logconcave::verify_gruenbaum(sample));
  return out;
}

struct RigidityEntry {
  std::size_t m = 0;
  std::size_t count = 0;
  double sigma_hat = 0.0;
  bool reportable = false;
  std::vector<logconcave::BoundReport> bounds;
};

struct RigiditySection {
  std::vector<RigidityEntry> entries;
  /// Least-squares slope of log sigma_hat against log log(2+m); NaN with
  /// fewer than two window sizes.
  double growth_exponent = std::numeric_limits<double>::quiet_NaN();
  std::string overlap_policy = "non-overlapping consecutive windows from i_lo, per matrix";
};

inline double fit_growth_exponent(std::span<const RigidityEntry> entries) {
  std::vector<double> xs, ys;
  for (const auto& e : entries) {
    if (e.sigma_hat <= 0.0) continue;
    xs.push_back(std::log(std::log(2.0 + static_cast<double>(e.m))));
    ys.push_back(std::log(e.sigma_hat));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = logconcave::sample_mean(xs), my = logconcave::sample_mean(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

/// Standardises each window-size sample and checks the exponential tail
/// P(|X| > t) <= e^{1-t}.
inline RigiditySection verify_rigidity(std::span<const RigiditySample> samples,
                                       std::span<const double> t_grid) {
  RigiditySection out;
  for (const auto& rs : samples) {
    RigidityEntry e;
    e.m = rs.m;
    e.count = rs.sums.size();
    e.sigma_hat = rs.sigma_hat;
    e.reportable = rs.reportable();
    if (rs.sums.size() >= 2) {
      logconcave::EmpiricalSample s{rs.sums, rs.blocks, "rigidity sums m=" + std::to_string(rs.m)};
      e.bounds = logconcave::verify_lv_tail(s, t_grid, "lv_tail_m" + std::to_string(rs.m));
    }
    out.entries.push_back(std::move(e));
  }
  out.growth_exponent = fit_growth_exponent(out.entries);
  return out;
}

// ---------------------------------------------------------------------------
// Comparison with the limiting gap law

/// max over the grid of |F_emp(s_k) - reference_k|, F_emp(s) = #{x <= s} / n.
inline double ks_distance_to_reference(std::span<const double> values,
                                       std::span<const double> grid,
                                       std::span<const double> reference) {
  if (values.empty()) throw std::invalid_argument("ks_distance_to_reference: empty sample");
  if (grid.size() != reference.size())
    throw std::invalid_argument("ks_distance_to_reference: grid and reference differ in length");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), grid[k]) - sorted.begin();
    worst = std::max(worst, std::abs(static_cast<double>(below) / n - reference[k]));
  }
  return worst;
}

template <class Cdf>
double ks_distance_on_grid(std::span<const double> values, Cdf&& cdf,
                           std::span<const double> grid) {
  std::vector<double> reference;
  reference.reserve(grid.size());
  for (double s : grid) reference.push_back(cdf(s));
  return ks_distance_to_reference(values, grid, reference);
}

inline constexpr std::size_t kKsGridPoints = 400;
inline constexpr double kKsGridMax = 5.0;

inline std::vector<double> ks_grid(double s_max = kKsGridMax, std::size_t points = kKsGridPoints) {
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = s_max * static_cast<double>(k + 1) / static_cast<double>(points);
  return grid;
}

/// KS distance between the pooled gaps and the Gaudin-Mehta distribution
/// function on a 400-point grid over (0, 5].
inline double compare_to_gm(std::span<const double> values,
                            std::size_t nodes = gaudin_mehta::kDefaultNodes) {
  const auto grid = ks_grid();
  std::vector<double> reference(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    reference[k] = gaudin_mehta::gap_cdf(grid[k], nodes);
  return ks_distance_to_reference(values, grid, reference);
}

// ---------------------------------------------------------------------------
// Gelfand-Tsetlin minor process

/// Stream offset keeping minor-process matrices disjoint from gap-run matrices.
inline constexpr std::uint64_t kGtTaskOffset = std::uint64_t{1} << 40;

struct GtViolation {
  std::uint64_t matrix_index = 0;
  SeedSpec seed;
  std::size_t k = 0;  // minor size
  std::size_t j = 0;  // 1-based position
};

struct GtMatrixRow {
  std::uint64_t matrix_index = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double max_relative_excess = 0.0;
};

struct GtResult {
  std::size_t n = 0;
  std::size_t matrices = 0;
  std::size_t checks = 0;
  std::vector<GtViolation> violations;
  std::vector<GtMatrixRow> rows;
  /// (T_{N-1,k} - T_{N,k}) / S(k, N) for k in the bulk window, pooled.
  logconcave::EmpiricalSample functional;
  std::optional<logconcave::LogConcavityReport> diagnostic;

  double pass_rate() const {
    std::size_t clean = 0;
    for (const auto& r : rows) clean += r.violations == 0;
    return rows.empty() ? 1.0 : static_cast<double>(clean) / static_cast<double>(rows.size());
  }
};

/**
 * Eigenvalues of every leading principal minor k = 1..N of each sampled
 * matrix, checked against t_{k+1,j} <= t_{k,j} <= t_{k+1,j+1} (ascending
 * order within each row) at tolerance 1e-8 times the spectral radius.
 */
inline GtResult gt_experiment(std::size_t n, std::size_t matrices, std::uint64_t master_seed,
                              double delta, unsigned threads = 1) {
  if (n < 2) throw std::invalid_argument("gt_experiment: n must be at least 2");
  const auto window = semicircle::bulk_window(n, delta);
  const semicircle::GapScaleTable scales(n, window.lo, window.hi);

  struct TaskResult {
    GtMatrixRow row;
    std::vector<GtViolation> violations;
    std::vector<double> functional;
  };
  std::vector<TaskResult> results(matrices);

  parallel_for(matrices, threads, [&](std::size_t t) {
    const SeedSpec seed{master_seed, kGtTaskOffset + t};
    const HermitianMatrix m = sample_gue(n, seed);
    std::vector<Spectrum> rows(n + 1);
    for (std::size_t k = 1; k <= n; ++k) rows[k] = hermitian_eigenvalues(principal_minor(m, k));
    const double radius = spectral_radius(rows[n]);
    TaskResult& r = results[t];
    r.row.matrix_index = t;
    for (std::size_t k = 1; k < n; ++k) {
      const auto chk = check_interlacing(rows[k + 1], rows[k], kGtInterlacingTolerance * radius);
      r.row.checks += chk.checks;
      r.row.violations += chk.violations;
      r.row.max_relative_excess = std::max(r.row.max_relative_excess, chk.max_excess / radius);
      for (std::size_t j : chk.violating_j) r.violations.push_back({t, seed, k, j});
    }
    for (std::size_t k = window.lo; k <= window.hi; ++k)
      r.functional.push_back((rows[n - 1].lambda(k) - rows[n].lambda(k)) / scales[k]);
  });

  GtResult out;
  out.n = n;
  out.matrices = matrices;
  out.functional.provenance = "T_{N-1,k} - T_{N,k} over bulk k, N=" + std::to_string(n);
  for (std::size_t t = 0; t < matrices; ++t) {
    auto& r = results[t];
    out.checks += r.row.checks;
    out.rows.push_back(r.row);
    out.violations.insert(out.violations.end(), r.violations.begin(), r.violations.end());
    out.functional.values.insert(out.functional.values.end(), r.functional.begin(),
                                 r.functional.end());
    out.functional.blocks.insert(out.functional.blocks.end(), r.functional.size(), t);
  }
  if (out.functional.values.size() >= logconcave::kDiagnosticMinSample)
    out.diagnostic = logconcave::logconcavity_diagnostic(out.functional);
  return out;
}

// ---------------------------------------------------------------------------
// Full report

struct Histogram {
  double lo = 0.0;
  double width = 0.1;
  std::vector<double> density;     // empirical, normalised to integrate to 1
  std::vector<double> gm_density;  // limiting density at bin centres
};

inline Histogram gap_histogram(std::span<const double> values, double lo = 0.0, double hi = 4.0,
                               std::size_t bins = 40) {
  Histogram h;
  h.lo = lo;
  h.width = (hi - lo) / static_cast<double>(bins);
  h.density.assign(bins, 0.0);
  for (double v : values) {
    if (v < lo || v >= hi) continue;
    h.density[static_cast<std::size_t>((v - lo) / h.width)] += 1.0;
  }
  const double norm = static_cast<double>(values.size()) * h.width;
  for (double& d : h.density) d /= norm;
  for (std::size_t k = 0; k < bins; ++k)
    h.gm_density.push_back(gaudin_mehta::gap_density(lo + (static_cast<double>(k) + 0.5) * h.width));
  return h;
}

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t pooled_gaps = 0;
  ThmMainSection thm_main;
  RigiditySection rigidity;
  double ks_distance_to_gm = 0.0;
  std::optional<logconcave::LogConcavityReport> gap_diagnostic;
  std::size_t minor_checks = 0;
  std::size_t minor_violations = 0;
  GtResult gt;
  Histogram histogram;

  /// Every certificate that decides the exit status, in a fixed order.
  std::vector<logconcave::BoundReport> all_bounds() const {
    std::vector<logconcave::BoundReport> out = thm_main.bounds;
    for (const auto& e : rigidity.entries) out.insert(out.end(), e.bounds.begin(), e.bounds.end());
    const double minor_rate =
        minor_checks ? static_cast<double>(minor_violations) / static_cast<double>(minor_checks)
                     : 0.0;
    out.push_back(logconcave::make_report("minor_interlacing", kMinorInterlacingTolerance,
                                          minor_rate, 0.0, 0.0));
    const double gt_rate =
        gt.checks ? static_cast<double>(gt.violations.size()) / static_cast<double>(gt.checks)
                  : 0.0;
    out.push_back(
        logconcave::make_report("gt_interlacing", kGtInterlacingTolerance, gt_rate, 0.0, 0.0));
    return out;
  }

  bool all_pass() const {
    for (const auto& b : all_bounds())
      if (!b.passes()) return false;
    return true;
  }
};

inline ExperimentReport build_report(const ExperimentConfig& cfg, const GapExperiment& run,
                                     unsigned threads = 1) {
  ExperimentReport rep;
  rep.config = cfg;
  rep.pooled_gaps = run.gaps.values.size();
  rep.thm_main = verify_thm_main(run.gaps, cfg.h_grid, cfg.p_list);
  rep.rigidity = verify_rigidity(run.rigidity, cfg.t_grid);
  rep.ks_distance_to_gm = compare_to_gm(run.gaps.values);
  if (run.gaps.values.size() >= logconcave::kDiagnosticMinSample)
    rep.gap_diagnostic = logconcave::logconcavity_diagnostic(as_sample(run.gaps));
  rep.minor_checks = run.minor_checks;
  rep.minor_violations = run.minor_violations;
  rep.gt = gt_experiment(cfg.effective_gt_n(), cfg.effective_gt_matrices(), cfg.master_seed,
                         cfg.delta, threads);
  rep.histogram = gap_histogram(run.gaps.values);
  return rep;
}

}  // namespace gue::experiments
