#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gue/logconcave.hpp"

namespace lc = gue::logconcave;

namespace {

lc::EmpiricalSample exponential_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> d(1.0);
  lc::EmpiricalSample s;
  s.values.resize(n);
  for (double& v : s.values) v = d(rng);
  s.provenance = "exp(1)";
  return s;
}

lc::EmpiricalSample bimodal_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  lc::EmpiricalSample s;
  s.values.resize(n);
  for (double& v : s.values) v = z(rng) + (coin(rng) ? 8.0 : 0.0);
  return s;
}

double simpson(auto f, double a, double b, int intervals = 20000) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return acc * h / 3.0;
}

void expect_within(const lc::BoundReport& r, double truth, double sigmas = 4.0) {
  EXPECT_LE(std::abs(r.empirical - truth), sigmas * r.mc_stderr + 1e-12)
      << r.bound_name << "(" << r.param << ")";
}

}  // namespace

TEST(ClosedForms, TailAndMomentBounds) {
  EXPECT_DOUBLE_EQ(lc::exp_upper_tail_bound(1.0), 1.0);
  EXPECT_NEAR(lc::exp_upper_tail_bound(4.0), 0.049787068367863944, 1e-16);
  EXPECT_DOUBLE_EQ(lc::lower_tail_bound(0.1), 0.2);
  EXPECT_NEAR(lc::moment_bound(3.0), 6.0, 1e-12);
  EXPECT_NEAR(lc::moment_bound(4.0), 24.0, 1e-12);
  EXPECT_NEAR(lc::moment_bound(2.5), std::tgamma(3.5), 1e-15);
  EXPECT_NEAR(lc::gruenbaum_bound(), 0.36787944117144233, 1e-16);
  EXPECT_NEAR(lc::lv_tail_bound(3.0), std::exp(-2.0), 1e-16);
}

TEST(ConvexOrderIntegrals, CallMatchesClosedForm) {
  for (double h : {0.5, 1.0, 2.0, 3.7, 6.0})
    EXPECT_NEAR(lc::call_option_integral(h), std::exp(1.0 - h), 1e-10) << h;
  EXPECT_THROW(lc::call_option_integral(0.0), std::invalid_argument);
}

TEST(ConvexOrderIntegrals, PutClosedFormAndQuadrature) {
  EXPECT_NEAR(lc::put_option_integral(0.5), 2.0 * std::exp(-1.0), 1e-15);
  for (double h : {0.01, 0.05, 0.3, 1.0, 2.5, 7.0}) {
    const double oracle =
        simpson([h](double x) { return (2.0 * h - x) * std::exp(-x); }, 0.0, 2.0 * h) / h;
    EXPECT_NEAR(lc::put_option_integral(h), oracle, 1e-12) << h;
  }
  for (int k = 1; k <= 1000; ++k) {
    const double h = 5.0 * k / 1000.0;
    EXPECT_LE(lc::put_option_integral(h), std::min(2.0 * h, 2.0)) << h;
  }
  // series: ratio = 1 - 2h/3 + h^2/3 - ...
  for (double h : {1e-3, 1e-6, 1e-9}) {
    const double ratio = lc::put_option_integral(h) / (2.0 * h);
    EXPECT_LT(ratio, 1.0);
    EXPECT_NEAR(ratio, 1.0 - 2.0 * h / 3.0 + h * h / 3.0, h * h * h + 1e-15);
  }
}

TEST(Judge, ThreeWayVerdict) {
  EXPECT_EQ(lc::judge(0.3, 0.4, 0.01, lc::Direction::upper), lc::Verdict::holds);
  EXPECT_EQ(lc::judge(0.42, 0.4, 0.01, lc::Direction::upper), lc::Verdict::holds_within_noise);
  EXPECT_EQ(lc::judge(0.43, 0.4, 0.01, lc::Direction::upper), lc::Verdict::holds_within_noise);
  EXPECT_EQ(lc::judge(0.4301, 0.4, 0.01, lc::Direction::upper), lc::Verdict::violated);
  EXPECT_EQ(lc::judge(0.5, 0.4, 0.0, lc::Direction::lower), lc::Verdict::holds);
  EXPECT_EQ(lc::judge(0.3, 0.4, 0.0, lc::Direction::lower), lc::Verdict::violated);
  EXPECT_EQ(lc::judge(0.4, 0.4, 0.0, lc::Direction::upper), lc::Verdict::holds);
  EXPECT_EQ(lc::to_string(lc::Verdict::holds_within_noise), "holds_within_noise");
  EXPECT_FALSE(lc::make_report("x", 1, 2.0, 1.0, 0.1).passes());
  EXPECT_TRUE(lc::make_report("x", 1, 1.2, 1.0, 0.1).passes());
}

TEST(EstimateMean, ClusterRobustError) {
  const std::vector<double> y{1.0, 1.0, 3.0, 3.0};
  const std::vector<std::uint64_t> b{0, 0, 1, 1};
  const auto clustered = lc::estimate_mean(y, b);
  EXPECT_DOUBLE_EQ(clustered.mean, 2.0);
  EXPECT_NEAR(clustered.stderr_of_mean, 1.0, 1e-15);
  const auto iid = lc::estimate_mean(y);
  EXPECT_NEAR(iid.stderr_of_mean, std::sqrt(4.0 / 3.0 / 4.0), 1e-15);
  // singleton blocks reduce to the i.i.d. formula up to the n/(n-1) factor
  const std::vector<std::uint64_t> single{0, 1, 2, 3};
  EXPECT_NEAR(lc::estimate_mean(y, single).stderr_of_mean, iid.stderr_of_mean, 1e-15);
}

TEST(Validate, RejectsBadSamples) {
  lc::EmpiricalSample s;
  EXPECT_THROW(lc::validate(s), std::invalid_argument);
  s.values = {1.0, std::nan("")};
  EXPECT_THROW(lc::validate(s), std::invalid_argument);
  s.values = {1.0, 2.0};
  s.blocks = {0};
  EXPECT_THROW(lc::validate(s), std::invalid_argument);
  s.values = {-1.0, 1.0};
  s.blocks.clear();
  EXPECT_THROW(lc::mean_normalised(s), std::invalid_argument);
}

TEST(Certificates, ExponentialSampleMatchesKnownProbabilities) {
  const auto s = exponential_sample(1000000, 1);
  const std::vector<double> h{2.0};
  const auto up = lc::verify_upper_tail(s, h);
  expect_within(up[0], std::exp(-2.0));
  EXPECT_EQ(up[0].verdict, lc::Verdict::holds);

  const std::vector<double> hl{0.1};
  const auto low = lc::verify_lower_tail(s, hl);
  expect_within(low[0], 1.0 - std::exp(-0.1));
  EXPECT_NEAR(low[0].empirical, 0.0952, 2e-3);

  const std::vector<double> p{3.0};
  const auto mom = lc::verify_moments(s, p);
  expect_within(mom[0], 6.0);

  const auto g = lc::verify_gruenbaum(s);
  expect_within(g, std::exp(-1.0));
  EXPECT_EQ(g.direction, lc::Direction::lower);
}

TEST(Certificates, ExponentialPassesEverything) {
  const auto s = exponential_sample(1000000, 2);
  const std::vector<double> h{0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0};
  const std::vector<double> p{2.0, 3.0, 4.0};
  for (const auto& r : lc::verify_upper_tail(s, h)) EXPECT_TRUE(r.passes()) << r.param;
  for (const auto& r : lc::verify_lower_tail(s, h)) EXPECT_TRUE(r.passes()) << r.param;
  for (const auto& r : lc::verify_moments(s, p)) EXPECT_TRUE(r.passes()) << r.param;
  EXPECT_TRUE(lc::verify_gruenbaum(s).passes());
}

TEST(Certificates, ProbabilityBoundsAreCapped) {
  const auto s = exponential_sample(1000, 3);
  const std::vector<double> h{0.5, 0.75};
  for (const auto& r : lc::verify_upper_tail(s, h)) EXPECT_EQ(r.bound, 1.0);
  const std::vector<double> hl{0.75};
  EXPECT_EQ(lc::verify_lower_tail(s, hl)[0].bound, 1.0);
}

TEST(Certificates, UniformGruenbaumIsOneHalf) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  lc::EmpiricalSample s;
  s.values.resize(200000);
  for (double& v : s.values) v = u(rng);
  const auto g = lc::verify_gruenbaum(s);
  expect_within(g, 0.5);
  EXPECT_EQ(g.verdict, lc::Verdict::holds);
}

TEST(Certificates, TwoClusterLawViolatesLowerTail) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.01);
  lc::EmpiricalSample s;
  for (int i = 0; i < 20000; ++i) s.values.push_back(i % 2 ? u(rng) : 1.99 + u(rng));
  const std::vector<double> h{0.1};
  EXPECT_EQ(lc::verify_lower_tail(s, h)[0].verdict, lc::Verdict::violated);
}

TEST(Certificates, LvTailOnGaussian) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  lc::EmpiricalSample s;
  s.values.resize(100000);
  for (double& v : s.values) v = z(rng);
  const std::vector<double> t{1.0, 2.0, 3.0};
  const auto r = lc::verify_lv_tail(s, t);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].bound_name, "lv_tail");
  expect_within(r[1], 0.0455);
  for (const auto& b : r) EXPECT_EQ(b.verdict, lc::Verdict::holds);
  EXPECT_EQ(r[0].bound, 1.0);
}

TEST(Diagnostic, ExponentialUsuallyConsistent) {
  // Each run makes ~100 checks at 3 sigma, so single-run false alarms occur
  // at roughly 10%; require the rate to stay well below a quarter.
  int consistent = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto rep = lc::logconcavity_diagnostic(exponential_sample(100000, seed));
    EXPECT_GE(rep.qualifying_bins, 5u);
    if (rep.consistent) ++consistent;
  }
  EXPECT_GE(consistent, 15);
}

TEST(Diagnostic, BimodalMixtureFlagged) {
  int flagged = 0;
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const auto rep = lc::logconcavity_diagnostic(bimodal_sample(100000, seed));
    if (!rep.consistent) {
      ++flagged;
      ASSERT_FALSE(rep.violations.empty());
      for (const auto& v : rep.violations) EXPECT_GT(v.second_difference, 3.0 * v.noise);
    }
  }
  EXPECT_GE(flagged, 9);
  // the valley sits between the modes
  const auto rep = lc::logconcavity_diagnostic(bimodal_sample(100000, 200));
  ASSERT_FALSE(rep.consistent);
  bool valley = false;
  for (const auto& v : rep.violations) valley |= v.center > 2.0 && v.center < 6.0;
  EXPECT_TRUE(valley);
}

TEST(Diagnostic, ScaleEquivariant) {
  for (const auto& base : {exponential_sample(50000, 7), bimodal_sample(50000, 8)}) {
    const auto ref = lc::logconcavity_diagnostic(base);
    for (double c : {0.5, 2.0, 1024.0}) {
      auto scaled = base;
      for (double& v : scaled.values) v *= c;
      const auto rep = lc::logconcavity_diagnostic(scaled);
      EXPECT_EQ(rep.consistent, ref.consistent) << c;
      EXPECT_EQ(rep.checks, ref.checks) << c;
      EXPECT_EQ(rep.violations.size(), ref.violations.size()) << c;
      EXPECT_NEAR(rep.bin_width, c * ref.bin_width, 1e-12 * c * ref.bin_width);
    }
  }
}

TEST(Diagnostic, RejectsSmallOrDegenerateInput) {
  EXPECT_THROW(lc::logconcavity_diagnostic(exponential_sample(9999, 9)), std::invalid_argument);
  lc::EmpiricalSample two_point;
  for (int i = 0; i < 10000; ++i) two_point.values.push_back(i % 2);
  EXPECT_THROW(lc::logconcavity_diagnostic(two_point), std::invalid_argument);
}

TEST(SortedQuantile, Interpolates) {
  const std::vector<double> v{0.0, 1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(lc::sorted_quantile(v, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(lc::sorted_quantile(v, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(lc::sorted_quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(lc::sorted_quantile(v, 0.125), 0.5);
}
