#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covcheck/shift.hpp"
#include "test_support.hpp"

namespace covcheck {
namespace {

GaussianMixture single(Vector mean, Vector var) {
  GaussianMixture g;
  g.weights = {1.0};
  g.means.append_row(mean);
  g.variances.append_row(var);
  return g;
}

GaussianMixture one_d(std::vector<double> w, std::vector<double> mu, std::vector<double> var) {
  GaussianMixture g;
  g.weights = w;
  for (std::size_t j = 0; j < w.size(); ++j) {
    g.means.append_row(Vector{mu[j]});
    g.variances.append_row(Vector{var[j]});
  }
  return g;
}

// Trapezoid rule on a fine grid.
template <class F>
double integrate(F f, double lo, double hi, std::size_t steps = 200000) {
  const double h = (hi - lo) / static_cast<double>(steps);
  double s = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < steps; ++i) s += f(lo + h * static_cast<double>(i));
  return s * h;
}

double js_quadrature(const GaussianMixture& p, const GaussianMixture& q, double lo, double hi,
                     std::size_t steps = 200000) {
  auto term = [](double a, double b) { return a > 0.0 ? a * std::log2(2.0 * a / (a + b)) : 0.0; };
  return integrate(
      [&](double x) {
        const Vector v{x};
        const double a = std::exp(gmm_log_density(p, v));
        const double b = std::exp(gmm_log_density(q, v));
        return 0.5 * term(a, b) + 0.5 * term(b, a);
      },
      lo, hi, steps);
}

Matrix gaussian_points(Rng& rng, std::size_t n, Vector mean, double sigma) {
  Matrix m;
  for (std::size_t i = 0; i < n; ++i) {
    Vector x = mean;
    for (double& v : x) v += sigma * rng.normal();
    m.append_row(x);
  }
  return m;
}

TEST(FitGmm, SingleComponentIsClosedForm) {
  Rng rng(1);
  const Matrix pts = gaussian_points(rng, 500, {1.0, -2.0, 0.5}, 2.0);
  ShiftConfig cfg;
  cfg.components = 1;
  const auto g = fit_gmm(pts, cfg);
  ASSERT_EQ(g.components(), 1u);
  EXPECT_DOUBLE_EQ(g.weights[0], 1.0);
  for (std::size_t d = 0; d < 3; ++d) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < pts.rows(); ++i) mean += pts(i, d);
    mean /= 500.0;
    for (std::size_t i = 0; i < pts.rows(); ++i) var += (pts(i, d) - mean) * (pts(i, d) - mean);
    var /= 500.0;
    EXPECT_NEAR(g.means(0, d), mean, 1e-9);
    EXPECT_NEAR(g.variances(0, d), var, 1e-9);
  }
}

TEST(FitGmm, ConstantPointsFloorTheVariance) {
  Matrix pts;
  for (int i = 0; i < 10; ++i) pts.append_row(Vector{3.0, 3.0});
  ShiftConfig cfg;
  cfg.components = 1;
  const auto g = fit_gmm(pts, cfg);
  EXPECT_EQ(g.variances(0, 0), kVarianceFloor);
}

TEST(FitGmm, RecoversTwoSeparatedClusters) {
  Rng rng(2);
  Matrix pts = gaussian_points(rng, 200, {10.0, 0.0}, 1.0);
  const Matrix other = gaussian_points(rng, 200, {-10.0, 0.0}, 1.0);
  for (std::size_t i = 0; i < other.rows(); ++i) pts.append_row(other.row(i));
  ShiftConfig cfg;
  cfg.components = 2;
  const auto g = fit_gmm(pts, cfg);
  ASSERT_EQ(g.components(), 2u);
  const std::size_t pos = g.means(0, 0) > 0 ? 0 : 1;
  EXPECT_NEAR(g.weights[0], 0.5, 0.02);
  EXPECT_NEAR(g.weights[1], 0.5, 0.02);
  EXPECT_NEAR(g.means(pos, 0), 10.0, 0.2);
  EXPECT_NEAR(g.means(1 - pos, 0), -10.0, 0.2);
  EXPECT_NEAR(g.means(pos, 1), 0.0, 0.2);
}

TEST(FitGmm, ClampsComponentsToPointCount) {
  Rng rng(3);
  const auto g = fit_gmm(gaussian_points(rng, 5, {0.0}, 1.0), ShiftConfig{});
  EXPECT_EQ(g.components(), 5u);
}

TEST(FitGmm, EmptyInputThrows) {
  try {
    fit_gmm(Matrix(0, 2), ShiftConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
}

TEST(FitGmm, LogLikelihoodNeverDecreases) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng.index(4);
    const std::size_t n = 5 + rng.index(150);
    Matrix pts;
    for (std::size_t i = 0; i < n; ++i) {
      Vector x(dim);
      const double offset = 4.0 * static_cast<double>(rng.index(3));
      for (double& v : x) v = offset + rng.normal();
      pts.append_row(x);
    }
    ShiftConfig cfg;
    cfg.components = 1 + rng.index(6);
    cfg.seed = rng.next();
    const auto fit = fit_gmm_traced(pts, cfg);
    ASSERT_FALSE(fit.log_likelihood.empty());
    for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i) {
      EXPECT_GE(fit.log_likelihood[i], fit.log_likelihood[i - 1] - 1e-9) << "trial " << trial << " iter " << i;
    }
  }
}

TEST(FitGmm, ResponsibilitiesSumToOne) {
  Rng rng(5);
  const Matrix pts = gaussian_points(rng, 300, {0.0, 0.0, 0.0}, 3.0);
  const auto g = fit_gmm(pts, ShiftConfig{});
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    const auto r = gmm_responsibilities(g, pts.row(i));
    double s = 0.0;
    for (double v : r) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(FitGmm, SeededDeterminism) {
  Rng rng(6);
  const Matrix pts = gaussian_points(rng, 250, {1.0, 2.0}, 1.5);
  EXPECT_EQ(fit_gmm(pts, ShiftConfig{}), fit_gmm(pts, ShiftConfig{}));
}

TEST(GmmLogDensity, StandardNormalPeak) {
  EXPECT_NEAR(gmm_log_density(single({0.0}, {1.0}), Vector{0.0}), -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(gmm_log_density(single({0.0}, {1.0}), Vector{0.0}), -0.9189, 1e-4);
}

TEST(GmmLogDensity, DuplicateComponentsCollapse) {
  const auto a = single({1.0, 2.0}, {0.5, 3.0});
  GaussianMixture b = a;
  b.weights = {0.5, 0.5};
  b.means.append_row(a.means.row(0));
  b.variances.append_row(a.variances.row(0));
  for (double x : {-3.0, 0.0, 1.0, 7.5}) {
    const Vector v{x, x};
    EXPECT_NEAR(gmm_log_density(a, v), gmm_log_density(b, v), 1e-12);
  }
}

TEST(GmmLogDensity, FarTailStaysFinite) {
  const double v = gmm_log_density(single({0.0}, {1.0}), Vector{40.0});
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, -800.0 - 0.5 * std::log(2.0 * std::numbers::pi), 1e-9);
}

TEST(GmmLogDensity, IntegratesToOneInOneDimension) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + rng.index(4);
    std::vector<double> w(k), mu(k), var(k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      w[j] = 0.1 + rng.uniform();
      total += w[j];
      mu[j] = 3.0 * rng.normal();
      var[j] = 0.2 + 2.0 * rng.uniform();
    }
    for (double& v : w) v /= total;
    const auto g = one_d(w, mu, var);
    double lo = 0.0, hi = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      lo = std::min(lo, mu[j] - 12.0 * std::sqrt(var[j]));
      hi = std::max(hi, mu[j] + 12.0 * std::sqrt(var[j]));
    }
    const double mass = integrate([&](double x) { return std::exp(gmm_log_density(g, Vector{x})); }, lo, hi, 20000);
    EXPECT_NEAR(mass, 1.0, 1e-4);
  }
}

TEST(SampleGmm, NearDegenerateDrawsHugTheMean) {
  const auto pts = sample_gmm(single({2.0, -1.0}, {kVarianceFloor, kVarianceFloor}), 3, 9);
  ASSERT_EQ(pts.rows(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(pts(i, 0), 2.0, 0.01);
    EXPECT_NEAR(pts(i, 1), -1.0, 0.01);
  }
}

TEST(SampleGmm, LawOfLargeNumbers) {
  const auto pts = sample_gmm(single({5.0}, {1.0}), 100000, 10);
  double s = 0.0;
  for (std::size_t i = 0; i < pts.rows(); ++i) s += pts(i, 0);
  EXPECT_NEAR(s / 100000.0, 5.0, 0.02);
}

TEST(SampleGmm, WeightsSelectComponents) {
  const auto g = one_d({0.25, 0.75}, {-50.0, 50.0}, {1.0, 1.0});
  const auto pts = sample_gmm(g, 40000, 11);
  std::size_t right = 0;
  for (std::size_t i = 0; i < pts.rows(); ++i) right += pts(i, 0) > 0.0;
  EXPECT_NEAR(static_cast<double>(right) / 40000.0, 0.75, 0.01);
}

TEST(SampleGmm, SameSeedSameOutput) {
  const auto g = one_d({0.3, 0.7}, {0.0, 3.0}, {1.0, 2.0});
  EXPECT_EQ(sample_gmm(g, 50, 12), sample_gmm(g, 50, 12));
  EXPECT_NE(sample_gmm(g, 50, 12), sample_gmm(g, 50, 13));
}

TEST(JsDivergence, IdenticalMixturesGiveExactZero) {
  const auto g = one_d({0.3, 0.7}, {0.0, 3.0}, {1.0, 2.0});
  const auto js = js_divergence(g, g, ShiftConfig{});
  EXPECT_EQ(js.value, 0.0);
  EXPECT_EQ(js.standard_error, 0.0);
}

TEST(JsDivergence, DisjointSupportsGiveOneBit) {
  const auto p = single({0.0}, {1.0});
  const auto q = single({100.0}, {1.0});
  const double oracle = js_quadrature(p, q, -12.0, 112.0);
  EXPECT_NEAR(oracle, 1.0, 1e-6);
  EXPECT_NEAR(js_divergence(p, q, ShiftConfig{}).value, oracle, 0.01);
}

TEST(JsDivergence, MatchesQuadratureForOverlappingGaussians) {
  Rng rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    const auto p = one_d({0.4, 0.6}, {rng.normal(), 2.0 + rng.normal()}, {1.0, 0.5 + rng.uniform()});
    const auto q = one_d({1.0}, {3.0 * rng.uniform()}, {0.5 + 2.0 * rng.uniform()});
    const double oracle = js_quadrature(p, q, -25.0, 30.0, 50000);
    ShiftConfig cfg;
    cfg.seed = rng.next();
    const auto js = js_divergence(p, q, cfg);
    EXPECT_NEAR(js.value, oracle, 4.0 * js.standard_error + 1e-3) << "trial " << trial;
  }
}

TEST(JsDivergence, SymmetricWithinStandardErrors) {
  const auto p = one_d({0.5, 0.5}, {-1.0, 2.0}, {1.0, 0.5});
  const auto q = single({0.5}, {2.0});
  ShiftConfig a, b;
  a.seed = 100;
  b.seed = 200;
  const auto pq = js_divergence(p, q, a);
  const auto qp = js_divergence(q, p, b);
  const double se = std::hypot(pq.standard_error, qp.standard_error);
  EXPECT_LE(std::abs(pq.value - qp.value), 3.0 * se);
}

TEST(JsDivergence, StaysInUnitInterval) {
  Rng rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = single({rng.normal(), rng.normal()}, {0.1 + rng.uniform(), 0.1 + rng.uniform()});
    const auto q = single({rng.normal(), 10.0 * rng.normal()}, {0.1 + rng.uniform(), 0.1 + rng.uniform()});
    ShiftConfig cfg;
    cfg.mc_samples = 1000;
    const double v = js_divergence(p, q, cfg).value;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(JsDivergence, DimensionMismatchThrows) {
  try {
    js_divergence(single({0.0}, {1.0}), single({0.0, 0.0}, {1.0, 1.0}), ShiftConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

FeatureDataset blobs(Rng& rng, std::size_t nc, std::size_t dim, std::size_t per_class, double shift) {
  FeatureDataset ds{"blobs", nc, dim, {}, std::nullopt};
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Vector x(dim);
      for (std::size_t d = 0; d < dim; ++d) x[d] = (d == c % dim ? 8.0 : 0.0) + shift + rng.normal();
      ds.samples.push_back({std::to_string(ds.size()), static_cast<int>(c), x, std::nullopt});
    }
  }
  return ds;
}

TEST(CovariateShift, SamePointsGiveNearZero) {
  Rng rng(15);
  const auto train = blobs(rng, 3, 2, 300, 0.0);
  const auto report = covariate_shift(train, train, ShiftConfig{});
  ASSERT_EQ(report.per_class_js.size(), 3u);
  for (double v : report.per_class_js) EXPECT_LE(v, 0.05);
  EXPECT_TRUE(report.undefined_classes.empty());
}

TEST(CovariateShift, FiveSigmaShiftIsDetected) {
  Rng rng(16);
  const auto train = blobs(rng, 3, 2, 300, 0.0);
  auto test = train;
  for (auto& s : test.samples) {
    for (double& v : s.features) v += 5.0;
  }
  const auto report = covariate_shift(train, test, ShiftConfig{});
  for (double v : report.per_class_js) EXPECT_GE(v, 0.8);
}

TEST(CovariateShift, MissingClassIsUndefined) {
  Rng rng(17);
  const auto train = blobs(rng, 3, 2, 100, 0.0);
  auto test = blobs(rng, 3, 2, 100, 0.0);
  std::erase_if(test.samples, [](const Sample& s) { return s.label == 1; });
  const auto report = covariate_shift(train, test, ShiftConfig{});
  EXPECT_EQ(report.undefined_classes, (std::vector<std::size_t>{1}));
  EXPECT_EQ(report.per_class_js[1], 0.0);
  EXPECT_GT(report.per_class_js[0], 0.0);
}

TEST(CovariateShift, DeterministicAndShapeChecked) {
  Rng rng(18);
  const auto train = blobs(rng, 2, 3, 100, 0.0);
  const auto test = blobs(rng, 2, 3, 100, 0.0);
  ShiftConfig cfg;
  cfg.mc_samples = 2000;
  EXPECT_EQ(covariate_shift(train, test, cfg), covariate_shift(train, test, cfg));
  auto other = test;
  other.feature_dim = 4;
  EXPECT_THROW(covariate_shift(train, other, cfg), Error);
}

TEST(ShiftConfig, RejectsBadValues) {
  ShiftConfig cfg;
  cfg.components = 0;
  EXPECT_THROW(cfg.check(), Error);
  cfg = ShiftConfig{};
  cfg.mc_samples = 10;
  EXPECT_THROW(cfg.check(), Error);
}

}  // namespace
}  // namespace covcheck
