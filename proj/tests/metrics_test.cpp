#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covcheck/classifier.hpp"
#include "covcheck/metrics.hpp"
#include "metrics_oracle.hpp"
#include "test_support.hpp"

namespace covcheck {
namespace {

FeatureDataset points(std::size_t nc, std::size_t dim, std::vector<std::pair<int, Vector>> rows) {
  FeatureDataset ds{"pts", nc, dim, {}, std::nullopt};
  for (auto& [label, x] : rows) ds.samples.push_back({"p" + std::to_string(ds.size()), label, x, std::nullopt});
  return ds;
}

FeatureDataset with_confidences(std::size_t nc, const std::vector<std::pair<int, Vector>>& rows) {
  FeatureDataset ds{"conf", nc, 1, {}, std::nullopt};
  for (const auto& [label, c] : rows) ds.samples.push_back({"c" + std::to_string(ds.size()), label, {0.0}, c});
  return ds;
}

TEST(ComputeCentroids, MeanOfClass) {
  const auto ds = points(2, 2, {{0, {0, 0}}, {0, {2, 0}}, {1, {5, 5}}});
  const auto cm = compute_centroids(ds);
  EXPECT_DOUBLE_EQ(cm.centroids(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(cm.centroids(0, 1), 0.0);
  EXPECT_EQ(cm.source, "train");
}

TEST(ComputeCentroids, SingleSampleClassFallsBackToUnitRadius) {
  const auto cm = compute_centroids(points(2, 2, {{0, {0, 0}}, {0, {2, 0}}, {1, {5, 5}}}));
  EXPECT_DOUBLE_EQ(cm.radii[1], 1.0);
  EXPECT_DOUBLE_EQ(cm.radii[0], 1.0);  // both distances are exactly 1
}

TEST(ComputeCentroids, EmptyClassThrows) {
  try {
    compute_centroids(points(3, 1, {{0, {0}}, {2, {1}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
  }
}

TEST(ComputeCentroids, RadiusMatchesChiPercentileOracle) {
  // Oracle: 95th percentile of the chi distribution (k = 2) by sampling.
  std::mt19937_64 gen(99);
  std::normal_distribution<double> z;
  std::vector<double> chi(400000);
  for (auto& v : chi) {
    const double a = z(gen), b = z(gen);
    v = std::sqrt(a * a + b * b);
  }
  std::sort(chi.begin(), chi.end());
  const double oracle = chi[static_cast<std::size_t>(0.95 * chi.size())];
  ASSERT_NEAR(oracle, std::sqrt(-2.0 * std::log(0.05)), 0.02);

  Rng rng(5);
  FeatureDataset ds{"n", 1, 2, {}, std::nullopt};
  for (int i = 0; i < 1000; ++i) ds.samples.push_back({std::to_string(i), 0, {rng.normal(), rng.normal()}, std::nullopt});
  EXPECT_NEAR(compute_centroids(ds).radii[0], oracle, 0.15);
}

TEST(EquivalencePartitioning, SkewedCounts) {
  FeatureDataset ds{"ep", 4, 1, {}, std::nullopt};
  const int counts[] = {40, 30, 20, 10};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < counts[c]; ++i) ds.samples.push_back({std::to_string(ds.size()), c, {0.0}, std::nullopt});
  }
  EXPECT_EQ(equivalence_partitioning(ds), (Vector{1.6, 1.2, 0.8, 0.4}));
}

TEST(EquivalencePartitioning, BalancedIsExactlyOne) {
  FeatureDataset ds{"ep", 10, 1, {}, std::nullopt};
  for (int i = 0; i < 10000; ++i) ds.samples.push_back({std::to_string(i), i % 10, {0.0}, std::nullopt});
  EXPECT_EQ(equivalence_partitioning(ds), Vector(10, 1.0));
}

TEST(EquivalencePartitioning, AbsentClassAndEmptyDataset) {
  FeatureDataset ds{"ep", 2, 1, {}, std::nullopt};
  for (int i = 0; i < 10; ++i) ds.samples.push_back({std::to_string(i), 1, {0.0}, std::nullopt});
  EXPECT_EQ(equivalence_partitioning(ds), (Vector{0.0, 2.0}));
  ds.samples.clear();
  EXPECT_THROW(equivalence_partitioning(ds), Error);
}

TEST(NormalizedDistance, Identities) {
  CentroidModel cm{Matrix(1, 2), {5.0}, "train"};
  EXPECT_EQ(normalized_distance(Vector{0, 0}, 0, cm), 0.0);
  EXPECT_DOUBLE_EQ(normalized_distance(Vector{3, 4}, 0, cm), 1.0);
  EXPECT_DOUBLE_EQ(normalized_distance(Vector{0, 5}, 0, cm), 1.0);
}

TEST(CentroidPositioning, AllAtCentroidAndZeroRadius) {
  const auto train = points(1, 2, {{0, {1, 1}}, {0, {3, 1}}});
  const auto cm = compute_centroids(train);
  const auto at_centroid = points(1, 2, {{0, {2, 1}}, {0, {2, 1}}});
  MetricConfig cfg;
  EXPECT_EQ(centroid_positioning(at_centroid, cm, cfg)[0], 1.0);
  cfg.r = 0.0;
  EXPECT_EQ(centroid_positioning(train, cm, cfg)[0], 0.0);
}

TEST(CentroidPositioning, EmptyTestClassReportsZero) {
  const auto train = points(2, 1, {{0, {0}}, {1, {4}}});
  const auto test = points(2, 1, {{0, {0.1}}});
  const auto cp = centroid_positioning(test, compute_centroids(train), MetricConfig{});
  EXPECT_EQ(cp[1], 0.0);
  MetricConfig cfg;
  const auto q = quality_report(train, test, cfg, BoundaryMode::IfAvailable);
  EXPECT_EQ(q.undefined_classes, (std::vector<std::size_t>{1}));
}

TEST(CentroidPositioning, TwoBlobsMatchDirectCountAndChiLaw) {
  auto spec = BlobSpec::axis_aligned(2, 2, 5.0, 1.0, 500, 1, 17);
  spec.centers = Matrix(2, 2);
  spec.centers(0, 0) = 5.0;
  spec.centers(1, 0) = -5.0;
  const auto blobs = make_blobs(spec).first;
  MetricConfig cfg;
  const auto cp = centroid_positioning(blobs, compute_centroids(blobs), cfg);
  const auto direct = oracle::compute(blobs, blobs, cfg.r, cfg.theta1, cfg.theta2);
  EXPECT_EQ(cp, direct.cp);
  // For a 2-D unit Gaussian with R at the 95th percentile of chi(2),
  // P(d <= r R) = 1 - 0.05^(r^2).
  const double law = 1.0 - std::pow(0.05, cfg.r * cfg.r);
  for (double v : cp) EXPECT_NEAR(v, law, 0.05);
}

TEST(BoundaryConditioning, ConfidentClassIsZero) {
  const auto ds = with_confidences(2, {{0, {0.99, 0.01}}, {0, {0.98, 0.02}}});
  EXPECT_EQ(boundary_conditioning(ds, MetricConfig{})[0], 0.0);
}

TEST(BoundaryConditioning, ClosedIntervalCount) {
  const auto ds = with_confidences(2, {{0, {0.5, 0.5}}, {0, {0.9, 0.1}}, {0, {0.55, 0.45}}, {0, {0.4, 0.6}}});
  // top-1 values: 0.5, 0.9, 0.55, 0.6 -> three inside [0.4, 0.6]
  EXPECT_EQ(boundary_conditioning(ds, MetricConfig{})[0], 0.75);
}

TEST(BoundaryConditioning, FullIntervalCoversEverything) {
  Rng rng(3);
  const auto ds = testing::random_dataset(rng, 4, 2, 200, true);
  MetricConfig cfg;
  cfg.theta1 = 0.0;
  cfg.theta2 = 1.0;
  EXPECT_EQ(boundary_conditioning(ds, cfg), Vector(4, 1.0));
}

TEST(BoundaryConditioning, MissingConfidencesThrows) {
  const auto ds = points(2, 1, {{0, {0}}});
  try {
    boundary_conditioning(ds, MetricConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingConfidences);
  }
  EXPECT_THROW(pairwise_boundary_conditioning(ds, MetricConfig{}), Error);
}

TEST(PairwiseBoundary, NoBoundarySamplesGivesZeroMatrix) {
  const auto ds = with_confidences(3, {{0, {0.9, 0.05, 0.05}}, {1, {0.1, 0.8, 0.1}}, {2, {0, 0, 1}}});
  EXPECT_EQ(pairwise_boundary_conditioning(ds, MetricConfig{}), Matrix(3, 3));
}

TEST(PairwiseBoundary, TwoClassesShareOnePairValue) {
  const auto ds = with_confidences(2, {{0, {0.5, 0.5}},
                                       {0, {0.9, 0.1}},
                                       {0, {0.45, 0.55}},
                                       {1, {0.42, 0.58}},
                                       {1, {0.2, 0.8}}});
  const auto pbc = pairwise_boundary_conditioning(ds, MetricConfig{});
  // b0 = 2, b1 = 1, ns0 + ns1 = 5
  EXPECT_DOUBLE_EQ(pbc(0, 1), 3.0 / 5.0);
  EXPECT_EQ(pbc(0, 1), pbc(1, 0));
  EXPECT_EQ(pbc(0, 0), 0.0);
  EXPECT_EQ(pbc(1, 1), 0.0);
}

TEST(PairwiseBoundary, OverlappingPairAndDistantClass) {
  auto spec = BlobSpec::axis_aligned(3, 2, 1.0, 1.0, 300, 300, 8);
  spec.centers = Matrix(3, 2);
  spec.centers(0, 0) = -0.5;
  spec.centers(1, 0) = 0.5;
  spec.centers(2, 1) = 40.0;
  const auto [train, test] = make_blobs(spec);
  const NearestCentroidSoftmax provider(compute_centroids(train).centroids);
  const auto scored = predict_confidences(provider, test);
  MetricConfig cfg;
  const auto pbc = pairwise_boundary_conditioning(scored, cfg);
  const auto direct = oracle::compute(train, scored, cfg.r, cfg.theta1, cfg.theta2);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(pbc(i, j), direct.pbc[i][j]);
  }
  EXPECT_GT(pbc(0, 1), 0.1);
  EXPECT_LT(pbc(0, 2), 1e-3);
  EXPECT_LT(pbc(1, 2), 1e-3);
}

TEST(QualityReport, SeparatedBlobsWithConfidentClassifier) {
  const auto [train, test] = make_blobs(BlobSpec::axis_aligned(4, 4, 25.0, 1.0, 200, 100, 21));
  const NearestCentroidSoftmax provider(compute_centroids(train).centroids);
  const auto q = quality_report(train, predict_confidences(provider, test), MetricConfig{});
  EXPECT_EQ(q.ep, Vector(4, 1.0));
  ASSERT_TRUE(q.bc.has_value());
  for (double v : *q.bc) EXPECT_LE(v, 0.05);
  EXPECT_TRUE(q.undefined_classes.empty());
}

TEST(QualityReport, OnePointPerClassIsItsOwnCentroid) {
  const auto ds = points(3, 2, {{0, {0, 0}}, {1, {5, 1}}, {2, {-3, 8}}});
  const auto q = quality_report(ds, ds, MetricConfig{}, BoundaryMode::IfAvailable);
  EXPECT_EQ(q.cp, Vector(3, 1.0));
  EXPECT_FALSE(q.bc.has_value());
}

TEST(QualityReport, ShapeMismatchAndMissingConfidences) {
  const auto a = points(2, 2, {{0, {0, 0}}, {1, {1, 1}}});
  const auto b = points(2, 3, {{0, {0, 0, 0}}, {1, {1, 1, 1}}});
  try {
    quality_report(a, b, MetricConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  try {
    quality_report(a, a, MetricConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingConfidences);
  }
}

// ---------------------------------------------------------------------------
// Properties over random datasets.

TEST(MetricProperties, EquivalencePartitioningWeightedIdentity) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nc = 1 + rng.index(8);
    const auto ds = testing::random_dataset(rng, nc, 1, 1 + rng.index(300), false);
    const auto ep = equivalence_partitioning(ds);
    const auto st = stats(ds);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double n = static_cast<double>(st.per_class_counts[c]);
      lhs += ep[c] * n;
      rhs += n * n;
    }
    rhs *= static_cast<double>(nc) / static_cast<double>(st.total);
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, rhs));
  }
}

TEST(MetricProperties, CentroidPositioningMonotoneInRadius) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nc = 1 + rng.index(5);
    auto train = testing::random_dataset(rng, nc, 1 + rng.index(4), 60, false);
    for (std::size_t c = 0; c < nc; ++c) train.samples[c].label = static_cast<int>(c);
    const auto test = testing::random_dataset(rng, nc, train.feature_dim, 80, false);
    const auto cm = compute_centroids(train);
    MetricConfig lo, hi;
    lo.r = 2.0 * rng.uniform();
    hi.r = lo.r + 2.0 * rng.uniform();
    const auto a = centroid_positioning(test, cm, lo);
    const auto b = centroid_positioning(test, cm, hi);
    for (std::size_t c = 0; c < nc; ++c) EXPECT_LE(a[c], b[c]);
  }
}

TEST(MetricProperties, BoundaryMonotoneUnderWidening) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = testing::random_dataset(rng, 2 + rng.index(5), 1, 100, true);
    MetricConfig narrow;
    narrow.theta1 = 0.2 + 0.3 * rng.uniform();
    narrow.theta2 = narrow.theta1 + 0.3 * rng.uniform() + 1e-3;
    MetricConfig wide = narrow;
    wide.theta1 = narrow.theta1 * rng.uniform();
    wide.theta2 = narrow.theta2 + (1.0 - narrow.theta2) * rng.uniform();
    const auto a = boundary_conditioning(ds, narrow);
    const auto b = boundary_conditioning(ds, wide);
    for (std::size_t c = 0; c < a.size(); ++c) EXPECT_LE(a[c], b[c]);
  }
}

TEST(MetricProperties, PairCountsSumToBoundaryCount) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ds = testing::random_dataset(rng, 2 + rng.index(6), 1, 150, true);
    MetricConfig cfg;
    const auto counts = pairwise_boundary_counts(ds, cfg);
    const auto bc = boundary_conditioning(ds, cfg);
    const auto st = stats(ds);
    const auto pbc = pairwise_boundary_conditioning(ds, cfg);
    for (std::size_t i = 0; i < ds.num_classes; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < ds.num_classes; ++j) row += counts(i, j);
      EXPECT_EQ(counts(i, i), 0.0);
      EXPECT_EQ(row, std::round(bc[i] * static_cast<double>(st.per_class_counts[i])));
      EXPECT_EQ(pbc(i, i), 0.0);
      for (std::size_t j = 0; j < ds.num_classes; ++j) EXPECT_EQ(pbc(i, j), pbc(j, i));
    }
  }
}

TEST(MetricProperties, RigidTransformAndScalingInvariance) {
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nc = 2 + rng.index(4);
    auto train = testing::random_dataset(rng, nc, 2, 80, false);
    for (std::size_t c = 0; c < nc; ++c) train.samples[c].label = static_cast<int>(c);
    const auto test = testing::random_dataset(rng, nc, 2, 60, true);
    MetricConfig cfg;
    const auto base = quality_report(train, test, cfg);

    const double angle = 6.283 * rng.uniform();
    const double shift_x = 50.0 * rng.normal(), shift_y = 50.0 * rng.normal();
    const double scale = 0.1 + 10.0 * rng.uniform();
    auto moved = [&](FeatureDataset ds, bool rigid) {
      for (auto& s : ds.samples) {
        const double x = s.features[0], y = s.features[1];
        if (rigid) {
          s.features = {std::cos(angle) * x - std::sin(angle) * y + shift_x,
                        std::sin(angle) * x + std::cos(angle) * y + shift_y};
        } else {
          s.features = {scale * x, scale * y};
        }
      }
      return ds;
    };
    for (bool rigid : {true, false}) {
      const auto q = quality_report(moved(train, rigid), moved(test, rigid), cfg);
      for (std::size_t c = 0; c < nc; ++c) {
        // Only counts at the exact threshold could flip; none are expected.
        EXPECT_NEAR(q.cp[c], base.cp[c], 1e-12);
      }
      EXPECT_EQ(q.ep, base.ep);
      EXPECT_EQ(q.bc, base.bc);
      EXPECT_EQ(q.pbc, base.pbc);
    }
  }
}

TEST(MetricProperties, SmallInstancesMatchDirectCount) {
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nc = 1 + rng.index(5);
    auto train = testing::random_dataset(rng, nc, 1 + rng.index(3), 10 + rng.index(40), false);
    for (std::size_t c = 0; c < nc; ++c) train.samples[c].label = static_cast<int>(c);
    const auto test = testing::random_dataset(rng, nc, train.feature_dim, 1 + rng.index(50), true);
    MetricConfig cfg;
    cfg.r = 1.5 * rng.uniform();
    const auto q = quality_report(train, test, cfg);
    const auto o = oracle::compute(train, test, cfg.r, cfg.theta1, cfg.theta2);
    EXPECT_EQ(q.ep, o.ep);
    EXPECT_EQ(q.cp, o.cp);
    EXPECT_EQ(*q.bc, o.bc);
    for (std::size_t i = 0; i < nc; ++i) {
      for (std::size_t j = 0; j < nc; ++j) EXPECT_EQ((*q.pbc)(i, j), o.pbc[i][j]);
    }
  }
}

}  // namespace
}  // namespace covcheck
