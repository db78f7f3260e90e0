#pragma once

// Test-set quality metrics computed in a model's feature space:
// equivalence partitioning (EP), centroid positioning (CP), boundary
// conditioning (BC) and pairwise boundary conditioning (PBC).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "covcheck/error.hpp"
#include "covcheck/featureset.hpp"
#include "covcheck/linalg.hpp"

namespace covcheck {

/// Percentile of class distances used as the normalization radius.
inline constexpr double kRadiusPercentile = 0.95;

struct CentroidModel {
  Matrix centroids;  // nc x D
  Vector radii;      // nc, strictly positive
  std::string source = "train";

  std::size_t num_classes() const noexcept { return centroids.rows(); }
  std::size_t feature_dim() const noexcept { return centroids.cols(); }

  bool operator==(const CentroidModel&) const = default;
};

struct MetricConfig {
  double r = 0.5;
  double theta1 = 0.40;
  double theta2 = 0.60;

  void check() const {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidConfig, "r must be a non-negative finite value");
    if (!(theta1 >= 0.0 && theta1 < theta2 && theta2 <= 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "need 0 <= theta1 < theta2 <= 1");
    }
  }

  bool operator==(const MetricConfig&) const = default;
};

struct QualityReport {
  std::string dataset_name;
  MetricConfig config;
  std::vector<std::size_t> per_class_counts;
  Vector ep;
  Vector cp;
  std::optional<Vector> bc;
  std::optional<Matrix> pbc;
  /// Unsymmetrized boundary counts: row i, column j counts class-i boundary
  /// samples whose partner class is j.
  std::optional<Matrix> pbc_counts;
  /// Classes with no test samples; their CP/BC entries are 0 and flagged here.
  std::vector<std::size_t> undefined_classes;

  bool operator==(const QualityReport&) const = default;
};

/// Top-1 probability of a confidence vector.
inline double top_confidence(std::span<const double> confidence) {
  return *std::max_element(confidence.begin(), confidence.end());
}

/// Highest-confidence class other than `label`; ties go to the lowest index.
/// For a correctly classified sample this is the runner-up class.
inline std::size_t partner_class(std::span<const double> confidence, std::size_t label) {
  std::size_t best = label == 0 ? 1 : 0;
  for (std::size_t k = 0; k < confidence.size(); ++k) {
    if (k != label && confidence[k] > confidence[best]) best = k;
  }
  return best;
}

inline bool in_band(double confidence, const MetricConfig& cfg) {
  return confidence >= cfg.theta1 && confidence <= cfg.theta2;
}

inline CentroidModel compute_centroids(const FeatureDataset& train, std::string source = "train") {
  const std::size_t nc = train.num_classes;
  const std::size_t dim = train.feature_dim;
  CentroidModel cm{Matrix(nc, dim), Vector(nc, 1.0), std::move(source)};
  std::vector<std::size_t> counts(nc, 0);
  for (const auto& s : train.samples) {
    const auto c = static_cast<std::size_t>(s.label);
    auto row = cm.centroids.row(c);
    for (std::size_t d = 0; d < dim; ++d) row[d] += s.features[d];
    ++counts[c];
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (counts[c] == 0) throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no training samples");
    auto row = cm.centroids.row(c);
    for (double& v : row) v /= static_cast<double>(counts[c]);
  }
  std::vector<Vector> distances(nc);
  for (const auto& s : train.samples) {
    const auto c = static_cast<std::size_t>(s.label);
    distances[c].push_back(euclidean_distance(s.features, cm.centroids.row(c)));
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const double radius = quantile(std::move(distances[c]), kRadiusPercentile);
    cm.radii[c] = radius > 0.0 ? radius : 1.0;
  }
  return cm;
}

inline Vector equivalence_partitioning(const FeatureDataset& test) {
  if (test.empty()) throw Error(ErrorKind::EmptyDataset, "equivalence partitioning needs at least one sample");
  const auto st = stats(test);
  const double ns = static_cast<double>(st.total);
  const double nc = static_cast<double>(test.num_classes);
  Vector ep(test.num_classes);
  for (std::size_t i = 0; i < ep.size(); ++i) {
    ep[i] = (static_cast<double>(st.per_class_counts[i]) * nc) / ns;
  }
  return ep;
}

inline double normalized_distance(std::span<const double> x, std::size_t class_index, const CentroidModel& cm) {
  return euclidean_distance(x, cm.centroids.row(class_index)) / cm.radii[class_index];
}

inline Vector centroid_positioning(const FeatureDataset& test, const CentroidModel& cm, const MetricConfig& cfg) {
  if (cm.num_classes() != test.num_classes || cm.feature_dim() != test.feature_dim) {
    throw Error(ErrorKind::DimensionMismatch, "centroid model does not match test dataset shape");
  }
  std::vector<std::size_t> inside(test.num_classes, 0);
  const auto st = stats(test);
  for (const auto& s : test.samples) {
    const auto c = static_cast<std::size_t>(s.label);
    if (normalized_distance(s.features, c, cm) <= cfg.r) ++inside[c];
  }
  Vector cp(test.num_classes, 0.0);
  for (std::size_t c = 0; c < cp.size(); ++c) {
    if (st.per_class_counts[c] > 0) {
      cp[c] = static_cast<double>(inside[c]) / static_cast<double>(st.per_class_counts[c]);
    }
  }
  return cp;
}

namespace detail {

inline void require_confidences(const FeatureDataset& test) {
  if (!test.has_confidences()) {
    throw Error(ErrorKind::MissingConfidences, "dataset '" + test.name + "' has samples without confidence vectors");
  }
}

}  // namespace detail

inline Vector boundary_conditioning(const FeatureDataset& test, const MetricConfig& cfg) {
  detail::require_confidences(test);
  const auto st = stats(test);
  std::vector<std::size_t> boundary(test.num_classes, 0);
  for (const auto& s : test.samples) {
    if (in_band(top_confidence(*s.confidence), cfg)) ++boundary[static_cast<std::size_t>(s.label)];
  }
  Vector bc(test.num_classes, 0.0);
  for (std::size_t c = 0; c < bc.size(); ++c) {
    if (st.per_class_counts[c] > 0) {
      bc[c] = static_cast<double>(boundary[c]) / static_cast<double>(st.per_class_counts[c]);
    }
  }
  return bc;
}

/// Row i, column j: number of class-i boundary samples whose partner class is j.
inline Matrix pairwise_boundary_counts(const FeatureDataset& test, const MetricConfig& cfg) {
  detail::require_confidences(test);
  const std::size_t nc = test.num_classes;
  Matrix counts(nc, nc);
  if (nc < 2) return counts;
  for (const auto& s : test.samples) {
    const auto& conf = *s.confidence;
    if (!in_band(top_confidence(conf), cfg)) continue;
    const auto label = static_cast<std::size_t>(s.label);
    counts(label, partner_class(conf, label)) += 1.0;
  }
  return counts;
}

/// Symmetrized pair matrix: (count[i][j] + count[j][i]) / (ns_i + ns_j), zero diagonal.
inline Matrix pairwise_boundary_conditioning(const FeatureDataset& test, const MetricConfig& cfg) {
  const Matrix counts = pairwise_boundary_counts(test, cfg);
  const auto st = stats(test);
  const std::size_t nc = test.num_classes;
  Matrix pbc(nc, nc);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = i + 1; j < nc; ++j) {
      const auto denom = st.per_class_counts[i] + st.per_class_counts[j];
      if (denom == 0) continue;
      const double value = (counts(i, j) + counts(j, i)) / static_cast<double>(denom);
      pbc(i, j) = value;
      pbc(j, i) = value;
    }
  }
  return pbc;
}

enum class BoundaryMode {
  Required,     // throw MissingConfidences when confidences are absent
  IfAvailable,  // leave BC/PBC empty instead
};

inline QualityReport quality_report(const FeatureDataset& train, const FeatureDataset& test, const MetricConfig& cfg,
                                    BoundaryMode mode = BoundaryMode::Required) {
  cfg.check();
  if (train.num_classes != test.num_classes || train.feature_dim != test.feature_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "train is " + std::to_string(train.num_classes) + " classes x " + std::to_string(train.feature_dim) +
                    " dims, test is " + std::to_string(test.num_classes) + " x " + std::to_string(test.feature_dim));
  }
  QualityReport report;
  report.dataset_name = test.name;
  report.config = cfg;
  report.per_class_counts = stats(test).per_class_counts;
  const auto cm = compute_centroids(train);
  report.ep = equivalence_partitioning(test);
  report.cp = centroid_positioning(test, cm, cfg);
  if (test.has_confidences()) {
    report.bc = boundary_conditioning(test, cfg);
    report.pbc = pairwise_boundary_conditioning(test, cfg);
    report.pbc_counts = pairwise_boundary_counts(test, cfg);
  } else if (mode == BoundaryMode::Required) {
    detail::require_confidences(test);
  }
  for (std::size_t c = 0; c < report.per_class_counts.size(); ++c) {
    if (report.per_class_counts[c] == 0) report.undefined_classes.push_back(c);
  }
  return report;
}

}  // namespace covcheck
