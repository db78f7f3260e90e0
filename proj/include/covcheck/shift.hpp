#pragma once

// Per-class covariate shift: diagonal Gaussian mixtures fitted by EM on the
// train and test features of each class, compared with a Monte Carlo
// Jensen-Shannon divergence in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "covcheck/error.hpp"
#include "covcheck/featureset.hpp"
#include "covcheck/linalg.hpp"
#include "covcheck/rng.hpp"

namespace covcheck {

inline constexpr double kVarianceFloor = 1e-6;

struct GaussianMixture {
  Vector weights;    // k
  Matrix means;      // k x D
  Matrix variances;  // k x D, diagonal covariances

  std::size_t components() const noexcept { return weights.size(); }
  std::size_t feature_dim() const noexcept { return means.cols(); }

  bool operator==(const GaussianMixture&) const = default;
};

struct ShiftConfig {
  std::size_t components = 10;
  std::size_t max_iters = 200;
  double tol = 1e-6;
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 42;

  void check() const {
    if (components < 1) throw Error(ErrorKind::InvalidConfig, "components must be >= 1");
    if (mc_samples < 1000) throw Error(ErrorKind::InvalidConfig, "mc_samples must be >= 1000");
    if (!(tol >= 0.0)) throw Error(ErrorKind::InvalidConfig, "tol must be non-negative");
  }

  bool operator==(const ShiftConfig&) const = default;
};

struct ShiftReport {
  Vector per_class_js;
  Vector standard_error;
  std::vector<std::size_t> undefined_classes;
  ShiftConfig config;

  bool operator==(const ShiftReport&) const = default;
};

struct GmmFit {
  GaussianMixture model;
  /// Log-likelihood of the data under the parameters at each E-step.
  std::vector<double> log_likelihood;
  bool converged = false;
};

struct JsEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

namespace detail {

inline const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Per-component log(w_j) + log N(x; mu_j, diag var_j).
inline void component_log_terms(const GaussianMixture& gmm, std::span<const double> x, std::span<double> out) {
  const std::size_t dim = gmm.feature_dim();
  for (std::size_t j = 0; j < gmm.components(); ++j) {
    if (!(gmm.weights[j] > 0.0)) {
      out[j] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const auto mu = gmm.means.row(j);
    const auto var = gmm.variances.row(j);
    double acc = std::log(gmm.weights[j]);
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = x[d] - mu[d];
      acc -= 0.5 * (kLog2Pi + std::log(var[d]) + diff * diff / var[d]);
    }
    out[j] = acc;
  }
}

inline Matrix kmeanspp_seeds(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix seeds;
  seeds.append_row(points.row(rng.index(n)));
  Vector nearest(n, std::numeric_limits<double>::infinity());
  while (seeds.rows() < k) {
    const auto last = seeds.row(seeds.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(points.row(i), last));
    seeds.append_row(points.row(rng.categorical(nearest)));
  }
  return seeds;
}

}  // namespace detail

inline double gmm_log_density(const GaussianMixture& gmm, std::span<const double> x) {
  Vector terms(gmm.components());
  detail::component_log_terms(gmm, x, terms);
  return log_sum_exp(terms);
}

/// Posterior component probabilities for one point; they sum to one.
inline Vector gmm_responsibilities(const GaussianMixture& gmm, std::span<const double> x) {
  Vector terms(gmm.components());
  detail::component_log_terms(gmm, x, terms);
  const double total = log_sum_exp(terms);
  for (double& t : terms) t = std::exp(t - total);
  return terms;
}

/// EM for a diagonal-covariance mixture with k-means++ seeding.
inline GmmFit fit_gmm_traced(const Matrix& points, const ShiftConfig& cfg) {
  if (points.empty()) throw Error(ErrorKind::EmptyInput, "cannot fit a mixture to zero points");
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  const std::size_t k = std::min(cfg.components, n);
  Rng rng(cfg.seed);

  Vector global_mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) global_mean[d] += points(i, d);
  }
  for (double& m : global_mean) m /= static_cast<double>(n);
  Vector global_var(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = points(i, d) - global_mean[d];
      global_var[d] += diff * diff;
    }
  }
  for (double& v : global_var) v = std::max(v / static_cast<double>(n), kVarianceFloor);

  GmmFit fit;
  auto& gmm = fit.model;
  gmm.weights.assign(k, 1.0 / static_cast<double>(k));
  gmm.means = detail::kmeanspp_seeds(points, k, rng);
  gmm.variances = Matrix(k, dim);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t d = 0; d < dim; ++d) gmm.variances(j, d) = global_var[d];
  }

  Matrix resp(n, k);
  Vector terms(k);
  for (std::size_t iter = 0;; ++iter) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      detail::component_log_terms(gmm, points.row(i), terms);
      const double total = log_sum_exp(terms);
      ll += total;
      for (std::size_t j = 0; j < k; ++j) resp(i, j) = std::exp(terms[j] - total);
    }
    if (!fit.log_likelihood.empty()) {
      const double prev = fit.log_likelihood.back();
      const double gain = (ll - prev) / std::max(std::abs(prev), std::numeric_limits<double>::min());
      fit.log_likelihood.push_back(ll);
      if (gain < cfg.tol) {
        fit.converged = true;
        break;
      }
    } else {
      fit.log_likelihood.push_back(ll);
    }
    if (iter >= cfg.max_iters) break;

    for (std::size_t j = 0; j < k; ++j) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += resp(i, j);
      gmm.weights[j] = mass / static_cast<double>(n);
      if (!(mass > 0.0)) continue;  // dead component: keep its location, weight 0
      auto mu = gmm.means.row(j);
      std::fill(mu.begin(), mu.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) mu[d] += resp(i, j) * points(i, d);
      }
      for (double& m : mu) m /= mass;
      auto var = gmm.variances.row(j);
      std::fill(var.begin(), var.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = points(i, d) - mu[d];
          var[d] += resp(i, j) * diff * diff;
        }
      }
      for (double& v : var) v = std::max(v / mass, kVarianceFloor);
    }
  }
  return fit;
}

inline GaussianMixture fit_gmm(const Matrix& points, const ShiftConfig& cfg) {
  return fit_gmm_traced(points, cfg).model;
}

inline Matrix sample_gmm(const GaussianMixture& gmm, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t dim = gmm.feature_dim();
  Matrix out(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = rng.categorical(gmm.weights);
    for (std::size_t d = 0; d < dim; ++d) {
      out(i, d) = gmm.means(j, d) + std::sqrt(gmm.variances(j, d)) * rng.normal();
    }
  }
  return out;
}

namespace detail {

/// log2(a / m) with m = (a + b) / 2, from natural-log densities.
/// Identical inputs give exactly 0.
inline double log2_ratio_to_midpoint(double log_a, double log_b) {
  if (log_a == log_b) return 0.0;
  const double delta = log_b - log_a;
  if (delta > 0.0) {
    return 1.0 - (delta / std::numbers::ln2 + std::log2(1.0 + std::exp(-delta)));
  }
  return 1.0 - std::log2(1.0 + std::exp(delta));
}

struct RunningMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

}  // namespace detail

/// Jensen-Shannon divergence in bits, so the true value lies in [0, 1].
inline JsEstimate js_divergence(const GaussianMixture& p, const GaussianMixture& q, const ShiftConfig& cfg) {
  if (p.feature_dim() != q.feature_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "mixtures have different dimensionality");
  }
  const Matrix from_p = sample_gmm(p, cfg.mc_samples, derive_seed(cfg.seed, 1));
  const Matrix from_q = sample_gmm(q, cfg.mc_samples, derive_seed(cfg.seed, 2));
  detail::RunningMoments mp;
  detail::RunningMoments mq;
  for (std::size_t i = 0; i < from_p.rows(); ++i) {
    const auto x = from_p.row(i);
    mp.add(detail::log2_ratio_to_midpoint(gmm_log_density(p, x), gmm_log_density(q, x)));
  }
  for (std::size_t i = 0; i < from_q.rows(); ++i) {
    const auto x = from_q.row(i);
    mq.add(detail::log2_ratio_to_midpoint(gmm_log_density(q, x), gmm_log_density(p, x)));
  }
  const double raw = 0.5 * mp.mean + 0.5 * mq.mean;
  const double se = std::sqrt(0.25 * mp.variance() / static_cast<double>(mp.n) +
                              0.25 * mq.variance() / static_cast<double>(mq.n));
  return {std::clamp(raw, 0.0, 1.0), se};
}

/// Per-class JS divergence between mixtures fitted on train and on test.
/// Classes empty on either side are reported as 0 and listed as undefined.
inline ShiftReport covariate_shift(const FeatureDataset& train, const FeatureDataset& test, const ShiftConfig& cfg) {
  cfg.check();
  if (train.num_classes != test.num_classes || train.feature_dim != test.feature_dim) {
    throw Error(ErrorKind::DimensionMismatch, "train and test datasets differ in shape");
  }
  ShiftReport report;
  report.config = cfg;
  report.per_class_js.assign(train.num_classes, 0.0);
  report.standard_error.assign(train.num_classes, 0.0);
  for (std::size_t c = 0; c < train.num_classes; ++c) {
    const Matrix train_points = class_points(train, c);
    const Matrix test_points = class_points(test, c);
    if (train_points.empty() || test_points.empty()) {
      report.undefined_classes.push_back(c);
      continue;
    }
    ShiftConfig class_cfg = cfg;
    class_cfg.seed = derive_seed(cfg.seed, c);
    const auto p = fit_gmm(train_points, class_cfg);
    const auto q = fit_gmm(test_points, class_cfg);
    const auto js = js_divergence(p, q, class_cfg);
    report.per_class_js[c] = js.value;
    report.standard_error[c] = js.standard_error;
  }
  return report;
}

}  // namespace covcheck
