#pragma once

// Reference confidence providers and synthetic blob data, enough to drive the
// whole analysis without an external deep-learning runtime.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "covcheck/error.hpp"
#include "covcheck/featureset.hpp"
#include "covcheck/linalg.hpp"
#include "covcheck/rng.hpp"

namespace covcheck {

/// Maps a feature vector to a normalized class-probability vector.
class ConfidenceProvider {
 public:
  virtual ~ConfidenceProvider() = default;

  virtual std::size_t num_classes() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual Vector probabilities(std::span<const double> x) const = 0;
  virtual std::string name() const = 0;

  /// Argmax of `probabilities`, lowest index on ties.
  std::size_t predict(std::span<const double> x) const { return argmax(probabilities(x)); }
};

/// In-place softmax; subtracts the max logit first.
inline void softmax_inplace(std::span<double> logits) {
  double peak = -INFINITY;
  for (double v : logits) peak = std::max(peak, v);
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : logits) v /= total;
}

/// p_i proportional to exp(-||x - c_i|| / tau). Plain distance, not squared.
class NearestCentroidSoftmax final : public ConfidenceProvider {
 public:
  explicit NearestCentroidSoftmax(Matrix centroids, double temperature = 1.0)
      : centroids_(std::move(centroids)), temperature_(temperature) {
    if (!(temperature_ > 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
  }

  std::size_t num_classes() const override { return centroids_.rows(); }
  std::size_t feature_dim() const override { return centroids_.cols(); }
  std::string name() const override { return "centroid"; }

  Vector probabilities(std::span<const double> x) const override {
    Vector logits(centroids_.rows());
    for (std::size_t c = 0; c < logits.size(); ++c) {
      logits[c] = -euclidean_distance(x, centroids_.row(c)) / temperature_;
    }
    softmax_inplace(logits);
    return logits;
  }

  const Matrix& centroids() const noexcept { return centroids_; }
  double temperature() const noexcept { return temperature_; }

 private:
  Matrix centroids_;
  double temperature_;
};

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::uint64_t seed = 42;

  bool operator==(const LogisticConfig&) const = default;
};

/// Multinomial logistic regression on raw features.
class LogisticModel final : public ConfidenceProvider {
 public:
  LogisticModel() = default;
  LogisticModel(Matrix weights, Vector biases) : weights_(std::move(weights)), biases_(std::move(biases)) {}

  std::size_t num_classes() const override { return weights_.rows(); }
  std::size_t feature_dim() const override { return weights_.cols(); }
  std::string name() const override { return "logistic"; }

  Vector logits(std::span<const double> x) const {
    Vector z(biases_);
    for (std::size_t c = 0; c < z.size(); ++c) {
      const auto w = weights_.row(c);
      for (std::size_t d = 0; d < w.size(); ++d) z[c] += w[d] * x[d];
    }
    return z;
  }

  Vector probabilities(std::span<const double> x) const override {
    Vector z = logits(x);
    softmax_inplace(z);
    return z;
  }

  Matrix& weights() noexcept { return weights_; }
  const Matrix& weights() const noexcept { return weights_; }
  Vector& biases() noexcept { return biases_; }
  const Vector& biases() const noexcept { return biases_; }

  LogisticConfig training;
  double final_loss = 0.0;

 private:
  Matrix weights_;
  Vector biases_;
};

struct LogisticGradient {
  double loss = 0.0;
  Matrix weights;
  Vector biases;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2 (biases unpenalized), and its gradient.
inline LogisticGradient logistic_loss_and_gradient(const LogisticModel& model, const FeatureDataset& data, double l2) {
  const std::size_t nc = model.num_classes();
  const std::size_t dim = model.feature_dim();
  LogisticGradient g{0.0, Matrix(nc, dim), Vector(nc, 0.0)};
  if (data.empty()) return g;
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (const auto& s : data.samples) {
    Vector z = model.logits(s.features);
    const double lse = log_sum_exp(z);
    const auto y = static_cast<std::size_t>(s.label);
    g.loss += (lse - z[y]) * inv_n;
    for (std::size_t c = 0; c < nc; ++c) {
      const double residual = (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0)) * inv_n;
      g.biases[c] += residual;
      auto row = g.weights.row(c);
      for (std::size_t d = 0; d < dim; ++d) row[d] += residual * s.features[d];
    }
  }
  const auto& w = model.weights().data();
  auto& gw = g.weights.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    g.loss += 0.5 * l2 * w[i] * w[i];
    gw[i] += l2 * w[i];
  }
  return g;
}

/// Full-batch gradient descent from zero weights. Features are standardized
/// internally and the solution is folded back into raw-feature weights, so
/// the stored model applies to unscaled inputs. The L2 penalty acts on the
/// standardized weights.
inline LogisticModel train_logistic(const FeatureDataset& train, const LogisticConfig& cfg = {}) {
  const std::size_t nc = train.num_classes;
  const std::size_t dim = train.feature_dim;
  std::vector<bool> present(nc, false);
  std::size_t distinct = 0;
  for (const auto& s : train.samples) {
    auto c = static_cast<std::size_t>(s.label);
    if (!present[c]) {
      present[c] = true;
      ++distinct;
    }
  }
  if (distinct < 2) throw Error(ErrorKind::DegenerateLabels, "logistic training needs at least two classes");

  Vector mean(dim, 0.0);
  Vector scale(dim, 0.0);
  for (const auto& s : train.samples) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += s.features[d];
  }
  for (double& m : mean) m /= static_cast<double>(train.size());
  for (const auto& s : train.samples) {
    for (std::size_t d = 0; d < dim; ++d) scale[d] += (s.features[d] - mean[d]) * (s.features[d] - mean[d]);
  }
  for (double& v : scale) {
    v = std::sqrt(v / static_cast<double>(train.size()));
    if (!(v > 1e-12)) v = 1.0;
  }
  FeatureDataset standardized = train;
  for (auto& s : standardized.samples) {
    s.confidence.reset();
    for (std::size_t d = 0; d < dim; ++d) s.features[d] = (s.features[d] - mean[d]) / scale[d];
  }

  LogisticModel work(Matrix(nc, dim), Vector(nc, 0.0));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto g = logistic_loss_and_gradient(work, standardized, cfg.l2);
    auto& w = work.weights().data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * g.weights.data()[i];
    for (std::size_t c = 0; c < nc; ++c) work.biases()[c] -= cfg.learning_rate * g.biases[c];
  }

  Matrix raw_weights(nc, dim);
  Vector raw_biases(work.biases());
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t d = 0; d < dim; ++d) {
      raw_weights(c, d) = work.weights()(c, d) / scale[d];
      raw_biases[c] -= raw_weights(c, d) * mean[d];
    }
  }
  LogisticModel model(std::move(raw_weights), std::move(raw_biases));
  model.training = cfg;
  model.final_loss = logistic_loss_and_gradient(work, standardized, cfg.l2).loss;
  return model;
}

inline constexpr const char* kModelFormat = "covcheck-logistic";
inline constexpr int kModelVersion = 1;

inline nlohmann::json to_json(const LogisticModel& model) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["feature_dim"] = model.feature_dim();
  j["num_classes"] = model.num_classes();
  j["weights"] = model.weights().data();
  j["biases"] = model.biases();
  j["training"] = {{"learning_rate", model.training.learning_rate},
                   {"epochs", model.training.epochs},
                   {"l2", model.training.l2},
                   {"seed", model.training.seed},
                   {"final_loss", model.final_loss}};
  return j;
}

inline LogisticModel logistic_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat || j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorKind::SchemaError, "unsupported model format or version");
    }
    const auto dim = j.at("feature_dim").get<std::size_t>();
    const auto nc = j.at("num_classes").get<std::size_t>();
    auto flat = j.at("weights").get<std::vector<double>>();
    auto biases = j.at("biases").get<std::vector<double>>();
    if (flat.size() != nc * dim || biases.size() != nc) {
      throw Error(ErrorKind::SchemaError, "model weights do not match num_classes x feature_dim");
    }
    Matrix w(nc, dim);
    w.data() = std::move(flat);
    LogisticModel model(std::move(w), std::move(biases));
    const auto& t = j.at("training");
    model.training.learning_rate = t.at("learning_rate").get<double>();
    model.training.epochs = t.at("epochs").get<std::size_t>();
    model.training.l2 = t.at("l2").get<double>();
    model.training.seed = t.at("seed").get<std::uint64_t>();
    model.final_loss = t.at("final_loss").get<double>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("model.json: ") + e.what());
  }
}

inline void save_model(const LogisticModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

inline LogisticModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error(ErrorKind::MissingFile, path.string() + " not found");
  std::ifstream in(path, std::ios::binary);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("model.json: ") + e.what());
  }
  return logistic_from_json(j);
}

inline void check_provider_shape(const ConfidenceProvider& provider, const FeatureDataset& ds) {
  if (provider.feature_dim() != ds.feature_dim || provider.num_classes() != ds.num_classes) {
    throw Error(ErrorKind::DimensionMismatch,
                "provider '" + provider.name() + "' expects " + std::to_string(provider.num_classes()) + " classes x " +
                    std::to_string(provider.feature_dim()) + " dims, dataset '" + ds.name + "' has " +
                    std::to_string(ds.num_classes) + " x " + std::to_string(ds.feature_dim));
  }
}

/// Copy of `ds` with the provider's confidence vector attached to every sample.
inline FeatureDataset predict_confidences(const ConfidenceProvider& provider, const FeatureDataset& ds) {
  check_provider_shape(provider, ds);
  FeatureDataset out = ds;
  for (auto& s : out.samples) s.confidence = provider.probabilities(s.features);
  return out;
}

inline double accuracy(const ConfidenceProvider& provider, const FeatureDataset& ds) {
  if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "accuracy of an empty dataset is undefined");
  check_provider_shape(provider, ds);
  std::size_t hits = 0;
  for (const auto& s : ds.samples) {
    if (provider.predict(s.features) == static_cast<std::size_t>(s.label)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

struct BlobSpec {
  std::size_t num_classes = 2;
  std::size_t feature_dim = 2;
  Matrix centers;  // nc x D
  Vector sigmas;   // nc
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 100;
  std::uint64_t seed = 42;
  std::string name = "blobs";

  /// Class c centered at +/- separation along axis (c mod D); sign flips for
  /// every further wrap around the axes.
  static BlobSpec axis_aligned(std::size_t nc, std::size_t dim, double separation, double sigma,
                               std::size_t train_per_class, std::size_t test_per_class, std::uint64_t seed) {
    BlobSpec spec;
    spec.num_classes = nc;
    spec.feature_dim = dim;
    spec.centers = Matrix(nc, dim);
    for (std::size_t c = 0; c < nc; ++c) {
      const double sign = (c / dim) % 2 == 0 ? 1.0 : -1.0;
      spec.centers(c, c % dim) = sign * separation * static_cast<double>(1 + c / (2 * dim));
    }
    spec.sigmas.assign(nc, sigma);
    spec.train_per_class = train_per_class;
    spec.test_per_class = test_per_class;
    spec.seed = seed;
    return spec;
  }
};

namespace detail {

inline FeatureDataset draw_blobs(const BlobSpec& spec, std::size_t per_class, std::uint64_t seed,
                                 const std::string& split) {
  Rng rng(seed);
  FeatureDataset ds;
  ds.name = spec.name + "-" + split;
  ds.num_classes = spec.num_classes;
  ds.feature_dim = spec.feature_dim;
  ds.samples.reserve(per_class * spec.num_classes);
  std::size_t counter = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::ostringstream id;
      id << split << '-' << std::setw(6) << std::setfill('0') << counter++;
      Sample s;
      s.id = id.str();
      s.label = static_cast<int>(c);
      s.features.resize(spec.feature_dim);
      for (std::size_t d = 0; d < spec.feature_dim; ++d) {
        s.features[d] = spec.centers(c, d) + spec.sigmas[c] * rng.normal();
      }
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace detail

/// Isotropic Gaussian clusters; train and test come from independent sub-seeds.
inline std::pair<FeatureDataset, FeatureDataset> make_blobs(const BlobSpec& spec) {
  if (spec.num_classes < 1 || spec.feature_dim < 1 || spec.centers.rows() != spec.num_classes ||
      spec.centers.cols() != spec.feature_dim || spec.sigmas.size() != spec.num_classes) {
    throw Error(ErrorKind::InvalidConfig, "blob spec shape is inconsistent");
  }
  for (double s : spec.sigmas) {
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidConfig, "blob sigma must be positive");
  }
  if (spec.train_per_class < 1 || spec.test_per_class < 1) {
    throw Error(ErrorKind::InvalidConfig, "blob sample counts must be >= 1");
  }
  return {detail::draw_blobs(spec, spec.train_per_class, derive_seed(spec.seed, 0), "train"),
          detail::draw_blobs(spec, spec.test_per_class, derive_seed(spec.seed, 1), "test")};
}

}  // namespace covcheck
