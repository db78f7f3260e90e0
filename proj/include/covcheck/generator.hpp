#pragma once

// Guided test generation in feature space. Centroid-region points are jittered
// class centroids; boundary-region points start from weakly classified test
// samples and are pushed along the line toward the partner class centroid
// until the partner reaches the middle of the weak-confidence band. Every
// point is re-verified by the provider and keeps its seed's ground truth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "covcheck/classifier.hpp"
#include "covcheck/error.hpp"
#include "covcheck/featureset.hpp"
#include "covcheck/linalg.hpp"
#include "covcheck/metrics.hpp"
#include "covcheck/rng.hpp"

namespace covcheck {

struct GenerationConfig {
  /// Centroid-percentage choices accepted for a single generation run.
  std::vector<double> distribution_grid{0, 20, 30, 50, 70, 80, 100};
  /// Generated-set sizes as a percentage of the test-set size.
  std::vector<double> frequency_grid{10, 25, 50, 75, 100};
  /// Centroid percentages enumerated by `sweep` (one table column each).
  std::vector<double> sweep_splits{0, 30, 50, 70, 100};
  double wc_l = 0.40;
  double sigma_centroid = 0.10;
  double sigma_boundary = 0.02;
  std::size_t max_rejection_iters = 100;
  std::size_t bisection_steps = 30;
  std::uint64_t seed = 42;

  void check(const MetricConfig& metric_cfg) const {
    auto in_range = [](const std::vector<double>& grid) {
      return std::all_of(grid.begin(), grid.end(), [](double v) { return v >= 0.0 && v <= 100.0; });
    };
    if (!in_range(distribution_grid) || !in_range(frequency_grid) || !in_range(sweep_splits)) {
      throw Error(ErrorKind::InvalidConfig, "grid entries must lie in [0, 100]");
    }
    if (!(wc_l < metric_cfg.theta2)) throw Error(ErrorKind::InvalidConfig, "wc_l must be below theta2");
    if (!(sigma_centroid > 0.0) || !(sigma_boundary > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "jitter scales must be positive");
    }
    if (bisection_steps > 30) throw Error(ErrorKind::InvalidConfig, "at most 30 bisection steps");
  }

  bool operator==(const GenerationConfig&) const = default;
};

enum class Region { Centroid, Boundary };

inline const char* to_string(Region region) { return region == Region::Centroid ? "centroid" : "boundary"; }

struct GeneratedSample {
  std::string id;
  Vector features;
  int oracle_label = 0;
  Region region = Region::Centroid;
  std::string seed_id;
  std::optional<std::size_t> pair_class;  // boundary samples only
  double t = 0.0;
  bool verified = false;

  bool operator==(const GeneratedSample&) const = default;
};

struct GeneratedTestSet {
  std::string name;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<GeneratedSample> samples;
  std::size_t requested_total = 0;
  double centroid_pct = 0.0;
  std::size_t achieved_centroid = 0;
  std::size_t achieved_boundary = 0;
  double verification_rate = 0.0;
  /// Classes whose boundary seeds came from the lowest-margin fallback.
  std::vector<std::size_t> fallback_classes;
  GenerationConfig config;

  bool operator==(const GeneratedTestSet&) const = default;
};

struct BoundarySeeds {
  std::vector<std::vector<std::string>> ids;  // per class, ascending margin
  std::vector<bool> fallback;                 // per class
};

/// top-1 minus top-2 confidence.
inline double confidence_margin(std::span<const double> confidence) {
  double first = -INFINITY;
  double second = -INFINITY;
  for (double v : confidence) {
    if (v > first) {
      second = first;
      first = v;
    } else if (v > second) {
      second = v;
    }
  }
  return confidence.size() < 2 ? first : first - second;
}

/// Per class: samples whose top-1 confidence lies in [wc_l, theta2], lowest
/// margin first. A class with none falls back to all of its samples ordered
/// the same way.
inline BoundarySeeds select_boundary_seeds(const FeatureDataset& test, const GenerationConfig& cfg,
                                           const MetricConfig& metric_cfg) {
  detail::require_confidences(test);
  const std::size_t nc = test.num_classes;
  struct Candidate {
    double margin;
    std::size_t order;
    bool weak;
  };
  std::vector<std::vector<Candidate>> per_class(nc);
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    const auto& s = test.samples[i];
    const auto& conf = *s.confidence;
    const double top = top_confidence(conf);
    per_class[static_cast<std::size_t>(s.label)].push_back(
        {confidence_margin(conf), i, top >= cfg.wc_l && top <= metric_cfg.theta2});
  }
  BoundarySeeds out;
  out.ids.resize(nc);
  out.fallback.assign(nc, false);
  for (std::size_t c = 0; c < nc; ++c) {
    auto& cands = per_class[c];
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.margin < b.margin; });
    const bool any_weak = std::any_of(cands.begin(), cands.end(), [](const Candidate& k) { return k.weak; });
    out.fallback[c] = !any_weak;
    for (const auto& k : cands) {
      if (k.weak || !any_weak) out.ids[c].push_back(test.samples[k.order].id);
    }
  }
  return out;
}

namespace detail {

inline void add_jitter(std::span<const double> center, double scale, Rng& rng, std::span<double> out) {
  for (std::size_t d = 0; d < center.size(); ++d) out[d] = center[d] + scale * rng.normal();
}

inline void interpolate(std::span<const double> from, std::span<const double> to, double t, std::span<double> out) {
  for (std::size_t d = 0; d < from.size(); ++d) out[d] = (1.0 - t) * from[d] + t * to[d];
}

}  // namespace detail

/// Moves `seed` toward the centroid of its partner class j (the strongest
/// class other than its label) until p_j reaches the centre of
/// [theta1, theta2], then jitters with scale sigma_boundary * R_label and keeps
/// the first draw whose top-1 confidence lies in the band. If no draw is
/// accepted the un-jittered point is returned with verified = false.
inline GeneratedSample generate_boundary_sample(const Sample& seed, const CentroidModel& cm,
                                                const ConfidenceProvider& provider, const GenerationConfig& cfg,
                                                const MetricConfig& metric_cfg, Rng& rng) {
  if (!seed.confidence) throw Error(ErrorKind::MissingConfidences, "seed '" + seed.id + "' has no confidence vector");
  if (cm.num_classes() < 2) throw Error(ErrorKind::InvalidConfig, "boundary generation needs at least two classes");
  const auto label = static_cast<std::size_t>(seed.label);
  const std::size_t partner = partner_class(*seed.confidence, label);
  const auto target = cm.centroids.row(partner);
  const double centre = 0.5 * (metric_cfg.theta1 + metric_cfg.theta2);

  Vector x(seed.features.size());
  auto partner_prob = [&](double t) {
    detail::interpolate(seed.features, target, t, x);
    return provider.probabilities(x)[partner];
  };

  double t = 0.0;
  if (partner_prob(0.0) < centre) {
    if (partner_prob(1.0) < centre) {
      t = 1.0;
    } else {
      double lo = 0.0;
      double hi = 1.0;
      for (std::size_t step = 0; step < cfg.bisection_steps; ++step) {
        const double mid = 0.5 * (lo + hi);
        (partner_prob(mid) < centre ? lo : hi) = mid;
      }
      t = hi;
    }
  }
  Vector candidate(seed.features.size());
  detail::interpolate(seed.features, target, t, candidate);

  GeneratedSample out;
  out.oracle_label = seed.label;
  out.region = Region::Boundary;
  out.seed_id = seed.id;
  out.pair_class = partner;
  out.t = t;
  const double scale = cfg.sigma_boundary * cm.radii[label];
  Vector trial(candidate.size());
  for (std::size_t iter = 0; iter < cfg.max_rejection_iters; ++iter) {
    detail::add_jitter(candidate, scale, rng, trial);
    if (in_band(top_confidence(provider.probabilities(trial)), metric_cfg)) {
      out.features = trial;
      out.verified = true;
      return out;
    }
  }
  out.features = std::move(candidate);
  out.verified = false;
  return out;
}

/// Jittered centroid of `class_index`, accepted once it lies within r of the
/// centroid (normalized) and the provider predicts the class. The jitter
/// scale halves every 10 rejections; on exhaustion the centroid itself is used.
inline GeneratedSample generate_centroid_sample(std::size_t class_index, const CentroidModel& cm,
                                                const ConfidenceProvider& provider, const GenerationConfig& cfg,
                                                const MetricConfig& metric_cfg, Rng& rng) {
  const auto centre = cm.centroids.row(class_index);
  GeneratedSample out;
  out.oracle_label = static_cast<int>(class_index);
  out.region = Region::Centroid;
  out.seed_id = "centroid-" + std::to_string(class_index);
  out.t = 0.0;
  double scale = cfg.sigma_centroid * cm.radii[class_index];
  Vector trial(centre.size());
  for (std::size_t iter = 0; iter < cfg.max_rejection_iters; ++iter) {
    if (iter > 0 && iter % 10 == 0) scale *= 0.5;
    detail::add_jitter(centre, scale, rng, trial);
    if (normalized_distance(trial, class_index, cm) <= metric_cfg.r && provider.predict(trial) == class_index) {
      out.features = trial;
      out.verified = true;
      return out;
    }
  }
  out.features.assign(centre.begin(), centre.end());
  out.verified = normalized_distance(out.features, class_index, cm) <= metric_cfg.r &&
                 provider.predict(out.features) == class_index;
  return out;
}

/// Splits `total` into `parts` quotas differing by at most one; the remainder
/// goes to the lowest indices.
inline std::vector<std::size_t> split_evenly(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, parts == 0 ? 0 : total / parts);
  for (std::size_t i = 0; i < (parts == 0 ? 0 : total % parts); ++i) ++out[i];
  return out;
}

inline std::size_t centroid_count(std::size_t total, double centroid_pct) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(total) * centroid_pct / 100.0));
}

inline GeneratedTestSet generate_test_set(const FeatureDataset& test, const CentroidModel& cm,
                                          const ConfidenceProvider& provider, std::size_t total, double centroid_pct,
                                          const GenerationConfig& cfg, const MetricConfig& metric_cfg) {
  cfg.check(metric_cfg);
  metric_cfg.check();
  if (!(centroid_pct >= 0.0 && centroid_pct <= 100.0)) {
    throw Error(ErrorKind::InvalidConfig, "centroid percentage must lie in [0, 100]");
  }
  check_provider_shape(provider, test);
  if (cm.num_classes() != test.num_classes || cm.feature_dim() != test.feature_dim) {
    throw Error(ErrorKind::DimensionMismatch, "centroid model does not match test dataset shape");
  }
  const std::size_t nc = test.num_classes;
  const std::size_t n_centroid = centroid_count(total, centroid_pct);
  const std::size_t n_boundary = total - n_centroid;

  GeneratedTestSet gen;
  gen.name = test.name + "-generated";
  gen.num_classes = nc;
  gen.feature_dim = test.feature_dim;
  gen.requested_total = total;
  gen.centroid_pct = centroid_pct;
  gen.config = cfg;

  const auto class_totals = split_evenly(total, nc);
  const auto centroid_quota = split_evenly(n_centroid, nc);

  BoundarySeeds seeds;
  std::unordered_map<std::string, const Sample*> by_id;
  if (n_boundary > 0) {
    seeds = select_boundary_seeds(test, cfg, metric_cfg);
    for (const auto& s : test.samples) by_id.emplace(s.id, &s);
    for (std::size_t c = 0; c < nc; ++c) {
      if (seeds.fallback[c] && class_totals[c] > centroid_quota[c]) gen.fallback_classes.push_back(c);
    }
  }

  gen.samples.reserve(total);
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t boundary_quota = class_totals[c] - centroid_quota[c];
    Rng centroid_rng(derive_seed(cfg.seed, c, 0));
    for (std::size_t k = 0; k < centroid_quota[c]; ++k) {
      auto g = generate_centroid_sample(c, cm, provider, cfg, metric_cfg, centroid_rng);
      g.id = "g" + std::to_string(c) + "-c" + std::to_string(k);
      gen.samples.push_back(std::move(g));
    }
    if (boundary_quota == 0) continue;
    Rng boundary_rng(derive_seed(cfg.seed, c, 1));
    Sample synthetic;
    if (seeds.ids[c].empty()) {
      // No test sample of this class at all: start from its centroid.
      synthetic.id = "centroid-" + std::to_string(c);
      synthetic.label = static_cast<int>(c);
      const auto centre = cm.centroids.row(c);
      synthetic.features.assign(centre.begin(), centre.end());
      synthetic.confidence = provider.probabilities(synthetic.features);
    }
    for (std::size_t k = 0; k < boundary_quota; ++k) {
      const Sample& seed = seeds.ids[c].empty() ? synthetic : *by_id.at(seeds.ids[c][k % seeds.ids[c].size()]);
      auto g = generate_boundary_sample(seed, cm, provider, cfg, metric_cfg, boundary_rng);
      g.id = "g" + std::to_string(c) + "-b" + std::to_string(k);
      gen.samples.push_back(std::move(g));
    }
  }

  std::size_t verified = 0;
  for (const auto& g : gen.samples) {
    (g.region == Region::Centroid ? gen.achieved_centroid : gen.achieved_boundary) += 1;
    if (g.verified) ++verified;
  }
  gen.verification_rate = gen.samples.empty() ? 0.0 : static_cast<double>(verified) / gen.samples.size();
  return gen;
}

struct EvaluationRecord {
  std::size_t count = 0;
  double accuracy = 0.0;
  std::optional<double> centroid_accuracy;
  std::optional<double> boundary_accuracy;
  std::vector<std::optional<double>> per_class_accuracy;
  double verification_rate = 0.0;

  bool operator==(const EvaluationRecord&) const = default;
};

/// Provider argmax against oracle labels, overall, per region and per class.
/// Regions or classes with no samples are left undefined (nullopt).
inline EvaluationRecord evaluate_generated(const GeneratedTestSet& gen, const ConfidenceProvider& provider) {
  if (gen.samples.empty()) throw Error(ErrorKind::EmptyDataset, "generated set is empty");
  if (provider.feature_dim() != gen.feature_dim || provider.num_classes() != gen.num_classes) {
    throw Error(ErrorKind::DimensionMismatch, "provider does not match generated set shape");
  }
  struct Tally {
    std::size_t hits = 0;
    std::size_t n = 0;
    std::optional<double> rate() const {
      return n == 0 ? std::nullopt : std::optional<double>(static_cast<double>(hits) / static_cast<double>(n));
    }
  };
  Tally all, centroid, boundary;
  std::vector<Tally> per_class(gen.num_classes);
  std::size_t verified = 0;
  for (const auto& g : gen.samples) {
    const bool hit = provider.predict(g.features) == static_cast<std::size_t>(g.oracle_label);
    for (Tally* t : {&all, g.region == Region::Centroid ? &centroid : &boundary,
                     &per_class[static_cast<std::size_t>(g.oracle_label)]}) {
      ++t->n;
      if (hit) ++t->hits;
    }
    if (g.verified) ++verified;
  }
  EvaluationRecord rec;
  rec.count = gen.samples.size();
  rec.accuracy = *all.rate();
  rec.centroid_accuracy = centroid.rate();
  rec.boundary_accuracy = boundary.rate();
  for (const auto& t : per_class) rec.per_class_accuracy.push_back(t.rate());
  rec.verification_rate = static_cast<double>(verified) / static_cast<double>(gen.samples.size());
  return rec;
}

struct SweepCell {
  double centroid_pct = 0.0;
  std::size_t achieved_centroid = 0;
  std::size_t achieved_boundary = 0;
  double accuracy = 0.0;
  std::optional<double> centroid_accuracy;
  std::optional<double> boundary_accuracy;
  double verification_rate = 0.0;

  bool operator==(const SweepCell&) const = default;
};

struct SweepRow {
  double frequency_pct = 0.0;
  std::size_t samples = 0;
  std::vector<SweepCell> cells;  // one per split, in sweep order

  bool operator==(const SweepRow&) const = default;
};

/// Table of generated-set accuracies: rows are sizes, columns centroid splits.
struct SweepMatrix {
  std::string dataset;
  std::string provider;
  std::optional<double> accuracy_full;
  std::vector<SweepRow> rows;

  bool operator==(const SweepMatrix&) const = default;
};

/// Generated-set size for a frequency expressed as a percentage of the test set.
inline std::size_t frequency_size(std::size_t test_size, double frequency_pct) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(test_size) * frequency_pct / 100.0));
}

inline SweepMatrix sweep(const FeatureDataset& test, const CentroidModel& cm, const ConfidenceProvider& provider,
                         const GenerationConfig& cfg, const MetricConfig& metric_cfg) {
  cfg.check(metric_cfg);
  SweepMatrix matrix;
  matrix.dataset = test.name;
  matrix.provider = provider.name();
  matrix.accuracy_full = accuracy(provider, test);
  for (std::size_t fi = 0; fi < cfg.frequency_grid.size(); ++fi) {
    SweepRow row;
    row.frequency_pct = cfg.frequency_grid[fi];
    row.samples = std::max<std::size_t>(1, frequency_size(test.size(), row.frequency_pct));
    for (std::size_t si = 0; si < cfg.sweep_splits.size(); ++si) {
      GenerationConfig cell_cfg = cfg;
      cell_cfg.seed = derive_seed(cfg.seed, 1000 + fi, si);
      const auto gen = generate_test_set(test, cm, provider, row.samples, cfg.sweep_splits[si], cell_cfg, metric_cfg);
      const auto rec = evaluate_generated(gen, provider);
      row.cells.push_back({cfg.sweep_splits[si], gen.achieved_centroid, gen.achieved_boundary, rec.accuracy,
                           rec.centroid_accuracy, rec.boundary_accuracy, rec.verification_rate});
    }
    matrix.rows.push_back(std::move(row));
  }
  return matrix;
}

/// Closest real sample for each generated point (feature-space stand-in for
/// rendering the point as an image).
struct Neighbor {
  std::string generated_id;
  std::string nearest_id;
  double distance = 0.0;
};

inline std::vector<Neighbor> nearest_real_neighbors(const GeneratedTestSet& gen, const FeatureDataset& real) {
  std::vector<Neighbor> out;
  out.reserve(gen.samples.size());
  for (const auto& g : gen.samples) {
    Neighbor best{g.id, "", INFINITY};
    for (const auto& s : real.samples) {
      const double d = squared_distance(g.features, s.features);
      if (d < best.distance) {
        best.distance = d;
        best.nearest_id = s.id;
      }
    }
    best.distance = std::sqrt(best.distance);
    out.push_back(std::move(best));
  }
  return out;
}

/// Feature-dump view of a generated set (labels = oracle labels).
inline FeatureDataset to_dataset(const GeneratedTestSet& gen, const std::optional<std::vector<std::string>>& class_names = {}) {
  FeatureDataset ds;
  ds.name = gen.name;
  ds.num_classes = gen.num_classes;
  ds.feature_dim = gen.feature_dim;
  ds.class_names = class_names;
  for (const auto& g : gen.samples) ds.samples.push_back({g.id, g.oracle_label, g.features, std::nullopt});
  return ds;
}

/// Writes the feature dump plus provenance.csv
/// (id,seed_id,region,pair_class,t,verified) and generation.json.
inline void write_generated(const GeneratedTestSet& gen, const std::filesystem::path& dir,
                            const std::optional<std::vector<std::string>>& class_names = {}) {
  write_dataset(to_dataset(gen, class_names), dir);
  {
    std::ofstream out(dir / "provenance.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write provenance.csv");
    out << "id,seed_id,region,pair_class,t,verified\n";
    for (const auto& g : gen.samples) {
      out << g.id << ',' << g.seed_id << ',' << to_string(g.region) << ',';
      if (g.pair_class) out << *g.pair_class;
      out << ',' << format_double(g.t) << ',' << (g.verified ? 1 : 0) << '\n';
    }
  }
  nlohmann::json info;
  info["requested_total"] = gen.requested_total;
  info["centroid_pct"] = gen.centroid_pct;
  info["achieved_centroid"] = gen.achieved_centroid;
  info["achieved_boundary"] = gen.achieved_boundary;
  info["verification_rate"] = gen.verification_rate;
  info["fallback_classes"] = gen.fallback_classes;
  info["seed"] = gen.config.seed;
  info["wc_l"] = gen.config.wc_l;
  info["sigma_centroid"] = gen.config.sigma_centroid;
  info["sigma_boundary"] = gen.config.sigma_boundary;
  info["max_rejection_iters"] = gen.config.max_rejection_iters;
  info["boundary_objective"] = "bisection toward partner centroid to band centre, then verified jitter";
  std::ofstream out(dir / "generation.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write generation.json");
  out << info.dump(2) << '\n';
}

inline void write_neighbors(const std::vector<Neighbor>& neighbors, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << "id,nearest_id,distance\n";
  for (const auto& n : neighbors) out << n.generated_id << ',' << n.nearest_id << ',' << format_double(n.distance) << '\n';
}

/// Reads a directory produced by `write_generated`.
inline GeneratedTestSet read_generated(const std::filesystem::path& dir) {
  const auto ds = load_dataset(dir);
  GeneratedTestSet gen;
  gen.name = ds.name;
  gen.num_classes = ds.num_classes;
  gen.feature_dim = ds.feature_dim;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& s : ds.samples) {
    index.emplace(s.id, gen.samples.size());
    GeneratedSample g;
    g.id = s.id;
    g.features = s.features;
    g.oracle_label = s.label;
    gen.samples.push_back(std::move(g));
  }
  const auto prov_path = dir / "provenance.csv";
  detail::require_file(prov_path);
  const auto lines = detail::read_lines(prov_path);
  if (lines.empty() || lines.front() != "id,seed_id,region,pair_class,t,verified") {
    throw Error(ErrorKind::SchemaError, "provenance.csv: unexpected header");
  }
  std::vector<bool> seen(gen.samples.size(), false);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::string where = "provenance.csv line " + std::to_string(row + 1);
    const auto f = detail::split_csv_line(lines[row]);
    if (f.size() != 6) throw Error(ErrorKind::SchemaError, where + ": expected 6 columns");
    const auto it = index.find(std::string(f[0]));
    if (it == index.end()) throw Error(ErrorKind::SchemaError, where + ": unknown id");
    auto& g = gen.samples[it->second];
    seen[it->second] = true;
    g.seed_id = std::string(f[1]);
    if (f[2] == "centroid") {
      g.region = Region::Centroid;
    } else if (f[2] == "boundary") {
      g.region = Region::Boundary;
    } else {
      throw Error(ErrorKind::SchemaError, where + ": region must be centroid or boundary");
    }
    if (!f[3].empty()) g.pair_class = static_cast<std::size_t>(detail::parse_label(f[3], where));
    g.t = detail::parse_real(f[4], where);
    g.verified = f[5] == "1";
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorKind::SchemaError, "provenance.csv does not cover every generated sample");
  }
  std::size_t verified = 0;
  for (const auto& g : gen.samples) {
    (g.region == Region::Centroid ? gen.achieved_centroid : gen.achieved_boundary) += 1;
    if (g.verified) ++verified;
  }
  gen.requested_total = gen.samples.size();
  gen.centroid_pct = gen.samples.empty() ? 0.0 : 100.0 * static_cast<double>(gen.achieved_centroid) / gen.samples.size();
  gen.verification_rate = gen.samples.empty() ? 0.0 : static_cast<double>(verified) / gen.samples.size();
  const auto info_path = dir / "generation.json";
  if (std::filesystem::is_regular_file(info_path)) {
    std::ifstream in(info_path, std::ios::binary);
    try {
      const auto info = nlohmann::json::parse(in);
      gen.requested_total = info.at("requested_total").get<std::size_t>();
      gen.centroid_pct = info.at("centroid_pct").get<double>();
      gen.config.seed = info.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::SchemaError, std::string("generation.json: ") + e.what());
    }
  }
  return gen;
}

}  // namespace covcheck
