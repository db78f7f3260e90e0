#pragma once

// Feature-dump data model and its on-disk directory format:
//   meta.json         {"name", "num_classes", "feature_dim", optional "class_names"}
//   features.csv      id,label,f0,...,f{D-1}
//   confidences.csv   id,c0,...,c{NC-1}   (optional, joined by id)

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "covcheck/error.hpp"
#include "covcheck/linalg.hpp"

namespace covcheck {

inline constexpr double kConfidenceSumTolerance = 1e-6;

struct Sample {
  std::string id;
  int label = 0;
  Vector features;
  std::optional<Vector> confidence;

  bool operator==(const Sample&) const = default;
};

struct FeatureDataset {
  std::string name;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<Sample> samples;
  std::optional<std::vector<std::string>> class_names;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  /// True when every sample carries a confidence vector (vacuously true when empty).
  bool has_confidences() const {
    for (const auto& s : samples) {
      if (!s.confidence) return false;
    }
    return true;
  }

  bool operator==(const FeatureDataset&) const = default;
};

struct DatasetStats {
  std::vector<std::size_t> per_class_counts;
  std::size_t total = 0;

  bool operator==(const DatasetStats&) const = default;
};

struct Violation {
  std::string sample_id;
  ErrorKind kind;
  std::string reason;
};

inline DatasetStats stats(const FeatureDataset& dataset) {
  DatasetStats out;
  out.per_class_counts.assign(dataset.num_classes, 0);
  for (const auto& s : dataset.samples) {
    if (s.label >= 0 && static_cast<std::size_t>(s.label) < dataset.num_classes) {
      ++out.per_class_counts[static_cast<std::size_t>(s.label)];
      ++out.total;
    }
  }
  return out;
}

/// Every invariant violation in the dataset, in sample order. Never throws.
inline std::vector<Violation> validate(const FeatureDataset& dataset) {
  std::vector<Violation> out;
  std::unordered_set<std::string> seen;
  const auto nc = dataset.num_classes;
  for (const auto& s : dataset.samples) {
    if (!seen.insert(s.id).second) {
      out.push_back({s.id, ErrorKind::DuplicateId, "id appears more than once"});
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= nc) {
      out.push_back({s.id, ErrorKind::LabelOutOfRange,
                     "label " + std::to_string(s.label) + " not in [0, " + std::to_string(nc) + ")"});
    }
    if (s.features.size() != dataset.feature_dim) {
      out.push_back({s.id, ErrorKind::SchemaError,
                     "expected " + std::to_string(dataset.feature_dim) + " features, got " +
                         std::to_string(s.features.size())});
    }
    for (std::size_t d = 0; d < s.features.size(); ++d) {
      if (!std::isfinite(s.features[d])) {
        out.push_back({s.id, ErrorKind::NonFiniteValue, "feature f" + std::to_string(d) + " is not finite"});
        break;
      }
    }
    if (s.confidence) {
      const auto& c = *s.confidence;
      if (c.size() != nc) {
        out.push_back({s.id, ErrorKind::SchemaError,
                       "expected " + std::to_string(nc) + " confidences, got " + std::to_string(c.size())});
        continue;
      }
      bool finite = true;
      bool in_range = true;
      double sum = 0.0;
      for (double v : c) {
        finite = finite && std::isfinite(v);
        in_range = in_range && v >= 0.0 && v <= 1.0;
        sum += v;
      }
      if (!finite) {
        out.push_back({s.id, ErrorKind::NonFiniteValue, "confidence vector has non-finite entries"});
      } else if (!in_range) {
        out.push_back({s.id, ErrorKind::ConfidenceNotNormalized, "confidence entry outside [0, 1]"});
      } else if (std::abs(sum - 1.0) > kConfidenceSumTolerance) {
        out.push_back({s.id, ErrorKind::ConfidenceNotNormalized,
                       "confidences sum to " + format_double(sum)});
      }
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline double parse_real(std::string_view text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(ErrorKind::SchemaError, where + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

inline int parse_label(std::string_view text, const std::string& where) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::SchemaError, where + ": cannot parse label '" + std::string(text) + "'");
  }
  if (value < -1'000'000'000LL || value > 1'000'000'000LL) {
    throw Error(ErrorKind::LabelOutOfRange, where + ": label " + std::string(text));
  }
  return static_cast<int>(value);
}

inline std::string expected_header(std::string_view first, std::string_view prefix, std::size_t n) {
  std::string h(first);
  for (std::size_t i = 0; i < n; ++i) {
    h += ",";
    h += prefix;
    h += std::to_string(i);
  }
  return h;
}

inline void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorKind::MissingFile, path.string() + " not found");
  }
}

}  // namespace detail

/// Parses a feature-dump directory without checking value-level invariants.
/// Structural problems (missing files, bad headers, wrong column counts,
/// unparsable numbers) still throw. Use `validate` on the result to list
/// every remaining violation.
inline FeatureDataset read_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path meta_path = dir / "meta.json";
  const fs::path features_path = dir / "features.csv";
  detail::require_file(meta_path);
  detail::require_file(features_path);

  FeatureDataset ds;
  {
    std::ifstream in(meta_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + meta_path.string());
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::SchemaError, "meta.json: " + std::string(e.what()));
    }
    if (!meta.is_object() || !meta.contains("name") || !meta["name"].is_string() ||
        !meta.contains("num_classes") || !meta["num_classes"].is_number_integer() ||
        !meta.contains("feature_dim") || !meta["feature_dim"].is_number_integer()) {
      throw Error(ErrorKind::SchemaError, "meta.json needs string name and integer num_classes, feature_dim");
    }
    const auto nc = meta["num_classes"].get<long long>();
    const auto dim = meta["feature_dim"].get<long long>();
    if (nc < 1 || dim < 1) {
      throw Error(ErrorKind::SchemaError, "meta.json: num_classes and feature_dim must be positive");
    }
    ds.name = meta["name"].get<std::string>();
    ds.num_classes = static_cast<std::size_t>(nc);
    ds.feature_dim = static_cast<std::size_t>(dim);
    if (meta.contains("class_names")) {
      const auto& names = meta["class_names"];
      if (!names.is_array() || names.size() != ds.num_classes) {
        throw Error(ErrorKind::SchemaError, "meta.json: class_names must list num_classes strings");
      }
      std::vector<std::string> out;
      for (const auto& n : names) {
        if (!n.is_string()) throw Error(ErrorKind::SchemaError, "meta.json: class_names entries must be strings");
        out.push_back(n.get<std::string>());
      }
      ds.class_names = std::move(out);
    }
  }

  const auto lines = detail::read_lines(features_path);
  const std::string header = detail::expected_header("id,label", "f", ds.feature_dim);
  if (lines.empty() || lines.front() != header) {
    throw Error(ErrorKind::SchemaError, "features.csv: header must be '" + header + "'");
  }
  ds.samples.reserve(lines.size() - 1);
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const std::string where = "features.csv line " + std::to_string(row + 1);
    const auto fields = detail::split_csv_line(lines[row]);
    if (fields.size() != ds.feature_dim + 2) {
      throw Error(ErrorKind::SchemaError, where + ": expected " + std::to_string(ds.feature_dim + 2) +
                                              " columns, got " + std::to_string(fields.size()));
    }
    Sample s;
    s.id = std::string(fields[0]);
    s.label = detail::parse_label(fields[1], where);
    s.features.reserve(ds.feature_dim);
    for (std::size_t d = 0; d < ds.feature_dim; ++d) {
      s.features.push_back(detail::parse_real(fields[d + 2], where));
    }
    ds.samples.push_back(std::move(s));
  }

  const fs::path conf_path = dir / "confidences.csv";
  if (fs::exists(conf_path)) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) index.emplace(ds.samples[i].id, i);
    const auto conf_lines = detail::read_lines(conf_path);
    const std::string conf_header = detail::expected_header("id", "c", ds.num_classes);
    if (conf_lines.empty() || conf_lines.front() != conf_header) {
      throw Error(ErrorKind::SchemaError, "confidences.csv: header must be '" + conf_header + "'");
    }
    for (std::size_t row = 1; row < conf_lines.size(); ++row) {
      const std::string where = "confidences.csv line " + std::to_string(row + 1);
      const auto fields = detail::split_csv_line(conf_lines[row]);
      if (fields.size() != ds.num_classes + 1) {
        throw Error(ErrorKind::SchemaError, where + ": expected " + std::to_string(ds.num_classes + 1) +
                                                " columns, got " + std::to_string(fields.size()));
      }
      const auto it = index.find(std::string(fields[0]));
      if (it == index.end()) {
        throw Error(ErrorKind::SchemaError, where + ": id '" + std::string(fields[0]) + "' not in features.csv");
      }
      auto& target = ds.samples[it->second];
      if (target.confidence) {
        throw Error(ErrorKind::SchemaError, where + ": duplicate confidence row for '" + target.id + "'");
      }
      Vector c;
      c.reserve(ds.num_classes);
      for (std::size_t k = 0; k < ds.num_classes; ++k) c.push_back(detail::parse_real(fields[k + 1], where));
      target.confidence = std::move(c);
    }
  }
  return ds;
}

/// Loads and validates a feature dump. Throws on the first violation found.
inline FeatureDataset load_dataset(const std::filesystem::path& dir) {
  auto ds = read_dataset(dir);
  const auto violations = validate(ds);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error(v.kind, "sample '" + v.sample_id + "': " + v.reason);
  }
  return ds;
}

/// Writes the dataset in feature-dump format. Reals use 17 significant digits
/// so a subsequent load reproduces every value exactly.
inline void write_dataset(const FeatureDataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json meta;
  meta["name"] = ds.name;
  meta["num_classes"] = ds.num_classes;
  meta["feature_dim"] = ds.feature_dim;
  if (ds.class_names) meta["class_names"] = *ds.class_names;

  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    return out;
  };

  {
    auto out = open(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
  {
    auto out = open(dir / "features.csv");
    out << detail::expected_header("id,label", "f", ds.feature_dim) << '\n';
    for (const auto& s : ds.samples) {
      out << s.id << ',' << s.label;
      for (double v : s.features) out << ',' << format_double(v);
      out << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for features.csv");
  }
  bool any_confidence = false;
  for (const auto& s : ds.samples) any_confidence = any_confidence || s.confidence.has_value();
  const fs::path conf_path = dir / "confidences.csv";
  if (any_confidence) {
    auto out = open(conf_path);
    out << detail::expected_header("id", "c", ds.num_classes) << '\n';
    for (const auto& s : ds.samples) {
      if (!s.confidence) continue;
      out << s.id;
      for (double v : *s.confidence) out << ',' << format_double(v);
      out << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "write failed for confidences.csv");
  } else {
    fs::remove(conf_path, ec);
  }
}

/// Feature rows of one class, in dataset order.
inline Matrix class_points(const FeatureDataset& ds, std::size_t class_index) {
  Matrix out;
  for (const auto& s : ds.samples) {
    if (static_cast<std::size_t>(s.label) == class_index) out.append_row(s.features);
  }
  return out;
}

}  // namespace covcheck
