#pragma once

// Versioned, canonical report files: report.json, boxplot.csv, sweep.csv.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "covcheck/error.hpp"
#include "covcheck/generator.hpp"
#include "covcheck/linalg.hpp"
#include "covcheck/metrics.hpp"
#include "covcheck/shift.hpp"
#include "covcheck/version.hpp"

namespace covcheck {

inline constexpr const char* kSchemaVersion = "1";

struct AnalysisReport {
  std::string schema_version = kSchemaVersion;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 42;
  std::string train_name;
  std::string test_name;
  /// Which layer / space the features came from, as far as the tool knows.
  std::string feature_space = "as loaded";
  std::optional<std::string> provider;
  std::optional<QualityReport> quality;
  std::optional<ShiftReport> shift;
  std::vector<SweepMatrix> sweeps;

  bool operator==(const AnalysisReport&) const = default;
};

struct BoxplotSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  bool operator==(const BoxplotSummary&) const = default;
};

/// Five-number summary over the defined entries (nullopt entries are skipped).
inline BoxplotSummary boxplot_summary(const std::vector<std::optional<double>>& values) {
  std::vector<double> defined;
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
  }
  if (defined.empty()) throw Error(ErrorKind::AllUndefined, "no defined values to summarize");
  std::sort(defined.begin(), defined.end());
  return {defined.front(), quantile_sorted(defined, 0.25), quantile_sorted(defined, 0.5),
          quantile_sorted(defined, 0.75), defined.back()};
}

inline BoxplotSummary boxplot_summary(const std::vector<double>& values) {
  return boxplot_summary(std::vector<std::optional<double>>(values.begin(), values.end()));
}

// ---------------------------------------------------------------------------
// Canonical JSON: sorted keys, two-space indent, 17 significant digits, LF.

namespace detail {

inline void write_canonical(const nlohmann::json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: already key-sorted
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        write_canonical(it.value(), out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ",\n";
        out += inner;
        write_canonical(j[i], out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, "refusing to serialize a non-finite number");
      std::string text = format_double(v);
      if (text.find_first_of(".eE") == std::string::npos) text += ".0";
      out += text;
      return;
    }
    default:
      out += j.dump();
  }
}

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> read_optional_number(const nlohmann::json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

inline nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m;
  for (const auto& row : j) m.append_row(row.get<std::vector<double>>());
  return m;
}

/// Per-class values with undefined classes rendered as null.
inline nlohmann::json per_class_json(const Vector& values, const std::vector<std::size_t>& undefined) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (std::find(undefined.begin(), undefined.end(), c) != undefined.end()) {
      out.push_back(nullptr);
    } else {
      out.push_back(values[c]);
    }
  }
  return out;
}

inline Vector per_class_from_json(const nlohmann::json& j) {
  Vector out;
  for (const auto& v : j) out.push_back(v.is_null() ? 0.0 : v.get<double>());
  return out;
}

}  // namespace detail

inline std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  detail::write_canonical(j, out, 0);
  out += '\n';
  return out;
}

inline nlohmann::json to_json(const MetricConfig& cfg) {
  return {{"r", cfg.r}, {"theta1", cfg.theta1}, {"theta2", cfg.theta2}};
}

inline nlohmann::json to_json(const QualityReport& q) {
  nlohmann::json j;
  j["dataset"] = q.dataset_name;
  j["config"] = to_json(q.config);
  j["per_class_counts"] = q.per_class_counts;
  j["ep"] = q.ep;
  j["cp"] = detail::per_class_json(q.cp, q.undefined_classes);
  j["bc"] = q.bc ? detail::per_class_json(*q.bc, q.undefined_classes) : nlohmann::json(nullptr);
  j["pbc"] = q.pbc ? detail::matrix_json(*q.pbc) : nlohmann::json(nullptr);
  j["pbc_counts"] = q.pbc_counts ? detail::matrix_json(*q.pbc_counts) : nlohmann::json(nullptr);
  j["boundary_metrics"] = q.bc ? "computed" : "skipped: no confidences";
  j["undefined_classes"] = q.undefined_classes;
  j["method"] = {{"confidence", "top-1 probability"},
                 {"centroid_radius", "95th percentile of train distances to centroid (1 if zero)"},
                 {"pbc_partner", "strongest class other than the label"},
                 {"pbc_normalization", "symmetrized: (count_ij + count_ji) / (ns_i + ns_j)"},
                 {"ep_ideal", 1.0},
                 {"cp_ideal", 0.0}};
  return j;
}

inline QualityReport quality_from_json(const nlohmann::json& j) {
  QualityReport q;
  q.dataset_name = j.at("dataset").get<std::string>();
  q.config.r = j.at("config").at("r").get<double>();
  q.config.theta1 = j.at("config").at("theta1").get<double>();
  q.config.theta2 = j.at("config").at("theta2").get<double>();
  q.per_class_counts = j.at("per_class_counts").get<std::vector<std::size_t>>();
  q.ep = j.at("ep").get<std::vector<double>>();
  q.cp = detail::per_class_from_json(j.at("cp"));
  if (!j.at("bc").is_null()) q.bc = detail::per_class_from_json(j.at("bc"));
  if (!j.at("pbc").is_null()) q.pbc = detail::matrix_from_json(j.at("pbc"));
  if (!j.at("pbc_counts").is_null()) q.pbc_counts = detail::matrix_from_json(j.at("pbc_counts"));
  q.undefined_classes = j.at("undefined_classes").get<std::vector<std::size_t>>();
  return q;
}

inline nlohmann::json to_json(const ShiftConfig& cfg) {
  return {{"components", cfg.components},
          {"max_iters", cfg.max_iters},
          {"tol", cfg.tol},
          {"mc_samples", cfg.mc_samples},
          {"seed", cfg.seed}};
}

inline nlohmann::json to_json(const ShiftReport& s) {
  nlohmann::json j;
  j["config"] = to_json(s.config);
  j["per_class_js"] = detail::per_class_json(s.per_class_js, s.undefined_classes);
  j["standard_error"] = detail::per_class_json(s.standard_error, s.undefined_classes);
  j["undefined_classes"] = s.undefined_classes;
  j["method"] = {{"mixture", "diagonal-covariance GMM, EM with k-means++ seeding"},
                 {"divergence", "Jensen-Shannon, base-2 logs, Monte Carlo"}};
  return j;
}

inline ShiftReport shift_from_json(const nlohmann::json& j) {
  ShiftReport s;
  const auto& c = j.at("config");
  s.config.components = c.at("components").get<std::size_t>();
  s.config.max_iters = c.at("max_iters").get<std::size_t>();
  s.config.tol = c.at("tol").get<double>();
  s.config.mc_samples = c.at("mc_samples").get<std::size_t>();
  s.config.seed = c.at("seed").get<std::uint64_t>();
  s.per_class_js = detail::per_class_from_json(j.at("per_class_js"));
  s.standard_error = detail::per_class_from_json(j.at("standard_error"));
  s.undefined_classes = j.at("undefined_classes").get<std::vector<std::size_t>>();
  return s;
}

inline nlohmann::json to_json(const SweepMatrix& m) {
  nlohmann::json j;
  j["dataset"] = m.dataset;
  j["provider"] = m.provider;
  j["accuracy_full"] = detail::optional_number(m.accuracy_full);
  j["rows"] = nlohmann::json::array();
  for (const auto& row : m.rows) {
    nlohmann::json r;
    r["frequency_pct"] = row.frequency_pct;
    r["samples"] = row.samples;
    r["cells"] = nlohmann::json::array();
    for (const auto& c : row.cells) {
      r["cells"].push_back({{"centroid_pct", c.centroid_pct},
                            {"achieved_centroid", c.achieved_centroid},
                            {"achieved_boundary", c.achieved_boundary},
                            {"accuracy", c.accuracy},
                            {"centroid_accuracy", detail::optional_number(c.centroid_accuracy)},
                            {"boundary_accuracy", detail::optional_number(c.boundary_accuracy)},
                            {"verification_rate", c.verification_rate}});
    }
    j["rows"].push_back(std::move(r));
  }
  return j;
}

inline SweepMatrix sweep_from_json(const nlohmann::json& j) {
  SweepMatrix m;
  m.dataset = j.at("dataset").get<std::string>();
  m.provider = j.at("provider").get<std::string>();
  m.accuracy_full = detail::read_optional_number(j.at("accuracy_full"));
  for (const auto& r : j.at("rows")) {
    SweepRow row;
    row.frequency_pct = r.at("frequency_pct").get<double>();
    row.samples = r.at("samples").get<std::size_t>();
    for (const auto& c : r.at("cells")) {
      row.cells.push_back({c.at("centroid_pct").get<double>(), c.at("achieved_centroid").get<std::size_t>(),
                           c.at("achieved_boundary").get<std::size_t>(), c.at("accuracy").get<double>(),
                           detail::read_optional_number(c.at("centroid_accuracy")),
                           detail::read_optional_number(c.at("boundary_accuracy")),
                           c.at("verification_rate").get<double>()});
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline nlohmann::json to_json(const AnalysisReport& report) {
  nlohmann::json j;
  j["schema_version"] = report.schema_version;
  j["tool_version"] = report.tool_version;
  j["seed"] = report.seed;
  j["datasets"] = {{"train", report.train_name}, {"test", report.test_name}};
  j["feature_space"] = report.feature_space;
  j["provider"] = report.provider ? nlohmann::json(*report.provider) : nlohmann::json(nullptr);
  j["quality"] = report.quality ? to_json(*report.quality) : nlohmann::json(nullptr);
  j["shift"] = report.shift ? to_json(*report.shift) : nlohmann::json(nullptr);
  j["sweeps"] = nlohmann::json::array();
  for (const auto& m : report.sweeps) j["sweeps"].push_back(to_json(m));
  return j;
}

inline AnalysisReport report_from_json(const nlohmann::json& j) {
  try {
    AnalysisReport r;
    r.schema_version = j.at("schema_version").get<std::string>();
    if (r.schema_version != kSchemaVersion) {
      throw Error(ErrorKind::SchemaError, "unsupported report schema_version " + r.schema_version);
    }
    r.tool_version = j.at("tool_version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_name = j.at("datasets").at("train").get<std::string>();
    r.test_name = j.at("datasets").at("test").get<std::string>();
    r.feature_space = j.at("feature_space").get<std::string>();
    if (!j.at("provider").is_null()) r.provider = j.at("provider").get<std::string>();
    if (!j.at("quality").is_null()) r.quality = quality_from_json(j.at("quality"));
    if (!j.at("shift").is_null()) r.shift = shift_from_json(j.at("shift"));
    for (const auto& m : j.at("sweeps")) r.sweeps.push_back(sweep_from_json(m));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("report: ") + e.what());
  }
}

inline std::string render_report(const AnalysisReport& report) { return canonical_json(to_json(report)); }

inline AnalysisReport parse_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("report: ") + e.what());
  }
  return report_from_json(j);
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace detail

inline void emit_report(const AnalysisReport& report, const std::filesystem::path& path) {
  detail::write_text(path, render_report(report));
}

inline AnalysisReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

/// boxplot.csv rows for CP, BC and PBC (BC/PBC only when computed). CP/BC use
/// the defined per-class values; PBC uses the upper triangle of the pair matrix.
inline std::string render_boxplot_csv(const QualityReport& q) {
  std::string out = "metric,min,q1,median,q3,max\n";
  auto emit = [&](const char* metric, const std::vector<std::optional<double>>& values) {
    bool any = std::any_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
    if (!any) return;
    const auto b = boxplot_summary(values);
    out += std::string(metric) + "," + format_double(b.min) + "," + format_double(b.q1) + "," +
           format_double(b.median) + "," + format_double(b.q3) + "," + format_double(b.max) + "\n";
  };
  auto defined = [&](const Vector& v) {
    std::vector<std::optional<double>> out_values;
    for (std::size_t c = 0; c < v.size(); ++c) {
      const bool undefined =
          std::find(q.undefined_classes.begin(), q.undefined_classes.end(), c) != q.undefined_classes.end();
      out_values.push_back(undefined ? std::nullopt : std::optional<double>(v[c]));
    }
    return out_values;
  };
  emit("CP", defined(q.cp));
  if (q.bc) emit("BC", defined(*q.bc));
  if (q.pbc) {
    std::vector<std::optional<double>> pairs;
    for (std::size_t i = 0; i < q.pbc->rows(); ++i) {
      for (std::size_t j = i + 1; j < q.pbc->cols(); ++j) pairs.push_back((*q.pbc)(i, j));
    }
    emit("PBC", pairs);
  }
  return out;
}

inline void emit_boxplot(const QualityReport& q, const std::filesystem::path& path) {
  detail::write_text(path, render_boxplot_csv(q));
}

inline constexpr const char* kSweepHeader =
    "dataset,provider,accuracy_full,samples,split_0_100,split_30_70,split_50_50,split_70_30,split_100_0";
inline constexpr double kSweepColumns[] = {0, 30, 50, 70, 100};

/// One CSV row per (matrix, size). Split columns are fixed; a split that was
/// not generated leaves its cell empty.
inline std::string render_sweep_rows(const SweepMatrix& m) {
  std::string out;
  for (const auto& row : m.rows) {
    out += m.dataset + "," + m.provider + "," + (m.accuracy_full ? format_double(*m.accuracy_full) : "") + "," +
           std::to_string(row.samples);
    for (double split : kSweepColumns) {
      out += ",";
      for (const auto& c : row.cells) {
        if (c.centroid_pct == split) {
          out += format_double(c.accuracy);
          break;
        }
      }
    }
    out += "\n";
  }
  return out;
}

inline void emit_sweep_table(const std::vector<SweepMatrix>& matrices, const std::filesystem::path& path) {
  if (matrices.empty()) throw Error(ErrorKind::EmptyInput, "no sweep results to write");
  std::string text = std::string(kSweepHeader) + "\n";
  for (const auto& m : matrices) text += render_sweep_rows(m);
  detail::write_text(path, text);
}

/// Appends rows to an existing sweep.csv, writing the header first if needed.
inline void append_sweep_rows(const SweepMatrix& m, const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!fresh) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || lines.front() != kSweepHeader) {
      throw Error(ErrorKind::SchemaError, path.string() + " exists but is not a sweep table");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  if (fresh) out << kSweepHeader << '\n';
  out << render_sweep_rows(m);
}

}  // namespace covcheck
