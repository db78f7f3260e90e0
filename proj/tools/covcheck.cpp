// covcheck: test-set coverage analysis in a model's feature space.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "covcheck/covcheck.hpp"

namespace fs = std::filesystem;
using namespace covcheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitUsage = 64;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile:
    case ErrorKind::IoError:
      return kExitIo;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidConfig:
      return kExitMismatch;
    default:
      return kExitValidation;
  }
}

/// Raised for flag combinations that are only detectable after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 42;
  bool quiet = false;
};

struct ProviderFlags {
  std::string kind = "centroid";
  fs::path model;
  fs::path train;
  double tau = 1.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--provider", kind, "Confidence provider")
        ->check(CLI::IsMember({"centroid", "logistic", "file"}))
        ->capture_default_str();
    cmd->add_option("--model", model, "model.json for --provider file");
    cmd->add_option("--train", train, "Training dump: centroids and logistic training data");
    cmd->add_option("--tau", tau, "Nearest-centroid softmax temperature")->capture_default_str();
  }

  void check() const {
    if (kind == "file" && model.empty()) throw UsageError("--provider file requires --model");
    if (kind == "logistic" && train.empty()) throw UsageError("--provider logistic requires --train");
    if (!(tau > 0.0)) throw UsageError("--tau must be positive");
  }
};

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::unique_ptr<ConfidenceProvider> make_provider(const ProviderFlags& flags, const CentroidModel& cm,
                                                  const std::optional<FeatureDataset>& train, std::uint64_t seed) {
  if (flags.kind == "file") return std::make_unique<LogisticModel>(load_model(flags.model));
  if (flags.kind == "logistic") {
    LogisticConfig cfg;
    cfg.seed = seed;
    return std::make_unique<LogisticModel>(train_logistic(*train, cfg));
  }
  return std::make_unique<NearestCentroidSoftmax>(cm.centroids, flags.tau);
}

void check_same_shape(const FeatureDataset& a, const FeatureDataset& b) {
  if (a.num_classes != b.num_classes || a.feature_dim != b.feature_dim) {
    throw Error(ErrorKind::DimensionMismatch, "'" + a.name + "' is " + std::to_string(a.num_classes) + " classes x " +
                                                  std::to_string(a.feature_dim) + " dims, '" + b.name + "' is " +
                                                  std::to_string(b.num_classes) + " x " +
                                                  std::to_string(b.feature_dim));
  }
}

fs::path sibling(const fs::path& file, const std::string& name) {
  return file.has_parent_path() ? file.parent_path() / name : fs::path(name);
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : "undefined"; }

// ---------------------------------------------------------------------------

int run_validate(const fs::path& dir, const Globals& g) {
  const auto ds = read_dataset(dir);
  const auto violations = validate(ds);
  for (const auto& v : violations) {
    std::cerr << (v.sample_id.empty() ? "<dataset>" : v.sample_id) << ": " << to_string(v.kind) << ": " << v.reason
              << '\n';
  }
  if (!violations.empty()) {
    std::cerr << violations.size() << " violation(s) in " << dir.string() << '\n';
    return kExitValidation;
  }
  if (!g.quiet) {
    const auto st = stats(ds);
    std::cout << ds.name << ": " << st.total << " samples, " << ds.num_classes << " classes, " << ds.feature_dim
              << " dims, confidences " << (ds.has_confidences() ? "present" : "absent") << '\n';
  }
  return kExitOk;
}

struct MetricsFlags {
  fs::path train, test, out;
  MetricConfig metric;
};

int run_metrics(const MetricsFlags& f, const Globals& g) {
  const auto train = load_dataset(f.train);
  const auto test = load_dataset(f.test);
  check_same_shape(train, test);
  AnalysisReport report;
  report.seed = g.seed;
  report.train_name = train.name;
  report.test_name = test.name;
  report.quality = quality_report(train, test, f.metric, BoundaryMode::IfAvailable);
  if (!report.quality->bc) warn("test set has no confidences; BC and PBC skipped");
  for (auto c : report.quality->undefined_classes) warn("class " + std::to_string(c) + " has no test samples");
  emit_report(report, f.out);
  emit_boxplot(*report.quality, sibling(f.out, "boxplot.csv"));
  if (!g.quiet) {
    const auto& q = *report.quality;
    std::cout << "class,count,ep,cp" << (q.bc ? ",bc" : "") << '\n';
    for (std::size_t c = 0; c < q.ep.size(); ++c) {
      std::cout << c << ',' << q.per_class_counts[c] << ',' << fmt(q.ep[c]) << ',' << fmt(q.cp[c]);
      if (q.bc) std::cout << ',' << fmt((*q.bc)[c]);
      std::cout << '\n';
    }
    std::cout << "wrote " << f.out.string() << '\n';
  }
  return kExitOk;
}

struct ShiftFlags {
  fs::path train, test, out;
  ShiftConfig shift;
};

int run_shift(ShiftFlags f, const Globals& g) {
  const auto train = load_dataset(f.train);
  const auto test = load_dataset(f.test);
  check_same_shape(train, test);
  f.shift.seed = g.seed;
  AnalysisReport report;
  report.seed = g.seed;
  report.train_name = train.name;
  report.test_name = test.name;
  report.shift = covariate_shift(train, test, f.shift);
  for (auto c : report.shift->undefined_classes) warn("class " + std::to_string(c) + " is empty in train or test");
  emit_report(report, f.out);
  if (!g.quiet) {
    std::cout << "class,js,standard_error\n";
    for (std::size_t c = 0; c < report.shift->per_class_js.size(); ++c) {
      std::cout << c << ',' << fmt(report.shift->per_class_js[c]) << ',' << fmt(report.shift->standard_error[c])
                << '\n';
    }
    std::cout << "wrote " << f.out.string() << '\n';
  }
  return kExitOk;
}

struct GenerateFlags {
  fs::path test, out;
  ProviderFlags provider;
  double split = 50.0;
  std::size_t count = 100;
  MetricConfig metric;
  GenerationConfig generation;
};

int run_generate(GenerateFlags f, const Globals& g) {
  const auto test = load_dataset(f.test);
  std::optional<FeatureDataset> train;
  if (!f.provider.train.empty()) {
    train = load_dataset(f.provider.train);
    check_same_shape(*train, test);
  }
  const auto cm = train ? compute_centroids(*train) : compute_centroids(test, "test");
  if (!train) warn("no --train given; centroids and radii come from the test set");
  const auto provider = make_provider(f.provider, cm, train, g.seed);
  const auto scored = predict_confidences(*provider, test);
  f.generation.seed = g.seed;
  const auto gen = generate_test_set(scored, cm, *provider, f.count, f.split, f.generation, f.metric);
  for (auto c : gen.fallback_classes) {
    warn("class " + std::to_string(c) + " has no weakly classified samples; lowest-margin seeds used");
  }
  fs::create_directories(f.out);
  write_generated(gen, f.out, test.class_names);
  write_neighbors(nearest_real_neighbors(gen, test), f.out / "neighbors.csv");
  if (!g.quiet) {
    std::cout << "generated " << gen.samples.size() << " samples: " << gen.achieved_centroid << " centroid, "
              << gen.achieved_boundary << " boundary; verification rate " << fmt(gen.verification_rate) << '\n';
    std::cout << "wrote " << f.out.string() << '\n';
  }
  return kExitOk;
}

struct EvaluateFlags {
  fs::path gen, out, test;
  ProviderFlags provider;
  double frequency = 100.0;
};

int run_evaluate(const EvaluateFlags& f, const Globals& g) {
  const auto gen = read_generated(f.gen);
  const auto gen_ds = to_dataset(gen);
  std::optional<FeatureDataset> train;
  if (!f.provider.train.empty()) {
    train = load_dataset(f.provider.train);
    check_same_shape(*train, gen_ds);
  }
  std::optional<FeatureDataset> test;
  if (!f.test.empty()) {
    test = load_dataset(f.test);
    check_same_shape(*test, gen_ds);
  }
  if (gen.samples.empty()) throw Error(ErrorKind::EmptyDataset, f.gen.string() + " holds no generated samples");
  std::optional<CentroidModel> cm;
  if (f.provider.kind == "centroid") {
    if (train) {
      cm = compute_centroids(*train);
    } else {
      warn("no --train given; centroids come from the generated set");
      cm = compute_centroids(gen_ds, "generated");
    }
  }
  const auto provider = make_provider(f.provider, cm.value_or(CentroidModel{}), train, g.seed);
  const auto rec = evaluate_generated(gen, *provider);

  SweepMatrix m;
  m.dataset = gen.name;
  m.provider = provider->name();
  if (test) m.accuracy_full = accuracy(*provider, *test);
  SweepRow row;
  row.frequency_pct = f.frequency;
  row.samples = rec.count;
  row.cells.push_back({gen.centroid_pct, gen.achieved_centroid, gen.achieved_boundary, rec.accuracy,
                       rec.centroid_accuracy, rec.boundary_accuracy, rec.verification_rate});
  m.rows.push_back(row);
  if (std::find(std::begin(kSweepColumns), std::end(kSweepColumns), gen.centroid_pct) == std::end(kSweepColumns)) {
    warn("centroid share " + fmt(gen.centroid_pct) + "% has no sweep.csv column; accuracy cell left empty");
  }
  append_sweep_rows(m, f.out);
  if (!g.quiet) {
    std::cout << "samples " << rec.count << ", accuracy " << fmt(rec.accuracy) << ", centroid "
              << fmt(rec.centroid_accuracy) << ", boundary " << fmt(rec.boundary_accuracy) << ", verified "
              << fmt(rec.verification_rate) << '\n';
    for (std::size_t c = 0; c < rec.per_class_accuracy.size(); ++c) {
      std::cout << "  class " << c << ": " << fmt(rec.per_class_accuracy[c]) << '\n';
    }
    std::cout << "appended to " << f.out.string() << '\n';
  }
  return kExitOk;
}

int run_demo_cmd(const fs::path& out, const Globals& g) {
  DemoOptions options;
  options.out_dir = out;
  options.seed = g.seed;
  const auto result = run_demo(options);
  if (!g.quiet) {
    std::cout << "nearest-centroid accuracy " << fmt(result.centroid_accuracy) << ", logistic accuracy "
              << fmt(result.logistic_accuracy) << '\n';
    std::cout << render_sweep_rows(result.report.sweeps.front()) << render_sweep_rows(result.report.sweeps.back());
    std::cout << "wrote report.json, boxplot.csv, sweep.csv, model.json and data/ under " << out.string() << '\n';
  }
  return kExitOk;
}

void add_metric_flags(CLI::App* cmd, MetricConfig& cfg) {
  cmd->add_option("--r", cfg.r, "Centroid radius fraction")->capture_default_str();
  cmd->add_option("--theta1", cfg.theta1, "Boundary band lower bound")->capture_default_str();
  cmd->add_option("--theta2", cfg.theta2, "Boundary band upper bound")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covcheck: coverage metrics, covariate shift and guided test generation for classifiers"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global seed")->capture_default_str();
  app.add_flag("--quiet,-q", g.quiet, "Suppress the summary on standard output");

  fs::path validate_dir;
  auto* validate_cmd = app.add_subcommand("validate", "Check a feature dump for schema and data violations");
  validate_cmd->add_option("--data", validate_dir, "Dump directory")->required();

  MetricsFlags metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compute EP, CP, BC and PBC");
  metrics_cmd->add_option("--train", metrics.train, "Training dump")->required();
  metrics_cmd->add_option("--test", metrics.test, "Test dump")->required();
  metrics_cmd->add_option("--out", metrics.out, "report.json path")->required();
  add_metric_flags(metrics_cmd, metrics.metric);

  ShiftFlags shift;
  auto* shift_cmd = app.add_subcommand("shift", "Per-class covariate shift (GMM + Jensen-Shannon)");
  shift_cmd->add_option("--train", shift.train, "Training dump")->required();
  shift_cmd->add_option("--test", shift.test, "Test dump")->required();
  shift_cmd->add_option("--out", shift.out, "report.json path")->required();
  shift_cmd->add_option("--components", shift.shift.components, "Mixture components")->capture_default_str();
  shift_cmd->add_option("--mc-samples", shift.shift.mc_samples, "Monte Carlo draws per side")->capture_default_str();
  shift_cmd->add_option("--max-iters", shift.shift.max_iters, "EM iteration cap")->capture_default_str();
  shift_cmd->add_option("--tol", shift.shift.tol, "Relative log-likelihood tolerance")->capture_default_str();

  GenerateFlags generate;
  auto* generate_cmd = app.add_subcommand("generate", "Generate centroid/boundary test points");
  generate_cmd->add_option("--test", generate.test, "Test dump")->required();
  generate_cmd->add_option("--split", generate.split, "Centroid percentage")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  generate_cmd->add_option("--count", generate.count, "Number of samples to generate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate_cmd->add_option("--out", generate.out, "Output directory")->required();
  generate_cmd->add_option("--wc-l", generate.generation.wc_l, "Lower confidence bound for seeds")
      ->capture_default_str();
  generate_cmd->add_option("--sigma-centroid", generate.generation.sigma_centroid, "Centroid jitter (x R)")
      ->capture_default_str();
  generate_cmd->add_option("--sigma-boundary", generate.generation.sigma_boundary, "Boundary jitter (x R)")
      ->capture_default_str();
  generate_cmd->add_option("--max-rejections", generate.generation.max_rejection_iters, "Rejection budget")
      ->capture_default_str();
  generate.provider.add_to(generate_cmd);
  add_metric_flags(generate_cmd, generate.metric);

  EvaluateFlags evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a generated set and append a sweep.csv row");
  evaluate_cmd->add_option("--gen", evaluate.gen, "Generated directory")->required();
  evaluate_cmd->add_option("--out", evaluate.out, "sweep.csv path")->required();
  evaluate_cmd->add_option("--test", evaluate.test, "Original test dump, for the full-set accuracy column");
  evaluate_cmd->add_option("--frequency", evaluate.frequency, "Size as a percentage of the test set")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  evaluate.provider.add_to(evaluate_cmd);

  fs::path demo_out;
  auto* demo_cmd = app.add_subcommand("demo", "End-to-end run on synthetic 10-class blobs");
  demo_cmd->add_option("--out", demo_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  // Flag values are checked here, before anything is read or written.
  try {
    if (*metrics_cmd) metrics.metric.check();
    if (*shift_cmd) shift.shift.check();
    if (*generate_cmd) {
      generate.metric.check();
      generate.generation.check(generate.metric);
      generate.provider.check();
    }
    if (*evaluate_cmd) evaluate.provider.check();
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*validate_cmd) return run_validate(validate_dir, g);
    if (*metrics_cmd) return run_metrics(metrics, g);
    if (*shift_cmd) return run_shift(shift, g);
    if (*generate_cmd) return run_generate(generate, g);
    if (*evaluate_cmd) return run_evaluate(evaluate, g);
    if (*demo_cmd) return run_demo_cmd(demo_out, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
