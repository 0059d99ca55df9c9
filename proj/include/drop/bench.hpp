#pragma once

#include <drop/core.hpp>
#include <drop/metrics.hpp>
#include <drop/selection.hpp>
#include <drop/simgen.hpp>

#include <json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace drop {

inline constexpr int kReportSchemaVersion = 1;

/// What a method hands back to the harness for one replicate.
struct MethodOutcome {
  Adjacency adjacency;
  bool converged = false;
  bool timed_out = false;
};

/// Settings every method receives for one replicate.
struct MethodContext {
  const ExperimentConfig& config;
  SelectionCriterion criterion;
  Deadline deadline;
};

using MethodFn = std::function<MethodOutcome(const Dataset& raw, const MethodContext& ctx)>;

struct BenchMethod {
  std::string name;
  MethodFn fn;
};

/// "drop", "glasso", "mb", "npn", "kendall", "spearman".
BenchMethod builtin_method(const std::string& name);
std::vector<BenchMethod> builtin_methods(const std::vector<std::string>& names);
std::vector<std::string> builtin_method_names();

struct ReplicateRecord {
  int replicate_id = 0;
  std::string method;
  std::optional<EdgeMetrics> metrics;  // absent when the method timed out or failed
  double wall_time_s = 0.0;
  bool converged = false;
  bool timed_out = false;
  std::string error;
};

struct MetricSummary {
  std::optional<double> mean;  // absent with no successful replicate
  std::optional<double> se;    // sample sd / sqrt(successes); absent below two successes
};

struct MethodSummary {
  std::string method;
  int replicates = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::map<std::string, MetricSummary> metrics;  // keyed by summary_metric_names()
};

/// precision, recall, f1, mcc, tp, fp, fn
const std::vector<std::string>& summary_metric_names();
double metric_value(const EdgeMetrics& m, const std::string& name);

struct BenchOptions {
  SelectionCriterion criterion = SelectionCriterion::nodewise_refit;
  int workers = 1;
  /// Use K* = I instead of the configured graph (false-positive control).
  bool null_model = false;
};

struct BenchmarkReport {
  int schema_version = kReportSchemaVersion;
  ExperimentConfig config;
  BenchOptions options;
  GeneratorConstants constants;
  std::vector<std::string> methods;
  Index true_edges = 0;
  std::vector<ReplicateRecord> records;  // replicate-major, method order within
  std::vector<MethodSummary> summaries;  // method order
};

/// Replicate r draws from RngStream(seed, kReplicateStreamBase + r); the
/// ground truth from RngStream(seed, kModelStream).
inline constexpr std::uint64_t kModelStream = 0;
inline constexpr std::uint64_t kReplicateStreamBase = 1000;

/// One ground truth per configuration; per replicate a fresh sample,
/// contamination and every method under cfg.time_limit_s. Failures are
/// recorded, never thrown (invalid configurations still throw).
BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const std::vector<BenchMethod>& methods,
                              const BenchOptions& opts = {});

/// The data replicate r sees (for inspection and tests).
Dataset replicate_data(const ExperimentConfig& cfg, const GroundTruthModel& model, int replicate);
GroundTruthModel benchmark_model(const ExperimentConfig& cfg, const BenchOptions& opts);

/// Mean and standard error per metric from the records of one method.
MethodSummary summarize(const std::string& method, const std::vector<ReplicateRecord>& records, int replicates);

enum class ReportFormat { csv, json };

/// CSV: header method,metric,mean,se,success_rate then one row per (method,
/// metric); undefined values are empty fields. JSON: the full report.
/// Wall times are written only when `include_timing` is set, so that default
/// reports are reproducible bit for bit.
std::string emit_report(const BenchmarkReport& r, ReportFormat format, bool include_timing = false);

/// Parses a JSON report produced by emit_report.
BenchmarkReport report_from_json(const std::string& text);

/// JSON forms shared by every output file for provenance.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json constants_to_json(const GeneratorConstants& c);
GeneratorConstants constants_from_json(const nlohmann::json& j);

/// Re-runs the benchmark recorded in a JSON report with built-in methods.
BenchmarkReport rerun_from_report(const std::string& json_text, int workers = 1);

}  // namespace drop
