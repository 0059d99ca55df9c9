#include <drop/bench.hpp>

#include <drop/baselines.hpp>
#include <drop/csv.hpp>
#include <drop/parallel.hpp>
#include <drop/transform.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

namespace drop {

using nlohmann::json;

namespace {

MethodOutcome run_drop(const Dataset& raw, const MethodContext& ctx) {
  SelectionConfig sc;
  sc.fit.tol = ctx.config.tol;
  sc.fit.max_sweeps = ctx.config.max_sweeps;
  sc.fit.deadline = ctx.deadline;
  sc.grid = ctx.config.lambda_grid;
  sc.gamma_ebic = ctx.config.gamma_ebic;
  sc.criterion = ctx.criterion;
  const Selection sel = select_lambda(raw, sc);
  MethodOutcome out;
  out.adjacency = sel.fit.adjacency;
  out.converged = sel.fit.converged;
  for (const auto& f : sel.path) out.timed_out = out.timed_out || f.timed_out;
  return out;
}

MethodFn baseline_fn(BaselineMethod m) {
  return [m](const Dataset& raw, const MethodContext& ctx) {
    BaselineSelectionConfig bc;
    bc.grid = ctx.config.lambda_grid;
    bc.gamma_ebic = ctx.config.gamma_ebic;
    bc.deadline = ctx.deadline;
    const BaselineFit f = run_baseline(m, raw, bc);
    MethodOutcome out;
    out.adjacency = f.adjacency;
    out.converged = f.converged;
    out.timed_out = f.timed_out;
    return out;
  };
}

}  // namespace

std::vector<std::string> builtin_method_names() { return {"drop", "glasso", "mb", "npn", "kendall", "spearman"}; }

BenchMethod builtin_method(const std::string& name) {
  if (name == "drop") return {name, run_drop};
  return {name, baseline_fn(parse_baseline(name))};
}

std::vector<BenchMethod> builtin_methods(const std::vector<std::string>& names) {
  std::vector<BenchMethod> out;
  for (const auto& n : names) out.push_back(builtin_method(n));
  return out;
}

const std::vector<std::string>& summary_metric_names() {
  static const std::vector<std::string> names{"precision", "recall", "f1", "mcc", "tp", "fp", "fn"};
  return names;
}

double metric_value(const EdgeMetrics& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "f1") return m.f1;
  if (name == "mcc") return m.mcc;
  if (name == "tp") return static_cast<double>(m.tp);
  if (name == "fp") return static_cast<double>(m.fp);
  if (name == "fn") return static_cast<double>(m.fn);
  throw DropError("unknown metric '" + name + "'");
}

GroundTruthModel benchmark_model(const ExperimentConfig& cfg, const BenchOptions& opts) {
  if (opts.null_model) return model_from_adjacency(Adjacency(cfg.p), cfg.graph_type);
  RngStream rng(cfg.seed, kModelStream);
  return generate_graph(cfg.graph_type, cfg.p, rng);
}

Dataset replicate_data(const ExperimentConfig& cfg, const GroundTruthModel& model, int replicate) {
  const RngStream base(cfg.seed, kReplicateStreamBase + static_cast<std::uint64_t>(replicate));
  RngStream sample_rng = base.child(1);
  RngStream contam_rng = base.child(2);
  const Dataset clean = sample_gaussian(model, cfg.n, sample_rng);
  ContaminationSpec spec;
  spec.scheme = cfg.contamination;
  spec.rate = cfg.contamination_rate;
  return contaminate(clean, spec, contam_rng, model.sigma_chol).data;
}

MethodSummary summarize(const std::string& method, const std::vector<ReplicateRecord>& records, int replicates) {
  MethodSummary s;
  s.method = method;
  s.replicates = replicates;
  std::vector<const EdgeMetrics*> ok;
  for (const auto& r : records)
    if (r.method == method && r.metrics) ok.push_back(&*r.metrics);
  s.successes = static_cast<int>(ok.size());
  s.success_rate = replicates > 0 ? static_cast<double>(s.successes) / replicates : 0.0;
  for (const auto& name : summary_metric_names()) {
    MetricSummary m;
    if (!ok.empty()) {
      double sum = 0.0;
      for (const auto* e : ok) sum += metric_value(*e, name);
      const double mean = sum / static_cast<double>(ok.size());
      m.mean = mean;
      if (ok.size() >= 2) {
        double ss = 0.0;
        for (const auto* e : ok) ss += (metric_value(*e, name) - mean) * (metric_value(*e, name) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(ok.size() - 1));
        m.se = sd / std::sqrt(static_cast<double>(ok.size()));
      }
    }
    s.metrics[name] = m;
  }
  return s;
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const std::vector<BenchMethod>& methods,
                              const BenchOptions& opts) {
  cfg.validate();
  BenchmarkReport rep;
  rep.config = cfg;
  rep.options = opts;
  for (const auto& m : methods) rep.methods.push_back(m.name);
  const GroundTruthModel model = benchmark_model(cfg, opts);
  rep.constants = model.constants;
  rep.true_edges = model.a_star.edge_count();

  const size_t n_methods = methods.size();
  std::vector<std::vector<ReplicateRecord>> per_rep(static_cast<size_t>(cfg.replicates));
  parallel_for(per_rep.size(), opts.workers, [&](size_t r) {
    auto& out = per_rep[r];
    out.resize(n_methods);
    Dataset data;
    try {
      data = replicate_data(cfg, model, static_cast<int>(r));
    } catch (const std::exception& e) {
      for (auto& rec : out) rec.error = std::string("data generation failed: ") + e.what();
    }
    for (size_t m = 0; m < n_methods; ++m) {
      ReplicateRecord& rec = out[m];
      rec.replicate_id = static_cast<int>(r);
      rec.method = methods[m].name;
      if (!rec.error.empty()) continue;
      const MethodContext ctx{cfg, opts.criterion, Deadline::after_seconds(cfg.time_limit_s)};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const MethodOutcome o = methods[m].fn(data, ctx);
        rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.converged = o.converged;
        rec.timed_out = o.timed_out || rec.wall_time_s > cfg.time_limit_s;
        if (!rec.timed_out && o.converged) rec.metrics = edge_metrics(o.adjacency, model.a_star);
        else if (!rec.timed_out) rec.error = "no converged fit";
      } catch (const std::exception& e) {
        rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.timed_out = rec.wall_time_s > cfg.time_limit_s;
        rec.error = e.what();
      }
    }
  });
  for (auto& recs : per_rep)
    for (auto& r : recs) rep.records.push_back(std::move(r));
  for (const auto& name : rep.methods) rep.summaries.push_back(summarize(name, rep.records, cfg.replicates));
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

json config_to_json(const ExperimentConfig& c) {
  return json{{"graph_type", to_string(c.graph_type)},
              {"p", c.p},
              {"n", c.n},
              {"contamination", to_string(c.contamination)},
              {"contamination_rate", c.contamination_rate},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"lambda_grid", c.lambda_grid},
              {"tol", c.tol},
              {"max_sweeps", c.max_sweeps},
              {"gamma_ebic", c.gamma_ebic},
              {"time_limit_s", c.time_limit_s}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.graph_type = parse_graph_type(j.at("graph_type").get<std::string>());
  c.p = j.at("p").get<int>();
  c.n = j.at("n").get<int>();
  c.contamination = parse_contamination(j.at("contamination").get<std::string>());
  c.contamination_rate = j.at("contamination_rate").get<double>();
  c.replicates = j.at("replicates").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  c.tol = j.at("tol").get<double>();
  c.max_sweeps = j.at("max_sweeps").get<int>();
  c.gamma_ebic = j.at("gamma_ebic").get<double>();
  c.time_limit_s = j.at("time_limit_s").get<double>();
  c.validate();
  return c;
}

json constants_to_json(const GeneratorConstants& c) {
  return json{{"v", c.v},
              {"u", c.u},
              {"random_edge_prob", c.random_edge_prob},
              {"cluster_within_prob", c.cluster_within_prob},
              {"unit_variance", c.unit_variance},
              {"group_rule", "max(1, round(p / 10))"}};
}

GeneratorConstants constants_from_json(const json& j) {
  GeneratorConstants c;
  c.v = j.at("v").get<double>();
  c.u = j.at("u").get<double>();
  c.random_edge_prob = j.at("random_edge_prob").get<double>();
  c.cluster_within_prob = j.at("cluster_within_prob").get<double>();
  c.unit_variance = j.at("unit_variance").get<bool>();
  return c;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json metrics_to_json(const EdgeMetrics& m) {
  return json{{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
              {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"mcc", m.mcc}};
}

EdgeMetrics metrics_from_json(const json& j) {
  EdgeMetrics m;
  m.tp = j.at("tp").get<long long>();
  m.fp = j.at("fp").get<long long>();
  m.fn = j.at("fn").get<long long>();
  m.tn = j.at("tn").get<long long>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.mcc = j.at("mcc").get<double>();
  return m;
}

json report_to_json(const BenchmarkReport& r, bool include_timing) {
  json j;
  j["schema"] = "drop-benchmark-report";
  j["schema_version"] = r.schema_version;
  j["config"] = config_to_json(r.config);
  j["options"] = {{"criterion", to_string(r.options.criterion)},
                  {"null_model", r.options.null_model},
                  {"time_limit_scope", "full per-method pipeline per replicate (transform, lambda path, selection)"}};
  j["generator_constants"] = constants_to_json(r.constants);
  j["methods"] = r.methods;
  j["true_edges"] = r.true_edges;
  json recs = json::array();
  for (const auto& rec : r.records) {
    json e{{"replicate", rec.replicate_id},
           {"method", rec.method},
           {"converged", rec.converged},
           {"timed_out", rec.timed_out},
           {"metrics", rec.metrics ? metrics_to_json(*rec.metrics) : json(nullptr)}};
    if (!rec.error.empty()) e["error"] = rec.error;
    if (include_timing) e["wall_time_s"] = rec.wall_time_s;
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  json sums = json::array();
  for (const auto& s : r.summaries) {
    json m = json::object();
    for (const auto& [name, ms] : s.metrics) m[name] = {{"mean", optional_number(ms.mean)}, {"se", optional_number(ms.se)}};
    sums.push_back({{"method", s.method},
                    {"replicates", s.replicates},
                    {"successes", s.successes},
                    {"success_rate", s.success_rate},
                    {"metrics", std::move(m)}});
  }
  j["summaries"] = std::move(sums);
  return j;
}

}  // namespace

std::string emit_report(const BenchmarkReport& r, ReportFormat format, bool include_timing) {
  if (format == ReportFormat::json) return report_to_json(r, include_timing).dump(2) + "\n";
  std::ostringstream out;
  out << "method,metric,mean,se,success_rate\n";
  for (const auto& s : r.summaries) {
    for (const auto& name : summary_metric_names()) {
      const auto it = s.metrics.find(name);
      const MetricSummary ms = it == s.metrics.end() ? MetricSummary{} : it->second;
      out << s.method << ',' << name << ',' << (ms.mean ? format_double(*ms.mean) : "") << ','
          << (ms.se ? format_double(*ms.se) : "") << ',' << format_double(s.success_rate) << '\n';
    }
  }
  return out.str();
}

BenchmarkReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DropError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw DropError("unsupported report schema version " + j.at("schema_version").dump());
    BenchmarkReport r;
    r.config = config_from_json(j.at("config"));
    const auto& o = j.at("options");
    r.options.criterion = parse_criterion(o.at("criterion").get<std::string>());
    r.options.null_model = o.at("null_model").get<bool>();
    r.constants = constants_from_json(j.at("generator_constants"));
    r.methods = j.at("methods").get<std::vector<std::string>>();
    r.true_edges = j.at("true_edges").get<Index>();
    for (const auto& e : j.at("records")) {
      ReplicateRecord rec;
      rec.replicate_id = e.at("replicate").get<int>();
      rec.method = e.at("method").get<std::string>();
      rec.converged = e.at("converged").get<bool>();
      rec.timed_out = e.at("timed_out").get<bool>();
      if (!e.at("metrics").is_null()) rec.metrics = metrics_from_json(e.at("metrics"));
      if (e.contains("error")) rec.error = e.at("error").get<std::string>();
      if (e.contains("wall_time_s")) rec.wall_time_s = e.at("wall_time_s").get<double>();
      r.records.push_back(std::move(rec));
    }
    for (const auto& s : j.at("summaries")) {
      MethodSummary ms;
      ms.method = s.at("method").get<std::string>();
      ms.replicates = s.at("replicates").get<int>();
      ms.successes = s.at("successes").get<int>();
      ms.success_rate = s.at("success_rate").get<double>();
      for (const auto& [name, v] : s.at("metrics").items())
        ms.metrics[name] = MetricSummary{number_or_null(v.at("mean")), number_or_null(v.at("se"))};
      r.summaries.push_back(std::move(ms));
    }
    return r;
  } catch (const json::exception& e) {
    throw DropError(std::string("malformed report: ") + e.what());
  }
}

BenchmarkReport rerun_from_report(const std::string& json_text, int workers) {
  const BenchmarkReport old = report_from_json(json_text);
  BenchOptions opts = old.options;
  opts.workers = workers;
  return run_benchmark(old.config, builtin_methods(old.methods), opts);
}

}  // namespace drop
