// Command-line front end: simulate, fit, select, bench, metrics, fmri-analyze.

#include <drop/baselines.hpp>
#include <drop/bench.hpp>
#include <drop/csv.hpp>
#include <drop/estimator.hpp>
#include <drop/fmri.hpp>
#include <drop/metrics.hpp>
#include <drop/selection.hpp>
#include <drop/simgen.hpp>
#include <drop/transform.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw drop::DropError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw drop::DropError("cannot write '" + path + "'");
  out << text;
  if (!out) throw drop::DropError("write failed for '" + path + "'");
}

/// First line of every CSV output: the resolved configuration as compact JSON.
std::string provenance_line(const json& config) { return "# config: " + config.dump() + "\n"; }

std::string matrix_csv(const drop::Matrix& m, const std::vector<std::string>& header) {
  std::ostringstream s;
  drop::write_matrix_csv(s, m, header);
  return s.str();
}

json edges_json(const drop::Adjacency& a) {
  json e = json::array();
  for (const auto& [i, j] : a.edges()) e.push_back({i, j});
  return e;
}

drop::Adjacency adjacency_from_json(const json& j) {
  const auto p = j.at("p").get<drop::Index>();
  drop::Adjacency a(p);
  for (const auto& e : j.at("edges")) {
    const auto i = e.at(0).get<drop::Index>(), k = e.at(1).get<drop::Index>();
    if (i < 0 || k < 0 || i >= p || k >= p || i == k) throw drop::DropError("edge list entry out of range");
    a.set(i, k, true);
  }
  return a;
}

json trace_json(const drop::SelectionTrace& t) {
  json scores = json::array();
  for (double s : t.ebic_scores) scores.push_back(std::isfinite(s) ? json(s) : json(nullptr));
  std::vector<bool> conv(t.converged.begin(), t.converged.end());
  return json{{"lambdas", t.lambdas},
              {"scores", scores},
              {"edge_counts", t.edge_counts},
              {"converged", conv},
              {"chosen_index", t.chosen_index}};
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string graph = "band", contamination = "clean", out, from_config;
  int p = 0, n = 0;
  double rate = 0.1;
  std::uint64_t seed = 1;
};

json simulate_config(const SimulateArgs& a) {
  return json{{"graph_type", a.graph}, {"p", a.p}, {"n", a.n}, {"contamination", a.contamination},
              {"contamination_rate", a.rate}, {"seed", a.seed}};
}

int run_simulate(SimulateArgs a) {
  if (!a.from_config.empty()) {
    const json c = json::parse(read_file(a.from_config)).at("config");
    a.graph = c.at("graph_type").get<std::string>();
    a.p = c.at("p").get<int>();
    a.n = c.at("n").get<int>();
    a.contamination = c.at("contamination").get<std::string>();
    a.rate = c.at("contamination_rate").get<double>();
    a.seed = c.at("seed").get<std::uint64_t>();
  }
  if (a.p < 2 || a.n < 2) throw drop::DropError("--p and --n must be at least 2");
  const auto type = drop::parse_graph_type(a.graph);
  drop::ContaminationSpec spec;
  spec.scheme = drop::parse_contamination(a.contamination);
  spec.rate = a.rate;
  spec.validate();
  drop::RngStream model_rng(a.seed, drop::kModelStream);
  const auto model = drop::generate_graph(type, a.p, model_rng);
  const drop::RngStream base(a.seed, drop::kReplicateStreamBase);
  drop::RngStream sample_rng = base.child(1), contam_rng = base.child(2);
  const auto clean = drop::sample_gaussian(model, a.n, sample_rng);
  const auto c = drop::contaminate(clean, spec, contam_rng, model.sigma_chol);

  const json config = simulate_config(a);
  std::vector<std::string> header;
  for (int j = 0; j < a.p; ++j) header.push_back("x" + std::to_string(j + 1));
  write_file(a.out + ".csv", provenance_line(config) + matrix_csv(c.data.values(), header));
  json side{{"schema", "drop-simulation"},
            {"schema_version", drop::kReportSchemaVersion},
            {"config", config},
            {"generator_constants", drop::constants_to_json(model.constants)},
            {"p", a.p},
            {"edges", edges_json(model.a_star)},
            {"contaminated_rows", c.rows}};
  json k = json::array();
  for (drop::Index i = 0; i < model.k_star.entries().rows(); ++i) {
    json r = json::array();
    for (drop::Index j = 0; j < a.p; ++j) r.push_back(model.k_star.entries()(i, j));
    k.push_back(std::move(r));
  }
  side["k_star"] = std::move(k);
  write_file(a.out + ".json", side.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data, method = "drop", out, criterion = "nodewise_refit";
  double lambda = 0.0, tol = 1e-4, edge_threshold = 1e-6, gamma = 0.5;
  int max_sweeps = 100;
  bool auto_select = false;
};

int run_fit(const FitArgs& a) {
  const drop::Dataset raw = drop::read_dataset_csv(a.data);
  json config{{"data", a.data}, {"method", a.method}, {"tol", a.tol}, {"max_sweeps", a.max_sweeps},
              {"edge_threshold", a.edge_threshold}, {"gamma_ebic", a.gamma}, {"criterion", a.criterion},
              {"mode", a.auto_select ? "auto" : "fixed"}};
  if (!a.auto_select) config["lambda"] = a.lambda;

  drop::Matrix k;
  drop::Adjacency adj;
  json trace;
  double lambda = a.lambda;
  bool converged = true;
  if (a.method == "drop") {
    if (a.auto_select) {
      drop::SelectionConfig sc;
      sc.fit.tol = a.tol;
      sc.fit.max_sweeps = a.max_sweeps;
      sc.fit.edge_threshold = a.edge_threshold;
      sc.gamma_ebic = a.gamma;
      sc.criterion = drop::parse_criterion(a.criterion);
      const auto sel = drop::select_lambda(raw, sc);
      k = sel.fit.k;
      adj = sel.fit.adjacency;
      lambda = sel.fit.lambda;
      converged = sel.fit.converged;
      trace = trace_json(sel.trace);
      trace["sweeps"] = sel.fit.sweeps;
    } else {
      drop::DropConfig dc;
      dc.lambda = a.lambda;
      dc.tol = a.tol;
      dc.max_sweeps = a.max_sweeps;
      dc.edge_threshold = a.edge_threshold;
      const auto f = drop::fit_drop(raw, dc);
      k = f.k;
      adj = f.adjacency;
      converged = f.converged;
      trace = json{{"sweeps", f.sweeps}, {"last_delta", f.last_delta}, {"warnings", f.warnings}};
    }
  } else {
    const auto m = drop::parse_baseline(a.method);
    if (a.auto_select) {
      drop::BaselineSelectionConfig bc;
      bc.gamma_ebic = a.gamma;
      bc.edge_threshold = a.edge_threshold;
      const auto f = drop::run_baseline(m, raw, bc);
      if (m != drop::BaselineMethod::mb && f.trace.chosen_index < 0) throw drop::DropError("no converged fit on the lambda path");
      k = f.precision;
      adj = f.adjacency;
      lambda = f.lambda;
      converged = f.converged;
      trace = trace_json(f.trace);
      trace["repaired"] = f.repaired;
    } else if (m == drop::BaselineMethod::mb) {
      adj = drop::fit_mb(drop::center_columns(raw), a.lambda).adjacency;
    } else {
      bool repaired = false;
      const auto g = drop::fit_rank_glasso(raw, m, a.lambda, &repaired);
      k = g.precision;
      adj = drop::Adjacency::from_threshold(k, a.edge_threshold);
      converged = g.converged;
      trace = json{{"iterations", g.iterations}, {"repaired", repaired}};
    }
  }
  if (k.size() > 0) write_file(a.out + "_precision.csv", provenance_line(config) + matrix_csv(k, raw.column_names()));
  write_file(a.out + "_edges.json", json{{"config", config},
                                         {"p", raw.p()},
                                         {"lambda", lambda},
                                         {"converged", converged},
                                         {"edges", edges_json(adj)}}
                                        .dump(2) + "\n");
  write_file(a.out + "_trace.json", json{{"config", config}, {"trace", trace}}.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct SelectArgs {
  std::string data, out, criterion = "nodewise_refit";
  int n_lambda = 20, max_sweeps = 100;
  double ratio = 0.01, gamma = 0.5, tol = 1e-4;
  bool cold = false;
  int workers = 1;
};

int run_select(const SelectArgs& a) {
  const drop::Dataset raw = drop::read_dataset_csv(a.data);
  drop::SelectionConfig sc;
  sc.n_lambda = a.n_lambda;
  sc.lambda_min_ratio = a.ratio;
  sc.gamma_ebic = a.gamma;
  sc.fit.tol = a.tol;
  sc.fit.max_sweeps = a.max_sweeps;
  sc.criterion = drop::parse_criterion(a.criterion);
  sc.warm_start = !a.cold;
  sc.workers = a.workers;
  const json config{{"data", a.data}, {"n_lambda", a.n_lambda}, {"lambda_min_ratio", a.ratio},
                    {"gamma_ebic", a.gamma}, {"tol", a.tol}, {"max_sweeps", a.max_sweeps},
                    {"criterion", a.criterion}, {"warm_start", !a.cold}};
  const auto sel = drop::select_lambda(raw, sc);
  write_file(a.out, json{{"config", config},
                         {"trace", trace_json(sel.trace)},
                         {"lambda", sel.fit.lambda},
                         {"p", raw.p()},
                         {"edges", edges_json(sel.fit.adjacency)}}
                        .dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string graph, contamination = "clean", methods = "drop,glasso,mb,npn,spearman", out, from_config,
                     criterion = "nodewise_refit";
  int p = 0, n = 0, replicates = 20, max_sweeps = 100, workers = 0;
  double rate = 0.1, tol = 1e-4, gamma = 0.5, time_limit = 60.0;
  std::uint64_t seed = 1;
  std::vector<double> grid;
  bool timing = false, null_model = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int run_bench(const BenchArgs& a) {
  const int workers = a.workers > 0 ? a.workers : drop::default_worker_count();
  drop::BenchmarkReport rep;
  if (!a.from_config.empty()) {
    rep = drop::rerun_from_report(read_file(a.from_config), workers);
  } else {
    drop::ExperimentConfig cfg;
    cfg.graph_type = drop::parse_graph_type(a.graph);
    cfg.p = a.p;
    cfg.n = a.n;
    cfg.contamination = drop::parse_contamination(a.contamination);
    cfg.contamination_rate = a.rate;
    cfg.replicates = a.replicates;
    cfg.seed = a.seed;
    cfg.lambda_grid = a.grid;
    cfg.tol = a.tol;
    cfg.max_sweeps = a.max_sweeps;
    cfg.gamma_ebic = a.gamma;
    cfg.time_limit_s = a.time_limit;
    cfg.validate();
    drop::BenchOptions opts;
    opts.criterion = drop::parse_criterion(a.criterion);
    opts.workers = workers;
    opts.null_model = a.null_model;
    rep = drop::run_benchmark(cfg, drop::builtin_methods(split_list(a.methods)), opts);
  }
  const std::string json_text = drop::emit_report(rep, drop::ReportFormat::json, a.timing);
  write_file(a.out + ".json", json_text);
  const json config = json::parse(json_text);
  write_file(a.out + ".csv", provenance_line(json{{"config", config.at("config")},
                                                  {"options", config.at("options")},
                                                  {"generator_constants", config.at("generator_constants")},
                                                  {"methods", config.at("methods")}}) +
                                 drop::emit_report(rep, drop::ReportFormat::csv));
  for (const auto& s : rep.summaries) {
    const auto& f1 = s.metrics.at("f1");
    std::cout << s.method << ": success " << s.successes << "/" << s.replicates;
    if (f1.mean) std::cout << ", mean F1 " << *f1.mean;
    std::cout << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

int run_metrics(const std::string& estimate, const std::string& truth, const std::string& out) {
  const drop::Adjacency a_hat = adjacency_from_json(json::parse(read_file(estimate)));
  const drop::Adjacency a_star = adjacency_from_json(json::parse(read_file(truth)));
  const auto m = drop::edge_metrics(a_hat, a_star);
  const json res{{"config", {{"estimate", estimate}, {"truth", truth}}},
                 {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
                 {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"mcc", m.mcc}};
  if (out.empty()) std::cout << res.dump(2) << "\n";
  else write_file(out, res.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct FmriArgs {
  std::string series, labels, methods = "drop,glasso,npn,spearman", contamination = "clean,cauchy,leverage", out,
                                  criterion = "nodewise_refit";
  double rate = 0.1, threshold = 0.005, time_limit = 60.0;
  std::uint64_t seed = 1;
  bool no_standardize = false;
};

int run_fmri(const FmriArgs& a) {
  const drop::Dataset series = drop::read_dataset_csv(a.series);
  const drop::RoiLabels labels = drop::read_roi_labels(a.labels);
  drop::FmriOptions o;
  o.methods = split_list(a.methods);
  o.schemes.clear();
  for (const auto& s : split_list(a.contamination)) o.schemes.push_back(drop::parse_contamination(s));
  o.contamination_rate = a.rate;
  o.display_threshold = a.threshold;
  o.standardize = !a.no_standardize;
  o.seed = a.seed;
  o.time_limit_s = a.time_limit;
  o.criterion = drop::parse_criterion(a.criterion);
  const auto rep = drop::fmri_analyze(series, labels, o);
  const std::string js = drop::fmri_report_json(rep);
  write_file(a.out + ".json", js);
  json cfg = json::parse(js).at("config");
  cfg["series"] = a.series;
  cfg["labels"] = a.labels;
  write_file(a.out + ".csv", provenance_line(cfg) + drop::fmri_report_csv(rep));
  for (const auto& r : rep.results) {
    std::cout << drop::to_string(r.scheme) << " " << r.method << ": " << r.edges << " edges";
    if (r.modularity) std::cout << ", modularity " << *r.modularity;
    if (!r.error.empty()) std::cout << " (" << r.error << ")";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust sparse Gaussian graphical model estimation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a dataset from a generated graph");
  simulate->add_option("--graph", sim.graph, "band|hub|cluster|random|scalefree")->capture_default_str();
  auto* sim_p = simulate->add_option("--p", sim.p, "Number of variables");
  auto* sim_n = simulate->add_option("--n", sim.n, "Number of samples");
  simulate->add_option("--contamination", sim.contamination, "clean|cauchy|leverage")->capture_default_str();
  simulate->add_option("--rate", sim.rate, "Contamination rate")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output prefix (writes PREFIX.csv and PREFIX.json)")->required();
  auto* sim_from = simulate->add_option("--from-config", sim.from_config, "Re-run from a simulation sidecar JSON");
  sim_p->excludes(sim_from);
  sim_n->excludes(sim_from);

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Estimate a graph from a data CSV");
  fitc->add_option("--data", fit.data, "Data CSV (rows = samples)")->required()->check(CLI::ExistingFile);
  fitc->add_option("--method", fit.method, "drop|glasso|mb|npn|kendall|spearman")->capture_default_str();
  auto* fit_lambda = fitc->add_option("--lambda", fit.lambda, "Fixed regularization parameter");
  auto* fit_auto = fitc->add_flag("--auto", fit.auto_select, "Select lambda on a path by EBIC");
  fit_lambda->excludes(fit_auto);
  fitc->add_option("--tol", fit.tol, "Convergence tolerance")->capture_default_str();
  fitc->add_option("--max-sweeps", fit.max_sweeps, "Maximum coordinate sweeps")->capture_default_str();
  fitc->add_option("--edge-threshold", fit.edge_threshold, "Support threshold on |K_ij|")->capture_default_str();
  fitc->add_option("--gamma", fit.gamma, "EBIC gamma")->capture_default_str();
  fitc->add_option("--criterion", fit.criterion, "nodewise_refit|summed")->capture_default_str();
  fitc->add_option("--out", fit.out, "Output prefix")->required();

  SelectArgs sel;
  auto* selc = app.add_subcommand("select", "Run the DROP lambda path and report the selection trace");
  selc->add_option("--data", sel.data, "Data CSV")->required()->check(CLI::ExistingFile);
  selc->add_option("--n-lambda", sel.n_lambda, "Grid size")->capture_default_str();
  selc->add_option("--ratio", sel.ratio, "lambda_min / lambda_max")->capture_default_str();
  selc->add_option("--gamma", sel.gamma, "EBIC gamma")->capture_default_str();
  selc->add_option("--tol", sel.tol, "Convergence tolerance")->capture_default_str();
  selc->add_option("--max-sweeps", sel.max_sweeps, "Maximum coordinate sweeps")->capture_default_str();
  selc->add_option("--criterion", sel.criterion, "nodewise_refit|summed")->capture_default_str();
  selc->add_flag("--cold", sel.cold, "Fit every grid point from the initialization (parallel)");
  selc->add_option("--workers", sel.workers, "Threads for cold starts")->capture_default_str();
  selc->add_option("--out", sel.out, "Output JSON")->required();

  BenchArgs bench;
  auto* benchc = app.add_subcommand("bench", "Monte Carlo structure-recovery benchmark");
  auto* b_graph = benchc->add_option("--graph", bench.graph, "band|hub|cluster|random|scalefree");
  auto* b_p = benchc->add_option("--p", bench.p, "Number of variables");
  auto* b_n = benchc->add_option("--n", bench.n, "Number of samples");
  benchc->add_option("--contamination", bench.contamination, "clean|cauchy|leverage")->capture_default_str();
  benchc->add_option("--rate", bench.rate, "Contamination rate")->capture_default_str();
  benchc->add_option("--replicates", bench.replicates, "Replicates")->capture_default_str();
  benchc->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  benchc->add_option("--methods", bench.methods, "Comma-separated methods")->capture_default_str();
  benchc->add_option("--lambda-grid", bench.grid, "Explicit decreasing lambda grid for every method");
  benchc->add_option("--tol", bench.tol, "Convergence tolerance")->capture_default_str();
  benchc->add_option("--max-sweeps", bench.max_sweeps, "Maximum coordinate sweeps")->capture_default_str();
  benchc->add_option("--gamma", bench.gamma, "EBIC gamma")->capture_default_str();
  benchc->add_option("--time-limit", bench.time_limit, "Seconds per method per replicate")->capture_default_str();
  benchc->add_option("--criterion", bench.criterion, "DROP selection criterion")->capture_default_str();
  benchc->add_option("--workers", bench.workers, "Replicate workers (default: DROP_WORKERS or all cores)");
  benchc->add_flag("--null-model", bench.null_model, "Use K* = I instead of the generated graph");
  benchc->add_flag("--timing", bench.timing, "Include wall times in the JSON (breaks bit-reproducibility)");
  benchc->add_option("--out", bench.out, "Output prefix (writes PREFIX.json and PREFIX.csv)")->required();
  auto* b_from = benchc->add_option("--from-config", bench.from_config, "Re-run the benchmark stored in a JSON report")
                     ->check(CLI::ExistingFile);
  for (auto* o : {b_graph, b_p, b_n}) o->excludes(b_from);

  std::string m_est, m_truth, m_out;
  auto* metricsc = app.add_subcommand("metrics", "Edge recovery metrics between two edge-list JSON files");
  metricsc->add_option("--estimate", m_est, "JSON with p and edges (e.g. fit output)")->required()->check(CLI::ExistingFile);
  metricsc->add_option("--truth", m_truth, "JSON with p and edges (e.g. simulate sidecar)")->required()->check(CLI::ExistingFile);
  metricsc->add_option("--out", m_out, "Output JSON (default: stdout)");

  FmriArgs fm;
  auto* fmric = app.add_subcommand("fmri-analyze", "Network analysis of ROI time series");
  fmric->add_option("--series", fm.series, "T x p CSV with ROI names in the header")->required()->check(CLI::ExistingFile);
  fmric->add_option("--labels", fm.labels, "CSV of roi,system")->required()->check(CLI::ExistingFile);
  fmric->add_option("--methods", fm.methods, "Comma-separated methods")->capture_default_str();
  fmric->add_option("--contamination", fm.contamination, "Comma-separated schemes")->capture_default_str();
  fmric->add_option("--rate", fm.rate, "Contamination rate")->capture_default_str();
  fmric->add_option("--threshold", fm.threshold, "Display threshold on |partial correlation|")->capture_default_str();
  fmric->add_flag("--no-standardize", fm.no_standardize, "Fit on the raw series");
  fmric->add_option("--seed", fm.seed, "Contamination seed")->capture_default_str();
  fmric->add_option("--time-limit", fm.time_limit, "Seconds per fit")->capture_default_str();
  fmric->add_option("--criterion", fm.criterion, "DROP selection criterion")->capture_default_str();
  fmric->add_option("--out", fm.out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  // Requirements that depend on which mode was chosen.
  if (*simulate && sim.from_config.empty() && (!*sim_p || !*sim_n)) {
    std::cerr << "simulate: --p and --n are required unless --from-config is given\n";
    return 2;
  }
  if (*fitc && !*fit_lambda && !fit.auto_select) {
    std::cerr << "fit: one of --lambda or --auto is required\n";
    return 2;
  }
  if (*benchc && bench.from_config.empty()) {
    for (auto* o : {b_graph, b_p, b_n}) {
      if (!*o) {
        std::cerr << "bench: " << o->get_name() << " is required\n";
        return 2;
      }
    }
  }
  try {
    if (*simulate) return run_simulate(sim);
    if (*fitc) return run_fit(fit);
    if (*selc) return run_select(sel);
    if (*benchc) return run_bench(bench);
    if (*metricsc) return run_metrics(m_est, m_truth, m_out);
    if (*fmric) return run_fmri(fm);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
