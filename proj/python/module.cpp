#include <drop/baselines.hpp>
#include <drop/bench.hpp>
#include <drop/estimator.hpp>
#include <drop/metrics.hpp>
#include <drop/selection.hpp>
#include <drop/simgen.hpp>
#include <drop/transform.hpp>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace drop;

namespace {

Matrix adjacency_matrix(const Adjacency& a) {
  Matrix m = Matrix::Zero(a.p(), a.p());
  for (const auto& [i, j] : a.edges()) m(i, j) = m(j, i) = 1.0;
  return m;
}

Adjacency adjacency_from(const Matrix& m) { return Adjacency::from_threshold(m, 0.0); }

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["precision"] = f.k;
  d["adjacency"] = adjacency_matrix(f.adjacency);
  d["lambda"] = f.lambda;
  d["sweeps"] = f.sweeps;
  d["converged"] = f.converged;
  d["timed_out"] = f.timed_out;
  d["edges"] = f.edge_count();
  return d;
}

py::dict trace_dict(const SelectionTrace& t) {
  py::dict d;
  d["lambdas"] = t.lambdas;
  d["scores"] = t.ebic_scores;
  d["edge_counts"] = t.edge_counts;
  d["converged"] = t.converged;
  d["chosen_index"] = t.chosen_index;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DROP sparse Gaussian graphical model estimation";

  py::register_exception<DropError>(m, "DropError", PyExc_ValueError);

  m.def("normal_quantile", &normal_quantile, py::arg("u"));
  m.def(
      "npn_transform", [](const Matrix& x) { return npn_transform(Dataset(x)).values(); }, py::arg("x"),
      "Rank-based normal scores per column, column-centered.");
  m.def(
      "kendall_skeptic", [](const Matrix& x) { return kendall_skeptic(Dataset(x)).entries; }, py::arg("x"));
  m.def(
      "spearman_skeptic", [](const Matrix& x) { return spearman_skeptic(Dataset(x)).entries; }, py::arg("x"));

  m.def(
      "fit_drop",
      [](const Matrix& x, double lam, double tol, int max_sweeps) {
        DropConfig cfg;
        cfg.lambda = lam;
        cfg.tol = tol;
        cfg.max_sweeps = max_sweeps;
        py::gil_scoped_release release;
        const FitResult f = fit_drop(Dataset(x), cfg);
        py::gil_scoped_acquire acquire;
        return fit_dict(f);
      },
      py::arg("x"), py::arg("lam"), py::arg("tol") = 1e-4, py::arg("max_sweeps") = 100,
      "DROP fit at one lambda on raw data.");

  m.def(
      "select_lambda",
      [](const Matrix& x, int n_lambda, double ratio, double gamma, const std::string& criterion) {
        SelectionConfig cfg;
        cfg.n_lambda = n_lambda;
        cfg.lambda_min_ratio = ratio;
        cfg.gamma_ebic = gamma;
        cfg.criterion = parse_criterion(criterion);
        Selection sel;
        {
          py::gil_scoped_release release;
          sel = select_lambda(Dataset(x), cfg);
        }
        py::dict d = fit_dict(sel.fit);
        d["trace"] = trace_dict(sel.trace);
        return d;
      },
      py::arg("x"), py::arg("n_lambda") = 20, py::arg("ratio") = 0.01, py::arg("gamma") = 0.5,
      py::arg("criterion") = "nodewise_refit", "DROP over a lambda path with EBIC selection.");

  m.def(
      "run_baseline",
      [](const std::string& method, const Matrix& x, double gamma) {
        BaselineSelectionConfig cfg;
        cfg.gamma_ebic = gamma;
        const BaselineFit f = run_baseline(parse_baseline(method), Dataset(x), cfg);
        py::dict d;
        d["adjacency"] = adjacency_matrix(f.adjacency);
        d["precision"] = f.precision;
        d["lambda"] = f.lambda;
        d["converged"] = f.converged;
        d["repaired"] = f.repaired;
        return d;
      },
      py::arg("method"), py::arg("x"), py::arg("gamma") = 0.5,
      "Baseline estimator: glasso, mb, npn, kendall or spearman.");

  m.def(
      "generate_graph",
      [](const std::string& type, Index p, std::uint64_t seed) {
        RngStream rng(seed, kModelStream);
        const GroundTruthModel g = generate_graph(parse_graph_type(type), p, rng);
        py::dict d;
        d["precision"] = g.k_star.entries();
        d["covariance"] = g.sigma;
        d["adjacency"] = adjacency_matrix(g.a_star);
        return d;
      },
      py::arg("type"), py::arg("p"), py::arg("seed") = 1);

  m.def(
      "sample",
      [](const Matrix& sigma, Index n, std::uint64_t seed, const std::string& contamination, double rate) {
        GroundTruthModel g;
        g.sigma = sigma;
        g.sigma_chol = cholesky_lower(sigma);
        RngStream rng(seed, 1);
        Dataset d = sample_gaussian(g, n, rng);
        ContaminationSpec spec;
        spec.scheme = parse_contamination(contamination);
        spec.rate = rate;
        return contaminate(d, spec, rng, g.sigma_chol).data.values();
      },
      py::arg("covariance"), py::arg("n"), py::arg("seed") = 1, py::arg("contamination") = "clean",
      py::arg("rate") = 0.1, "Gaussian rows, optionally contaminated.");

  m.def(
      "edge_metrics",
      [](const Matrix& estimate, const Matrix& truth) {
        const EdgeMetrics e = edge_metrics(adjacency_from(estimate), adjacency_from(truth));
        py::dict d;
        d["tp"] = e.tp;
        d["fp"] = e.fp;
        d["fn"] = e.fn;
        d["tn"] = e.tn;
        d["precision"] = e.precision;
        d["recall"] = e.recall;
        d["f1"] = e.f1;
        d["mcc"] = e.mcc;
        return d;
      },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "modularity", [](const Matrix& a, const std::vector<int>& labels) {
        return modularity(adjacency_from(a), CommunityAssignment{labels});
      },
      py::arg("adjacency"), py::arg("labels"));
  m.def(
      "louvain",
      [](const Matrix& a, std::uint64_t seed) {
        RngStream rng(seed, 0);
        return louvain(adjacency_from(a), rng).labels;
      },
      py::arg("adjacency"), py::arg("seed") = 1);

  m.def(
      "run_benchmark",
      [](const std::string& config_json, const std::vector<std::string>& methods, int workers) {
        // Keys not given keep their defaults.
        nlohmann::json merged = config_to_json(ExperimentConfig{});
        merged.update(nlohmann::json::parse(config_json));
        const ExperimentConfig cfg = config_from_json(merged);
        BenchOptions opts;
        opts.workers = workers;
        BenchmarkReport rep;
        {
          py::gil_scoped_release release;
          rep = run_benchmark(cfg, builtin_methods(methods), opts);
        }
        return emit_report(rep, ReportFormat::json);
      },
      py::arg("config_json"), py::arg("methods"), py::arg("workers") = 1,
      "Runs a benchmark from a (partial) JSON configuration; returns the JSON report.");
}
