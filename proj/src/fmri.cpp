#include <drop/fmri.hpp>

#include <drop/baselines.hpp>
#include <drop/bench.hpp>
#include <drop/csv.hpp>
#include <drop/estimator.hpp>
#include <drop/simgen.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace drop {

using nlohmann::json;

RoiLabels read_roi_labels(std::istream& in) {
  RoiLabels out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw DropError("labels CSV line " + std::to_string(line_no) + ": expected 2 fields (roi,system)");
    if (out.roi.empty() && f[0] == "roi" && f[1] == "system") continue;
    out.roi.push_back(f[0]);
    out.system.push_back(f[1]);
  }
  if (out.roi.empty()) throw DropError("labels CSV contains no ROIs");
  return out;
}

RoiLabels read_roi_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DropError("cannot open labels file '" + path + "'");
  return read_roi_labels(in);
}

std::vector<int> match_systems(const Dataset& series, const RoiLabels& labels, std::vector<std::string>& system_names) {
  system_names.clear();
  std::map<std::string, int> system_id;
  for (const auto& s : labels.system)
    if (system_id.emplace(s, static_cast<int>(system_id.size())).second) system_names.push_back(s);
  const auto& names = series.column_names();
  std::vector<int> out(static_cast<size_t>(series.p()));
  if (names.empty()) {
    if (static_cast<Index>(labels.roi.size()) != series.p())
      throw DropError("series has " + std::to_string(series.p()) + " unnamed columns but labels list " +
                      std::to_string(labels.roi.size()) + " ROIs");
    for (size_t j = 0; j < out.size(); ++j) out[j] = system_id.at(labels.system[j]);
    return out;
  }
  std::map<std::string, int> roi_system;
  for (size_t k = 0; k < labels.roi.size(); ++k) roi_system[labels.roi[k]] = system_id.at(labels.system[k]);
  for (size_t j = 0; j < out.size(); ++j) {
    const auto it = roi_system.find(names[j]);
    if (it == roi_system.end()) throw DropError("ROI '" + names[j] + "' has no entry in the labels file");
    out[j] = it->second;
  }
  return out;
}

Dataset standardize_columns(const Dataset& d) {
  Matrix x = center_columns(d.values());
  for (Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(x.rows()));
    if (!(sd > 0.0)) {
      const std::string name = d.column_names().empty() ? "column " + std::to_string(j) : d.column_names()[static_cast<size_t>(j)];
      throw DropError("cannot standardize constant series " + name);
    }
    x.col(j) /= sd;
  }
  return Dataset(std::move(x), d.column_names());
}

namespace {

struct MethodFit {
  Adjacency support;
  Matrix precision;  // empty for MB
  double lambda = 0.0;
  bool ok = false;
};

MethodFit fit_method(const std::string& method, const Dataset& data, const FmriOptions& opts) {
  MethodFit out;
  const Deadline deadline = Deadline::after_seconds(opts.time_limit_s);
  if (method == "drop") {
    SelectionConfig sc;
    sc.fit.deadline = deadline;
    sc.gamma_ebic = opts.gamma_ebic;
    sc.criterion = opts.criterion;
    const Selection sel = select_lambda(data, sc);
    out.support = sel.fit.adjacency;
    out.precision = sel.fit.k;
    out.lambda = sel.fit.lambda;
    out.ok = sel.fit.converged && !sel.fit.timed_out;
    return out;
  }
  BaselineSelectionConfig bc;
  bc.gamma_ebic = opts.gamma_ebic;
  bc.deadline = deadline;
  const BaselineMethod m = parse_baseline(method);
  const BaselineFit f = run_baseline(m, data, bc);
  out.support = f.adjacency;
  out.precision = f.precision;
  out.lambda = f.lambda;
  out.ok = f.converged && !f.timed_out && (m == BaselineMethod::mb || f.trace.chosen_index >= 0);
  return out;
}

Dataset contaminated_copy(const Dataset& x, ContaminationScheme scheme, const FmriOptions& opts) {
  if (scheme == ContaminationScheme::clean) return x;
  ContaminationSpec spec;
  spec.scheme = scheme;
  spec.rate = opts.contamination_rate;
  RngStream rng(opts.seed, static_cast<std::uint64_t>(scheme));
  Matrix chol;
  if (scheme == ContaminationScheme::leverage)
    chol = cholesky_lower(eigenvalue_floor(empirical_covariance(center_columns(x.values())), 1e-8));
  Dataset out = contaminate(x, spec, rng, chol).data;
  return Dataset(out.values(), x.column_names());
}

}  // namespace

FmriReport fmri_analyze(const Dataset& series, const RoiLabels& labels, const FmriOptions& opts) {
  FmriReport rep;
  rep.options = opts;
  rep.systems = match_systems(series, labels, rep.system_names);
  for (const auto& m : opts.methods)
    if (m != "drop") parse_baseline(m);
  const Dataset x = opts.standardize ? standardize_columns(series) : series;
  for (const auto scheme : opts.schemes) {
    const Dataset data = contaminated_copy(x, scheme, opts);
    for (const auto& method : opts.methods) {
      FmriResult r;
      r.method = method;
      r.scheme = scheme;
      try {
        const MethodFit f = fit_method(method, data, opts);
        r.ok = f.ok;
        r.lambda = f.lambda;
        r.support_edges = f.support.edge_count();
        Adjacency shown = f.support;
        if (f.precision.size() > 0) {
          const Matrix pc = partial_correlations(f.precision);
          for (const auto& [i, j] : f.support.edges())
            if (!(std::abs(pc(i, j)) > opts.display_threshold)) shown.set(i, j, false);
        }
        r.edges = shown.edge_count();
        if (r.edges > 0) {
          RngStream rng(opts.seed, 99);
          const auto comm = louvain(shown, rng);
          r.modularity = modularity(shown, comm);
          r.communities = comm.community_count();
          r.community_labels = comm.labels;
        }
        r.degree_by_system = degree_by_group(shown, rep.systems);
        r.adjacency = std::move(shown);
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
      rep.results.push_back(std::move(r));
    }
  }
  return rep;
}

std::string fmri_report_json(const FmriReport& r) {
  json j;
  j["schema"] = "drop-fmri-report";
  j["schema_version"] = kReportSchemaVersion;
  std::vector<std::string> schemes;
  for (auto s : r.options.schemes) schemes.push_back(to_string(s));
  j["config"] = {{"methods", r.options.methods},
                 {"schemes", schemes},
                 {"contamination_rate", r.options.contamination_rate},
                 {"display_threshold", r.options.display_threshold},
                 {"standardize", r.options.standardize},
                 {"seed", r.options.seed},
                 {"time_limit_s", r.options.time_limit_s},
                 {"gamma_ebic", r.options.gamma_ebic},
                 {"criterion", to_string(r.options.criterion)}};
  j["systems"] = r.system_names;
  j["roi_system"] = r.systems;
  json res = json::array();
  for (const auto& x : r.results) {
    json e{{"method", x.method},
           {"contamination", to_string(x.scheme)},
           {"ok", x.ok},
           {"lambda", x.lambda},
           {"support_edges", x.support_edges},
           {"edges", x.edges},
           {"modularity", x.modularity ? json(*x.modularity) : json(nullptr)},
           {"communities", x.communities},
           {"community_labels", x.community_labels}};
    if (!x.error.empty()) e["error"] = x.error;
    json deg = json::array();
    for (const auto& g : x.degree_by_system)
      deg.push_back({{"system", r.system_names[static_cast<size_t>(g.group)]},
                     {"size", g.size},
                     {"mean", g.mean},
                     {"q1", g.q1},
                     {"median", g.median},
                     {"q3", g.q3}});
    e["degree_by_system"] = std::move(deg);
    res.push_back(std::move(e));
  }
  j["results"] = std::move(res);
  return j.dump(2) + "\n";
}

std::string fmri_report_csv(const FmriReport& r) {
  std::ostringstream out;
  out << "contamination,method,edges,modularity,system,size,mean_degree,q1,median,q3\n";
  for (const auto& x : r.results) {
    for (const auto& g : x.degree_by_system) {
      out << to_string(x.scheme) << ',' << x.method << ',' << x.edges << ','
          << (x.modularity ? format_double(*x.modularity) : "") << ',' << r.system_names[static_cast<size_t>(g.group)]
          << ',' << g.size << ',' << format_double(g.mean) << ',' << format_double(g.q1) << ','
          << format_double(g.median) << ',' << format_double(g.q3) << '\n';
    }
  }
  return out.str();
}

}  // namespace drop
