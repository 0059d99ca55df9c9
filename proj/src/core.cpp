#include <drop/core.hpp>

#include <cmath>
#include <cstdlib>
#include <thread>

namespace drop {

Dataset::Dataset(Matrix values, std::vector<std::string> column_names)
    : values_(std::move(values)), column_names_(std::move(column_names)) {
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw DropError("dataset needs n >= 2 and p >= 2, got " + std::to_string(values_.rows()) + "x" +
                    std::to_string(values_.cols()));
  }
  if (!values_.allFinite()) throw DropError("dataset contains non-finite entries");
  if (!column_names_.empty() && static_cast<Index>(column_names_.size()) != values_.cols()) {
    throw DropError("column name count does not match column count");
  }
}

PrecisionMatrix::PrecisionMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw DropError("precision matrix must be square");
  if (!is_symmetric(entries_)) throw DropError("precision matrix is not symmetric");
  for (Index i = 0; i < entries_.rows(); ++i) {
    if (!(entries_(i, i) > 0.0)) throw DropError("precision matrix diagonal must be positive");
  }
}

Adjacency Adjacency::from_threshold(const Matrix& m, double threshold) {
  Adjacency a(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > threshold) a.set(i, j, true);
    }
  }
  return a;
}

void Adjacency::set(Index i, Index j, bool on) {
  if (i == j) throw DropError("adjacency diagonal must stay zero");
  bits_[static_cast<size_t>(i * p_ + j)] = on;
  bits_[static_cast<size_t>(j * p_ + i)] = on;
}

Index Adjacency::edge_count() const {
  Index c = 0;
  for (Index i = 0; i < p_; ++i)
    for (Index j = i + 1; j < p_; ++j) c += (*this)(i, j);
  return c;
}

Index Adjacency::degree(Index i) const {
  Index d = 0;
  for (Index j = 0; j < p_; ++j) d += (*this)(i, j);
  return d;
}

std::vector<std::pair<Index, Index>> Adjacency::edges() const {
  std::vector<std::pair<Index, Index>> out;
  for (Index i = 0; i < p_; ++i)
    for (Index j = i + 1; j < p_; ++j)
      if ((*this)(i, j)) out.emplace_back(i, j);
  return out;
}

std::string to_string(GraphType g) {
  switch (g) {
    case GraphType::band: return "band";
    case GraphType::hub: return "hub";
    case GraphType::cluster: return "cluster";
    case GraphType::random: return "random";
    case GraphType::scalefree: return "scalefree";
  }
  return "?";
}

std::string to_string(ContaminationScheme c) {
  switch (c) {
    case ContaminationScheme::clean: return "clean";
    case ContaminationScheme::cauchy: return "cauchy";
    case ContaminationScheme::leverage: return "leverage";
  }
  return "?";
}

GraphType parse_graph_type(const std::string& s) {
  if (s == "band") return GraphType::band;
  if (s == "hub") return GraphType::hub;
  if (s == "cluster") return GraphType::cluster;
  if (s == "random") return GraphType::random;
  if (s == "scalefree" || s == "scale-free") return GraphType::scalefree;
  throw DropError("unknown graph type '" + s + "'");
}

ContaminationScheme parse_contamination(const std::string& s) {
  if (s == "clean") return ContaminationScheme::clean;
  if (s == "cauchy") return ContaminationScheme::cauchy;
  if (s == "leverage") return ContaminationScheme::leverage;
  throw DropError("unknown contamination scheme '" + s + "'");
}

void validate_lambda_grid(const std::vector<double>& grid) {
  for (size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || !std::isfinite(grid[k])) throw DropError("lambda grid entries must be positive");
    if (k > 0 && !(grid[k] < grid[k - 1])) throw DropError("lambda grid must be strictly decreasing");
  }
}

void ExperimentConfig::validate() const {
  if (p < 4) throw DropError("p must be at least 4");
  if (n < 2) throw DropError("n must be at least 2");
  if (replicates < 1) throw DropError("replicates must be positive");
  if (!(contamination_rate >= 0.0 && contamination_rate <= 1.0)) {
    throw DropError("contamination rate must lie in [0, 1]");
  }
  validate_lambda_grid(lambda_grid);
  if (!(tol > 0.0)) throw DropError("tol must be positive");
  if (max_sweeps < 1) throw DropError("max_sweeps must be positive");
  if (!(gamma_ebic >= 0.0 && gamma_ebic <= 1.0)) throw DropError("gamma_ebic must lie in [0, 1]");
  if (!(time_limit_s > 0.0)) throw DropError("time limit must be positive");
}

Matrix center_columns(const Matrix& x) {
  Matrix out = x;
  for (Index j = 0; j < out.cols(); ++j) {
    // Two passes: the second removes the rounding residue of the first.
    for (int pass = 0; pass < 2; ++pass) out.col(j).array() -= out.col(j).mean();
  }
  return out;
}

Dataset center_columns(const Dataset& d) { return Dataset(center_columns(d.values()), d.column_names()); }

Matrix empirical_covariance(const Matrix& x) {
  Matrix s = (x.transpose() * x) / static_cast<double>(x.rows());
  return (s + s.transpose()) * 0.5;
}

Matrix empirical_covariance(const Dataset& d) { return empirical_covariance(d.values()); }

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

Deadline Deadline::after_seconds(double s) {
  Deadline d;
  d.at_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(s));
  return d;
}

int default_worker_count() {
  if (const char* env = std::getenv("DROP_WORKERS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace drop
