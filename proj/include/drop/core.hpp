#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when an input violates a documented precondition.
class DropError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x p observation matrix; rows are samples, columns are variables.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Matrix values, std::vector<std::string> column_names = {});

  const Matrix& values() const { return values_; }
  Index n() const { return values_.rows(); }
  Index p() const { return values_.cols(); }
  const std::vector<std::string>& column_names() const { return column_names_; }
  auto column(Index j) const { return values_.col(j); }

 private:
  Matrix values_;
  std::vector<std::string> column_names_;
};

/// Symmetric matrix with strictly positive diagonal. Positive definiteness is
/// not part of the contract: coordinate-descent iterates need not be PD.
class PrecisionMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  PrecisionMatrix() = default;
  explicit PrecisionMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  Index p() const { return entries_.rows(); }
  double operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

/// Binary symmetric adjacency with zero diagonal.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(Index p) : p_(p), bits_(static_cast<size_t>(p * p), 0) {}

  /// Edges where |m_ij| > threshold (upper triangle read, mirrored).
  static Adjacency from_threshold(const Matrix& m, double threshold);

  Index p() const { return p_; }
  bool operator()(Index i, Index j) const { return bits_[static_cast<size_t>(i * p_ + j)] != 0; }
  void set(Index i, Index j, bool on);
  Index edge_count() const;
  Index degree(Index i) const;
  std::vector<std::pair<Index, Index>> edges() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  Index p_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class GraphType { band, hub, cluster, random, scalefree };
enum class ContaminationScheme { clean, cauchy, leverage };

std::string to_string(GraphType g);
std::string to_string(ContaminationScheme c);
GraphType parse_graph_type(const std::string& s);
ContaminationScheme parse_contamination(const std::string& s);

struct ExperimentConfig {
  GraphType graph_type = GraphType::band;
  int p = 20;
  int n = 500;
  ContaminationScheme contamination = ContaminationScheme::clean;
  double contamination_rate = 0.1;
  int replicates = 20;
  std::uint64_t seed = 1;
  std::vector<double> lambda_grid;  // empty: per-method default path
  double tol = 1e-4;
  int max_sweeps = 100;
  double gamma_ebic = 0.5;
  double time_limit_s = 60.0;

  /// Throws DropError on an invalid combination.
  void validate() const;
};

void validate_lambda_grid(const std::vector<double>& grid);

Dataset center_columns(const Dataset& d);
Matrix center_columns(const Matrix& x);

/// S = X^T X / n for already-centered X.
Matrix empirical_covariance(const Matrix& x);
Matrix empirical_covariance(const Dataset& d);

bool is_symmetric(const Matrix& m, double tol = PrecisionMatrix::kSymmetryTol);

/// Cooperative time limit polled by the iterative solvers between passes.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;
  static Deadline after_seconds(double s);

  bool expired() const { return at_ && Clock::now() >= *at_; }
  bool active() const { return at_.has_value(); }

 private:
  std::optional<Clock::time_point> at_;
};

/// Worker count from DROP_WORKERS, else hardware concurrency (at least 1).
int default_worker_count();

}  // namespace drop
