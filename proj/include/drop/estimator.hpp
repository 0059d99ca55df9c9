#pragma once

#include <drop/core.hpp>

#include <optional>
#include <string>
#include <vector>

namespace drop {

// ---------------------------------------------------------------------------
// Robust initialization

struct ShrinkageEstimate {
  Matrix sigma;        // (1 - alpha) S + alpha mu I
  double alpha = 0.0;  // clipped to [kMinShrinkage, 1]
  double mu = 0.0;     // trace(S) / p
};

inline constexpr double kMinShrinkage = 0.01;

/// Linear shrinkage toward a scaled identity with the Ledoit-Wolf intensity.
/// `x` must be column-centered.
ShrinkageEstimate linear_shrinkage(const Matrix& x);

/// K0 = inverse of the shrinkage covariance of the transformed data.
PrecisionMatrix robust_init(const Dataset& d_tilde);

// ---------------------------------------------------------------------------
// Node-wise regression quantities. beta^(i)_j(K) = -K_ij / K_ii.

/// (1/n) || X_i - X_{-i} beta^(i)(K) ||^2. Throws DropError if K_ii <= 0.
double node_mse(const Matrix& k, const Dataset& d, Index i);
Vector node_mse_all(const Matrix& k, const Dataset& d);

/// w_ij = sqrt(MSE_i)/K_ii + sqrt(MSE_j)/K_jj; zero diagonal.
Matrix adaptive_weights(const Matrix& k, const Dataset& d);
/// Same, from precomputed MSEs.
Matrix adaptive_weights(const Matrix& k, const Vector& mse);

struct DropState {
  Matrix k;
  Matrix weights;
  Vector mse;
  int sweep = 0;
  double last_delta = 0.0;
};

/// State at K with weights and MSE evaluated there.
DropState make_state(const Matrix& k, const Dataset& d);

struct CoordinateTerms {
  double s0 = 0.0;  // gradient part independent of K_ij
  double s1 = 0.0;  // curvature
};

/// S0 and S1 for pair (i, j), i != j, evaluated directly from the data columns.
CoordinateTerms coordinate_terms(const Matrix& k, const Dataset& d, Index i, Index j);

/// Soft-threshold minimizer of (s1/2) t^2 + s0 t + threshold |t|.
double soft_threshold_update(const CoordinateTerms& terms, double threshold);

/// New K_ij for pair (i, j), i < j, with the state's weights frozen.
double coordinate_update(const DropState& state, const Dataset& d, Index i, Index j, double lambda);

/// sum_i MSE_i(K) + lambda sum_{i<j} w_ij(K) |K_ij| with weights evaluated at K.
double drop_objective(const Matrix& k, const Dataset& d, double lambda);
/// Same objective with a frozen weight matrix (descent-audit mode).
double drop_objective(const Matrix& k, const Dataset& d, double lambda, const Matrix& frozen_weights);

// ---------------------------------------------------------------------------
// Full fit

struct DropConfig {
  double lambda = 0.1;
  double tol = 1e-4;
  int max_sweeps = 100;
  double edge_threshold = 1e-6;
  /// Off by default: K_ii <- 1 / MSE_i after each sweep.
  bool refresh_diagonal = false;
  /// Evaluate the frozen-weight objective around every coordinate update.
  bool audit_descent = false;
  Deadline deadline;

  void validate() const;
};

struct DescentAudit {
  long long updates = 0;
  long long increases = 0;     // updates where the objective rose by more than 1e-10
  double max_increase = 0.0;   // largest observed rise (may be rounding-level)
};

struct FitResult {
  Matrix k;
  Adjacency adjacency;
  double lambda = 0.0;
  int sweeps = 0;
  double last_delta = 0.0;
  double wall_time_s = 0.0;
  bool converged = false;
  bool timed_out = false;
  Vector mse;  // node MSEs at k on the data the fit was computed on
  std::vector<std::string> warnings;
  std::optional<DescentAudit> audit;

  Index edge_count() const { return adjacency.edge_count(); }
};

/// Full pipeline on raw data: NPN transform, robust initialization, then
/// alternating weight refresh and coordinate sweeps.
FitResult fit_drop(const Dataset& raw, const DropConfig& cfg);

/// Sweeps on already transformed data starting from `k_start`. The diagonal
/// of `k_start` is held fixed unless `cfg.refresh_diagonal` is set.
FitResult fit_drop_transformed(const Dataset& x_tilde, const DropConfig& cfg, const Matrix& k_start);

/// max_{i<j} |S0| / (n w_ij) at `k0`: the smallest lambda that thresholds
/// every pair on the first sweep given the initial weights.
double drop_lambda_max(const Dataset& x_tilde, const Matrix& k0);

/// Raises eigenvalues below `floor` to `floor`. Support recovery never uses this.
Matrix eigenvalue_floor(const Matrix& k, double floor = 1e-4);

/// Partial correlations -K_ij / sqrt(K_ii K_jj), unit diagonal.
Matrix partial_correlations(const Matrix& k);

// ---------------------------------------------------------------------------
// Single-task estimator: (1/n)||y - X b||^2 + (lambda/sqrt(n)) ||y - X b|| ||b||_1

double single_task_objective(const Vector& y, const Matrix& x, const Vector& beta, double lambda);

struct SingleTaskOptions {
  std::optional<Vector> warm_start;
  double tol = 1e-6;
  int max_outer = 500;
  int max_inner = 1000;
};

Vector fit_single_task_drop(const Vector& y, const Matrix& x, double lambda, const SingleTaskOptions& opts = {});

// ---------------------------------------------------------------------------
// Worst-case risk probe with l_inf transport cost

enum class PerturbationMode {
  per_node,  // each node-wise loss gets its own perturbation of the sample
  shared,    // one perturbation per sample shared by every node
};

struct DualityProbe {
  double lhs_lower = 0.0;  // best adversarial value found (feasible, so a lower bound)
  double rhs = 0.0;        // (1/p) sum_i (sqrt(MSE_i) + sqrt(delta) (1 + ||beta^(i)||_1))^2
  double empirical = 0.0;  // delta = 0 value

  double relative_gap() const { return rhs > 0.0 ? (rhs - lhs_lower) / rhs : 0.0; }
};

DualityProbe duality_probe(const Dataset& d, const Matrix& k, double delta, int budget_iters,
                           PerturbationMode mode = PerturbationMode::per_node);

}  // namespace drop
