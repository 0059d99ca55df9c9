#pragma once

#include <drop/core.hpp>
#include <drop/selection.hpp>

#include <string>
#include <vector>

namespace drop {

enum class BaselineMethod { glasso, mb, npn_glasso, kendall_glasso, spearman_glasso };

std::string to_string(BaselineMethod m);
BaselineMethod parse_baseline(const std::string& s);

struct GlassoOptions {
  double outer_tol = 1e-4;  // mean |change| of the covariance estimate, relative to mean |S_offdiag|
  double inner_tol = 1e-6;
  int max_outer = 100;
  int max_inner = 1000;
  Deadline deadline;
};

struct GlassoResult {
  Matrix precision;
  Matrix covariance;
  int iterations = 0;
  bool converged = false;
  bool timed_out = false;
  bool positive_definite = true;  // covariance iterate passed a Cholesky check every pass
};

/// Block coordinate descent for -log det K + tr(S K) + lambda ||K||_1 (diagonal
/// penalized). `warm` optionally supplies a previous solution on the same S.
GlassoResult fit_glasso(const Matrix& s, double lambda, const GlassoOptions& opts = {},
                        const GlassoResult* warm = nullptr);

/// Lasso on a covariance form: 1/2 b^T A b - c^T b + lambda ||b||_1 over the
/// coordinates != `skip`. `beta` holds the warm start and receives the result
/// (its `skip` entry is left at 0).
int covariance_lasso(const Matrix& a, const Vector& c, double lambda, Index skip, Vector& beta, double tol,
                     int max_iter);

struct MbResult {
  Adjacency adjacency;
  Matrix coefficients;  // column i: beta^(i), zero at i
};

/// p lasso regressions of X_i on X_{-i} with (1/2n)||.||^2 loss; edges by the AND rule.
MbResult fit_mb(const Dataset& d_centered, double lambda);

struct BaselineFit {
  Adjacency adjacency;
  Matrix precision;  // empty for MB
  double lambda = 0.0;
  bool converged = false;
  bool timed_out = false;
  bool repaired = false;  // indefinite rank-correlation input was eigenvalue-floored
  SelectionTrace trace;
};

/// Glasso on a rank-based input: npn covariance, or the Kendall/Spearman
/// latent correlation eigenvalue-floored at 1e-4 when indefinite.
struct RankInput {
  Matrix s;
  bool repaired = false;
};
RankInput rank_glasso_input(const Dataset& d, BaselineMethod kind);

GlassoResult fit_rank_glasso(const Dataset& d, BaselineMethod kind, double lambda, bool* repaired = nullptr);

/// -n (log det K - tr(S K)) + |E| log n + 4 gamma |E| log p.
double glasso_ebic(const Matrix& s, const Matrix& k, Index edges, Index n, double gamma_ebic);

struct BaselineSelectionConfig {
  std::vector<double> grid;  // empty: log-spaced from the input's lambda_max
  int n_lambda = 20;
  double lambda_min_ratio = 0.1;
  double gamma_ebic = 0.5;
  double edge_threshold = 1e-6;
  Deadline deadline;
};

/// Glasso path on `s` with likelihood EBIC selection among converged fits.
BaselineFit select_glasso(const Matrix& s, Index n, const BaselineSelectionConfig& cfg);

/// MB with per-node selection: for node i the lambda minimising
/// n log(MSE_i) + k log n + 2 gamma k log(p - 1), k the support size.
BaselineFit select_mb(const Dataset& raw, const BaselineSelectionConfig& cfg);

/// Any baseline, end to end on raw data.
BaselineFit run_baseline(BaselineMethod m, const Dataset& raw, const BaselineSelectionConfig& cfg);

}  // namespace drop
