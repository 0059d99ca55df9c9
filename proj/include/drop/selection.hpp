#pragma once

#include <drop/core.hpp>
#include <drop/estimator.hpp>

#include <string>
#include <vector>

namespace drop {

struct SelectionTrace {
  std::vector<double> lambdas;
  std::vector<double> ebic_scores;   // +inf for fits excluded from selection
  std::vector<Index> edge_counts;
  std::vector<bool> converged;
  Index chosen_index = -1;
};

/// n log(sum_i MSE_i) + |E| log n + 4 gamma |E| log p, with MSE evaluated at
/// fit.k on `d` (the data the fit was computed on). Throws on zero total MSE.
double ebic_score(const FitResult& fit, const Dataset& d, double gamma_ebic);
double ebic_from_parts(double total_mse, Index edges, Index n, Index p, double gamma_ebic);

/// Index of the minimum score; ties go to the larger lambda. -1 when every
/// score is infinite.
Index argmin_ebic(const std::vector<double>& lambdas, const std::vector<double>& scores);

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> log_spaced_grid(double lambda_max, double ratio, int count);

/// How a path point is scored.
///  - summed: ebic_score above, MSE at the penalized fit.
///  - nodewise_refit: sum over nodes of n log(MSE_i) with MSE_i the least-squares
///    residual of node i on its selected neighbours, plus 2|E| log n +
///    4 gamma |E| log p (each edge enters two regressions).
enum class SelectionCriterion { nodewise_refit, summed };

std::string to_string(SelectionCriterion c);
SelectionCriterion parse_criterion(const std::string& s);

/// Residual mean squares of each column of x regressed (no intercept) on its
/// neighbours in `a`; `gram` is x^T x.
Vector refit_mse(const Matrix& gram, Index n, const Adjacency& a);

double nodewise_refit_score(const Vector& refit, Index edges, Index n, double gamma_ebic);

/// Score of one path fit on the data it was computed on; +inf when the
/// criterion is undefined (zero MSE).
double criterion_score(const FitResult& fit, const Dataset& x_tilde, SelectionCriterion c, double gamma_ebic);

struct SelectionConfig {
  DropConfig fit;               // lambda field ignored
  std::vector<double> grid;     // empty: default path
  int n_lambda = 20;
  double lambda_min_ratio = 0.01;
  double gamma_ebic = 0.5;
  SelectionCriterion criterion = SelectionCriterion::nodewise_refit;
  bool warm_start = true;
  int workers = 1;              // used only without warm starts
};

struct Selection {
  FitResult fit;
  SelectionTrace trace;
  std::vector<FitResult> path;  // every grid fit, grid order
};

/// Raised when no grid point converged.
class SelectionError : public DropError {
 public:
  SelectionError(const std::string& what, SelectionTrace trace) : DropError(what), trace(std::move(trace)) {}
  SelectionTrace trace;
};

/// DROP over a grid of lambdas on raw data, criterion minimised among converged fits.
Selection select_lambda(const Dataset& raw, const SelectionConfig& cfg);

/// Same on already transformed data with a given initial precision.
Selection select_lambda_transformed(const Dataset& x_tilde, const Matrix& k0, const SelectionConfig& cfg);

/// Default DROP grid for transformed data and its initialization.
std::vector<double> default_drop_grid(const Dataset& x_tilde, const Matrix& k0, int count, double ratio);

}  // namespace drop
