#pragma once

#include <drop/core.hpp>
#include <drop/metrics.hpp>
#include <drop/selection.hpp>

#include <optional>
#include <string>
#include <vector>

namespace drop {

/// ROI -> functional system map, in file order.
struct RoiLabels {
  std::vector<std::string> roi;
  std::vector<std::string> system;
};

/// Two columns (roi, system) with an optional header line "roi,system".
RoiLabels read_roi_labels(std::istream& in);
RoiLabels read_roi_labels(const std::string& path);

/// System index (0.. in order of first appearance in `labels`) for each series
/// column, matched by column name. Without column names the label file must
/// list exactly p ROIs in column order. Throws naming the first unlabelled ROI.
std::vector<int> match_systems(const Dataset& series, const RoiLabels& labels, std::vector<std::string>& system_names);

struct FmriOptions {
  std::vector<std::string> methods{"drop", "glasso", "npn", "spearman"};
  std::vector<ContaminationScheme> schemes{ContaminationScheme::clean, ContaminationScheme::cauchy,
                                           ContaminationScheme::leverage};
  double contamination_rate = 0.1;
  double display_threshold = 0.005;  // on |partial correlation|
  bool standardize = true;
  std::uint64_t seed = 1;
  double time_limit_s = 60.0;
  double gamma_ebic = 0.5;
  SelectionCriterion criterion = SelectionCriterion::nodewise_refit;
};

struct FmriResult {
  std::string method;
  ContaminationScheme scheme = ContaminationScheme::clean;
  bool ok = false;
  std::string error;
  double lambda = 0.0;
  Index support_edges = 0;              // estimated support
  Index edges = 0;                      // after the display threshold
  std::optional<double> modularity;     // absent for an empty displayed graph
  int communities = 0;
  std::vector<int> community_labels;
  std::vector<GroupDegreeSummary> degree_by_system;
  Adjacency adjacency;                  // displayed graph
};

struct FmriReport {
  FmriOptions options;
  std::vector<std::string> system_names;
  std::vector<int> systems;  // per ROI
  std::vector<FmriResult> results;  // scheme-major, method order within
};

/// Columns scaled to zero mean and unit (1/n) variance.
Dataset standardize_columns(const Dataset& d);

/// Fits every method on a clean copy and on each contaminated copy of the
/// series (rows treated as i.i.d.), then thresholds, clusters and summarizes.
FmriReport fmri_analyze(const Dataset& series, const RoiLabels& labels, const FmriOptions& opts);

std::string fmri_report_json(const FmriReport& r);
/// One row per (scheme, method, system) with edge count, modularity and degree quartiles.
std::string fmri_report_csv(const FmriReport& r);

}  // namespace drop
