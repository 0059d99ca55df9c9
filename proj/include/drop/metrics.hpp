#pragma once

#include <drop/core.hpp>
#include <drop/rng.hpp>

#include <vector>

namespace drop {

struct EdgeMetrics {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
};

/// Rates from confusion counts. Zero denominators give 0 (MCC: any zero
/// marginal gives 0).
EdgeMetrics edge_metrics_from_counts(long long tp, long long fp, long long fn, long long tn);

/// Confusion over unordered pairs i < j.
EdgeMetrics edge_metrics(const Adjacency& a_hat, const Adjacency& a_star);

struct CommunityAssignment {
  std::vector<int> labels;

  int community_count() const;
};

/// (1 / 2|E|) sum_ij (A_ij - d_i d_j / 2|E|) 1{g_i = g_j} over ordered pairs.
/// Throws DropError on an empty graph.
double modularity(const Adjacency& a, const CommunityAssignment& c);

struct LouvainOptions {
  /// Visit nodes in an rng-drawn order instead of index order.
  bool shuffle = false;
  int max_levels = 32;
};

struct LouvainResult {
  CommunityAssignment assignment;
  std::vector<double> level_modularity;  // after each aggregation level
};

/// Two-phase local-move / aggregate iteration at resolution 1. Labels are
/// renumbered 0.. in order of first appearance by node index.
LouvainResult louvain_detailed(const Adjacency& a, RngStream& rng, const LouvainOptions& opts = {});
CommunityAssignment louvain(const Adjacency& a, RngStream& rng, const LouvainOptions& opts = {});

struct GroupDegreeSummary {
  int group = 0;
  Index size = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double prob);

/// Degree statistics per label value, in increasing label order.
std::vector<GroupDegreeSummary> degree_by_group(const Adjacency& a, const std::vector<int>& groups);

}  // namespace drop
