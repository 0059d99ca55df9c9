#pragma once

#include <drop/core.hpp>

#include <vector>

namespace drop {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF. Accurate to 1e-9 absolute on
/// [1e-10, 1 - 1e-10]; throws std::domain_error outside (0, 1).
double normal_quantile(double u);

/// Average (midrank) ranks, 1-based.
std::vector<double> midranks(const Eigen::Ref<const Vector>& x);

/// Rank-based inverse normal scores Phi^{-1}((rank - 0.5) / n) per column,
/// then column-centered. Throws DropError naming the first constant column.
Dataset npn_transform(const Dataset& d);

enum class RankKind { kendall, spearman };

struct RankCorrelationMatrix {
  Matrix entries;
  RankKind kind = RankKind::kendall;
  /// Columns with a single distinct value; their off-diagonal entries are 0.
  std::vector<Index> constant_columns;

  bool warning() const { return !constant_columns.empty(); }
};

/// Kendall tau-b between two columns. Uses O(n^2) pair counting up to
/// `kKendallDirectLimit` samples and Knight's merge-sort count above it.
double kendall_tau(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
double kendall_tau_direct(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
double kendall_tau_merge(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
inline constexpr Index kKendallDirectLimit = 2000;

/// Spearman rho: Pearson correlation of midranks.
double spearman_rho(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

/// sin(pi * tau / 2) latent-correlation estimate.
RankCorrelationMatrix kendall_skeptic(const Dataset& d);
/// 2 sin(pi * rho / 6) latent-correlation estimate.
RankCorrelationMatrix spearman_skeptic(const Dataset& d);

}  // namespace drop
