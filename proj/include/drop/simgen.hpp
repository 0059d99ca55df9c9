#pragma once

#include <drop/core.hpp>
#include <drop/rng.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace drop {

/// Constants used to turn an adjacency into a precision matrix and to lay out
/// hub/cluster/random graphs. Serialized with every simulated dataset.
struct GeneratorConstants {
  double v = 0.3;                  // off-diagonal magnitude
  double u = 0.1;                  // extra diagonal shift
  double random_edge_prob = 0.1;
  double cluster_within_prob = 0.3;
  bool unit_variance = true;       // rescale so that diag(Sigma) = 1

  static Index group_count(Index p);  // max(1, round(p / 10))
};

struct GroundTruthModel {
  PrecisionMatrix k_star;
  Adjacency a_star;
  Matrix sigma;
  Matrix sigma_chol;  // lower Cholesky factor of sigma
  GraphType graph_type = GraphType::band;
  GeneratorConstants constants;
};

/// Adjacency for the given structure (no precision construction).
Adjacency generate_adjacency(GraphType type, Index p, RngStream& rng, const GeneratorConstants& c = {});

/// K* = v A + (|lambda_min(v A)| + 0.1 + u) I, optionally rescaled to unit
/// marginal variances. Throws DropError if the result is not positive definite.
GroundTruthModel model_from_adjacency(const Adjacency& a, GraphType type, const GeneratorConstants& c = {});

GroundTruthModel generate_graph(GraphType type, Index p, RngStream& rng, const GeneratorConstants& c = {});

/// n rows i.i.d. N(0, Sigma).
Dataset sample_gaussian(const GroundTruthModel& model, Index n, RngStream& rng);

struct ContaminationSpec {
  ContaminationScheme scheme = ContaminationScheme::clean;
  double rate = 0.1;
  double cauchy_scale = 5.0;
  double leverage_factor = 100.0;

  void validate() const;
  /// round(rate * n)
  Index contaminated_count(Index n) const;
};

struct Contaminated {
  Dataset data;
  std::vector<std::size_t> rows;  // sorted, distinct
};

/// Replaces round(rate * n) uniformly chosen rows: Cauchy adds i.i.d.
/// scale * tan(pi (u - 1/2)) per coordinate; leverage redraws the row from
/// N(0, factor * Sigma). `sigma_chol` is the lower Cholesky factor of Sigma
/// and is only needed for the leverage scheme.
Contaminated contaminate(const Dataset& d, const ContaminationSpec& spec, RngStream& rng, const Matrix& sigma_chol);

/// Cauchy perturbation for a given uniform draw.
inline double cauchy_from_uniform(double u, double scale) { return scale * std::tan(std::numbers::pi * (u - 0.5)); }

/// Lower Cholesky factor; throws DropError when `m` is not positive definite.
Matrix cholesky_lower(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

}  // namespace drop

