#include <drop/simgen.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace drop {

Index GeneratorConstants::group_count(Index p) {
  return std::max<Index>(1, static_cast<Index>(std::llround(static_cast<double>(p) / 10.0)));
}

namespace {

// Group sizes: the first g - (p mod g) groups get floor(p/g) nodes, the rest one more.
std::vector<Index> group_starts(Index p, Index g) {
  const Index small = p / g;
  const Index n_large = p % g;
  std::vector<Index> starts{0};
  for (Index k = 0; k < g; ++k) starts.push_back(starts.back() + small + (k >= g - n_large ? 1 : 0));
  return starts;
}

}  // namespace

Adjacency generate_adjacency(GraphType type, Index p, RngStream& rng, const GeneratorConstants& c) {
  if (p < 4) throw DropError("graph generation requires p >= 4");
  Adjacency a(p);
  switch (type) {
    case GraphType::band:
      for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p && j <= i + 2; ++j) a.set(i, j, true);
      break;
    case GraphType::hub: {
      const auto starts = group_starts(p, GeneratorConstants::group_count(p));
      for (size_t k = 0; k + 1 < starts.size(); ++k)
        for (Index j = starts[k] + 1; j < starts[k + 1]; ++j) a.set(starts[k], j, true);
      break;
    }
    case GraphType::cluster: {
      const auto starts = group_starts(p, GeneratorConstants::group_count(p));
      for (size_t k = 0; k + 1 < starts.size(); ++k)
        for (Index i = starts[k]; i < starts[k + 1]; ++i)
          for (Index j = i + 1; j < starts[k + 1]; ++j)
            if (rng.bernoulli(c.cluster_within_prob)) a.set(i, j, true);
      break;
    }
    case GraphType::random:
      for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p; ++j)
          if (rng.bernoulli(c.random_edge_prob)) a.set(i, j, true);
      break;
    case GraphType::scalefree: {
      // Preferential attachment, one edge per arriving node.
      std::vector<Index> degree(static_cast<size_t>(p), 0);
      a.set(0, 1, true);
      degree[0] = degree[1] = 1;
      Index total = 2;
      for (Index node = 2; node < p; ++node) {
        std::uint64_t pick = rng.below(static_cast<std::uint64_t>(total));
        Index target = 0;
        for (; target < node; ++target) {
          const auto dg = static_cast<std::uint64_t>(degree[static_cast<size_t>(target)]);
          if (pick < dg) break;
          pick -= dg;
        }
        a.set(node, target, true);
        ++degree[static_cast<size_t>(node)];
        ++degree[static_cast<size_t>(target)];
        total += 2;
      }
      break;
    }
  }
  return a;
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix cholesky_lower(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw DropError("matrix is not positive definite");
  return llt.matrixL();
}

GroundTruthModel model_from_adjacency(const Adjacency& a, GraphType type, const GeneratorConstants& c) {
  const Index p = a.p();
  Matrix k = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (a(i, j)) k(i, j) = c.v;
  const double shift = std::abs(min_eigenvalue(k)) + 0.1 + c.u;
  k.diagonal().array() += shift;

  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) throw DropError("generated precision matrix is not positive definite");
  Matrix sigma = llt.solve(Matrix::Identity(p, p));
  sigma = (sigma + sigma.transpose()).eval() * 0.5;

  if (c.unit_variance) {
    const Vector sd = sigma.diagonal().array().sqrt();
    const Vector inv_sd = sd.cwiseInverse();
    sigma = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
    k = sd.asDiagonal() * k * sd.asDiagonal();
    sigma.diagonal().setOnes();
  }
  k = (k + k.transpose()).eval() * 0.5;

  GroundTruthModel model;
  model.sigma_chol = cholesky_lower(sigma);
  model.k_star = PrecisionMatrix(std::move(k));
  model.a_star = a;
  model.sigma = std::move(sigma);
  model.graph_type = type;
  model.constants = c;
  return model;
}

GroundTruthModel generate_graph(GraphType type, Index p, RngStream& rng, const GeneratorConstants& c) {
  return model_from_adjacency(generate_adjacency(type, p, rng, c), type, c);
}

Dataset sample_gaussian(const GroundTruthModel& model, Index n, RngStream& rng) {
  const Index p = model.sigma.rows();
  Matrix z(n, p);
  for (Index r = 0; r < n; ++r)
    for (Index j = 0; j < p; ++j) z(r, j) = rng.normal();
  // Row x = L z, stacked: X = Z L^T.
  return Dataset(z * model.sigma_chol.transpose());
}

void ContaminationSpec::validate() const {
  if (!(rate >= 0.0 && rate <= 0.5)) throw DropError("contamination rate must lie in [0, 0.5]");
  if (!(cauchy_scale > 0.0) || !(leverage_factor > 0.0)) throw DropError("contamination scales must be positive");
}

Index ContaminationSpec::contaminated_count(Index n) const {
  return static_cast<Index>(std::llround(rate * static_cast<double>(n)));
}

Contaminated contaminate(const Dataset& d, const ContaminationSpec& spec, RngStream& rng, const Matrix& sigma_chol) {
  spec.validate();
  if (spec.scheme == ContaminationScheme::clean) return {d, {}};
  const Index count = spec.contaminated_count(d.n());
  if (count > d.n()) throw DropError("contaminated row count exceeds sample size");
  Matrix x = d.values();
  auto rows = rng.sample_without_replacement(static_cast<size_t>(d.n()), static_cast<size_t>(count));
  const Index p = d.p();
  if (spec.scheme == ContaminationScheme::cauchy) {
    for (auto r : rows)
      for (Index j = 0; j < p; ++j) x(static_cast<Index>(r), j) += cauchy_from_uniform(rng.uniform(), spec.cauchy_scale);
  } else {
    if (sigma_chol.rows() != p) throw DropError("leverage contamination needs the Cholesky factor of Sigma");
    const double scale = std::sqrt(spec.leverage_factor);
    Vector z(p);
    for (auto r : rows) {
      for (Index j = 0; j < p; ++j) z[j] = rng.normal();
      x.row(static_cast<Index>(r)) = (scale * (sigma_chol * z)).transpose();
    }
  }
  return {Dataset(std::move(x), d.column_names()), std::move(rows)};
}

}  // namespace drop
