#include <drop/baselines.hpp>

#include <drop/estimator.hpp>
#include <drop/transform.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace drop {

std::string to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::glasso: return "glasso";
    case BaselineMethod::mb: return "mb";
    case BaselineMethod::npn_glasso: return "npn";
    case BaselineMethod::kendall_glasso: return "kendall";
    case BaselineMethod::spearman_glasso: return "spearman";
  }
  return "?";
}

BaselineMethod parse_baseline(const std::string& s) {
  if (s == "glasso") return BaselineMethod::glasso;
  if (s == "mb") return BaselineMethod::mb;
  if (s == "npn" || s == "npn_glasso") return BaselineMethod::npn_glasso;
  if (s == "kendall" || s == "kendall_glasso") return BaselineMethod::kendall_glasso;
  if (s == "spearman" || s == "spearman_glasso") return BaselineMethod::spearman_glasso;
  throw DropError("unknown baseline method '" + s + "'");
}

int covariance_lasso(const Matrix& a, const Vector& c, double lambda, Index skip, Vector& beta, double tol,
                     int max_iter) {
  const Index p = a.rows();
  if (skip >= 0 && skip < p) beta[skip] = 0.0;
  Vector grad = a * beta;  // grad_l = sum_k A_lk beta_k
  int it = 0;
  for (; it < max_iter; ++it) {
    double max_change = 0.0;
    for (Index k = 0; k < p; ++k) {
      if (k == skip) continue;
      const double akk = a(k, k);
      const double r = c[k] - (grad[k] - akk * beta[k]);
      const double updated = r > lambda ? (r - lambda) / akk : r < -lambda ? (r + lambda) / akk : 0.0;
      const double delta = updated - beta[k];
      if (delta != 0.0) {
        grad.noalias() += delta * a.col(k);
        beta[k] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < tol) break;
  }
  return it;
}

namespace {

Matrix precision_from_glasso(const Matrix& w, const Matrix& coef) {
  const Index p = w.rows();
  Matrix k(p, p);
  for (Index j = 0; j < p; ++j) {
    double quad = 0.0;
    for (Index l = 0; l < p; ++l)
      if (l != j) quad += w(l, j) * coef(l, j);
    const double kjj = 1.0 / (w(j, j) - quad);
    for (Index l = 0; l < p; ++l) k(l, j) = l == j ? kjj : -coef(l, j) * kjj;
  }
  return (k + k.transpose()) * 0.5;
}

double mean_abs_offdiag(const Matrix& m) {
  const Index p = m.rows();
  if (p < 2) return 0.0;
  return (m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum()) / static_cast<double>(p * (p - 1));
}

}  // namespace

GlassoResult fit_glasso(const Matrix& s, double lambda, const GlassoOptions& opts, const GlassoResult* warm) {
  const Index p = s.rows();
  if (s.cols() != p) throw DropError("glasso: input must be square");
  if (!is_symmetric(s, 1e-10)) throw DropError("glasso: input must be symmetric");
  for (Index i = 0; i < p; ++i)
    if (!(s(i, i) > 0.0)) throw DropError("glasso: input diagonal must be positive");
  if (!(lambda >= 0.0)) throw DropError("glasso: lambda must be nonnegative");

  GlassoResult res;
  Matrix w;
  Matrix coef;
  if (warm && warm->covariance.rows() == p) {
    w = warm->covariance;
    coef = Matrix::Zero(p, p);
    // beta for column j solves W11 beta = w12; recover it from the precision.
    for (Index j = 0; j < p; ++j)
      for (Index l = 0; l < p; ++l)
        if (l != j) coef(l, j) = -warm->precision(l, j) / warm->precision(j, j);
  } else {
    w = s;
    coef = Matrix::Zero(p, p);
  }
  w.diagonal() = s.diagonal().array() + lambda;

  const double scale = mean_abs_offdiag(s);
  const double threshold = opts.outer_tol * (scale > 0.0 ? scale : 1.0);

  Vector beta(p), c(p);
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    if (opts.deadline.expired()) {
      res.timed_out = true;
      break;
    }
    double change = 0.0;
    for (Index j = 0; j < p; ++j) {
      beta = coef.col(j);
      c = s.col(j);
      covariance_lasso(w, c, lambda, j, beta, opts.inner_tol, opts.max_inner);
      coef.col(j) = beta;
      // New off-diagonal column: W11 beta.
      for (Index l = 0; l < p; ++l) {
        if (l == j) continue;
        double v = 0.0;
        for (Index m = 0; m < p; ++m)
          if (m != j && beta[m] != 0.0) v += w(l, m) * beta[m];
        change += std::abs(v - w(l, j));
        w(l, j) = w(j, l) = v;
      }
    }
    res.iterations = outer;
    Eigen::LLT<Matrix> llt(w);
    if (llt.info() != Eigen::Success) res.positive_definite = false;
    if (p > 1 && change / static_cast<double>(p * (p - 1)) < threshold) {
      res.converged = true;
      break;
    }
    if (p == 1) {
      res.converged = true;
      break;
    }
  }
  res.covariance = w;
  res.precision = precision_from_glasso(w, coef);
  return res;
}

MbResult fit_mb(const Dataset& d, double lambda) {
  const Matrix s = empirical_covariance(d.values());
  const Index p = d.p();
  MbResult out;
  out.coefficients = Matrix::Zero(p, p);
  Vector beta(p);
  for (Index i = 0; i < p; ++i) {
    beta.setZero();
    const Vector c = s.col(i);
    covariance_lasso(s, c, lambda, i, beta, 1e-8, 10000);
    out.coefficients.col(i) = beta;
  }
  out.adjacency = Adjacency(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (out.coefficients(j, i) != 0.0 && out.coefficients(i, j) != 0.0) out.adjacency.set(i, j, true);
  return out;
}

RankInput rank_glasso_input(const Dataset& d, BaselineMethod kind) {
  RankInput in;
  switch (kind) {
    case BaselineMethod::glasso:
    case BaselineMethod::mb:
      in.s = empirical_covariance(center_columns(d.values()));
      return in;
    case BaselineMethod::npn_glasso:
      in.s = empirical_covariance(npn_transform(d).values());
      return in;
    case BaselineMethod::kendall_glasso:
      in.s = kendall_skeptic(d).entries;
      break;
    case BaselineMethod::spearman_glasso:
      in.s = spearman_skeptic(d).entries;
      break;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(in.s, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < 1e-4) {
    in.s = eigenvalue_floor(in.s, 1e-4);
    in.repaired = true;
  }
  return in;
}

GlassoResult fit_rank_glasso(const Dataset& d, BaselineMethod kind, double lambda, bool* repaired) {
  const auto in = rank_glasso_input(d, kind);
  if (repaired) *repaired = in.repaired;
  return fit_glasso(in.s, lambda);
}

double glasso_ebic(const Matrix& s, const Matrix& k, Index edges, Index n, double gamma_ebic) {
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Matrix l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double trace = (s.cwiseProduct(k)).sum();
  const double e = static_cast<double>(edges);
  return static_cast<double>(n) * (trace - logdet) + e * std::log(static_cast<double>(n)) +
         4.0 * gamma_ebic * e * std::log(static_cast<double>(s.rows()));
}

namespace {

std::vector<double> baseline_grid(const Matrix& s, const BaselineSelectionConfig& cfg) {
  if (!cfg.grid.empty()) return cfg.grid;
  double lmax = 0.0;
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = i + 1; j < s.cols(); ++j) lmax = std::max(lmax, std::abs(s(i, j)));
  if (!(lmax > 0.0)) lmax = 1.0;
  return log_spaced_grid(lmax, cfg.lambda_min_ratio, cfg.n_lambda);
}

}  // namespace

BaselineFit select_glasso(const Matrix& s, Index n, const BaselineSelectionConfig& cfg) {
  const auto grid = baseline_grid(s, cfg);
  BaselineFit out;
  out.trace.lambdas = grid;
  GlassoOptions opts;
  opts.deadline = cfg.deadline;
  std::vector<GlassoResult> fits;
  fits.reserve(grid.size());
  for (size_t k = 0; k < grid.size(); ++k) {
    fits.push_back(fit_glasso(s, grid[k], opts, k ? &fits.back() : nullptr));
    const auto& f = fits.back();
    const auto adj = Adjacency::from_threshold(f.precision, cfg.edge_threshold);
    const bool usable = f.converged && !f.timed_out;
    out.trace.ebic_scores.push_back(usable ? glasso_ebic(s, f.precision, adj.edge_count(), n, cfg.gamma_ebic)
                                           : std::numeric_limits<double>::infinity());
    out.trace.edge_counts.push_back(adj.edge_count());
    out.trace.converged.push_back(f.converged);
    if (f.timed_out) {
      out.timed_out = true;
      out.trace.lambdas.resize(k + 1);
      break;
    }
  }
  out.trace.chosen_index = argmin_ebic(out.trace.lambdas, out.trace.ebic_scores);
  if (out.trace.chosen_index < 0) return out;
  const auto& best = fits[static_cast<size_t>(out.trace.chosen_index)];
  out.precision = best.precision;
  out.adjacency = Adjacency::from_threshold(best.precision, cfg.edge_threshold);
  out.lambda = grid[static_cast<size_t>(out.trace.chosen_index)];
  out.converged = !out.timed_out;
  return out;
}

BaselineFit select_mb(const Dataset& raw, const BaselineSelectionConfig& cfg) {
  const Matrix x = center_columns(raw.values());
  const Matrix s = empirical_covariance(x);
  const Index p = raw.p();
  const Index n = raw.n();
  const auto grid = baseline_grid(s, cfg);
  BaselineFit out;
  out.trace.lambdas = grid;
  Matrix coef = Matrix::Zero(p, p);
  const double log_n = std::log(static_cast<double>(n));
  const double log_p = std::log(static_cast<double>(p - 1));
  Vector beta(p);
  for (Index i = 0; i < p; ++i) {
    if (cfg.deadline.expired()) {
      out.timed_out = true;
      return out;
    }
    beta.setZero();
    const Vector c = s.col(i);
    double best_score = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
      covariance_lasso(s, c, lambda, i, beta, 1e-8, 10000);
      const double mse = s(i, i) - 2.0 * beta.dot(c) + beta.dot(s * beta);
      const double k = static_cast<double>((beta.array() != 0.0).count());
      const double score = static_cast<double>(n) * std::log(std::max(mse, 1e-300)) + k * log_n + 2.0 * cfg.gamma_ebic * k * log_p;
      if (score < best_score) {
        best_score = score;
        coef.col(i) = beta;
      }
    }
  }
  out.adjacency = Adjacency(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (coef(j, i) != 0.0 && coef(i, j) != 0.0) out.adjacency.set(i, j, true);
  out.converged = true;
  return out;
}

BaselineFit run_baseline(BaselineMethod m, const Dataset& raw, const BaselineSelectionConfig& cfg) {
  if (m == BaselineMethod::mb) return select_mb(raw, cfg);
  const auto in = rank_glasso_input(raw, m);
  BaselineFit out = select_glasso(in.s, raw.n(), cfg);
  out.repaired = in.repaired;
  return out;
}

}  // namespace drop
