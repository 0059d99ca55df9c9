#include <drop/selection.hpp>

#include <drop/parallel.hpp>
#include <drop/transform.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace drop {

double ebic_from_parts(double total_mse, Index edges, Index n, Index p, double gamma_ebic) {
  if (!(total_mse > 0.0)) throw DropError("EBIC undefined: total node-wise MSE is zero");
  const double e = static_cast<double>(edges);
  return static_cast<double>(n) * std::log(total_mse) + e * std::log(static_cast<double>(n)) +
         4.0 * gamma_ebic * e * std::log(static_cast<double>(p));
}

double ebic_score(const FitResult& fit, const Dataset& d, double gamma_ebic) {
  const Vector mse = node_mse_all(fit.k, d);
  return ebic_from_parts(mse.sum(), fit.adjacency.edge_count(), d.n(), d.p(), gamma_ebic);
}

std::string to_string(SelectionCriterion c) {
  return c == SelectionCriterion::summed ? "summed" : "nodewise_refit";
}

SelectionCriterion parse_criterion(const std::string& s) {
  if (s == "summed") return SelectionCriterion::summed;
  if (s == "nodewise_refit" || s == "refit") return SelectionCriterion::nodewise_refit;
  throw DropError("unknown selection criterion '" + s + "'");
}

Vector refit_mse(const Matrix& gram, Index n, const Adjacency& a) {
  const Index p = gram.rows();
  Vector out(p);
  std::vector<Index> nb;
  for (Index i = 0; i < p; ++i) {
    nb.clear();
    for (Index j = 0; j < p; ++j)
      if (j != i && a(i, j)) nb.push_back(j);
    double rss = gram(i, i);
    if (!nb.empty()) {
      const Index k = static_cast<Index>(nb.size());
      Matrix gss(k, k);
      Vector gsi(k);
      for (Index r = 0; r < k; ++r) {
        gsi[r] = gram(nb[static_cast<size_t>(r)], i);
        for (Index c = 0; c < k; ++c) gss(r, c) = gram(nb[static_cast<size_t>(r)], nb[static_cast<size_t>(c)]);
      }
      const Vector b = gss.ldlt().solve(gsi);
      rss -= gsi.dot(b);
    }
    out[i] = std::max(rss, 0.0) / static_cast<double>(n);
  }
  return out;
}

double nodewise_refit_score(const Vector& refit, Index edges, Index n, double gamma_ebic) {
  double s = 0.0;
  for (Index i = 0; i < refit.size(); ++i) {
    if (!(refit[i] > 0.0)) return std::numeric_limits<double>::infinity();
    s += std::log(refit[i]);
  }
  const double e = static_cast<double>(edges);
  const double dn = static_cast<double>(n);
  return dn * s + 2.0 * e * std::log(dn) + 4.0 * gamma_ebic * e * std::log(static_cast<double>(refit.size()));
}

namespace {

double score_with_gram(const FitResult& f, const Dataset& x_tilde, const Matrix& gram, SelectionCriterion c,
                       double gamma_ebic) {
  if (c == SelectionCriterion::summed) {
    const double total = f.mse.sum();
    if (!(total > 0.0)) return std::numeric_limits<double>::infinity();
    return ebic_from_parts(total, f.edge_count(), x_tilde.n(), x_tilde.p(), gamma_ebic);
  }
  return nodewise_refit_score(refit_mse(gram, x_tilde.n(), f.adjacency), f.edge_count(), x_tilde.n(), gamma_ebic);
}

}  // namespace

double criterion_score(const FitResult& fit, const Dataset& x_tilde, SelectionCriterion c, double gamma_ebic) {
  Matrix gram;
  if (c == SelectionCriterion::nodewise_refit) gram = x_tilde.values().transpose() * x_tilde.values();
  return score_with_gram(fit, x_tilde, gram, c, gamma_ebic);
}

Index argmin_ebic(const std::vector<double>& lambdas, const std::vector<double>& scores) {
  Index best = -1;
  for (size_t k = 0; k < scores.size(); ++k) {
    if (!std::isfinite(scores[k])) continue;
    if (best < 0 || scores[k] < scores[static_cast<size_t>(best)] ||
        (scores[k] == scores[static_cast<size_t>(best)] && lambdas[k] > lambdas[static_cast<size_t>(best)])) {
      best = static_cast<Index>(k);
    }
  }
  return best;
}

std::vector<double> log_spaced_grid(double lambda_max, double ratio, int count) {
  if (!(lambda_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
    throw DropError("invalid lambda grid request");
  }
  std::vector<double> grid(static_cast<size_t>(count));
  if (count == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double lo = std::log(ratio);
  for (int k = 0; k < count; ++k) {
    grid[static_cast<size_t>(k)] = lambda_max * std::exp(lo * k / (count - 1));
  }
  return grid;
}

std::vector<double> default_drop_grid(const Dataset& x_tilde, const Matrix& k0, int count, double ratio) {
  double lmax = drop_lambda_max(x_tilde, k0);
  if (!(lmax > 0.0)) lmax = 1.0;
  return log_spaced_grid(lmax, ratio, count);
}

Selection select_lambda_transformed(const Dataset& x_tilde, const Matrix& k0, const SelectionConfig& cfg) {
  std::vector<double> grid = cfg.grid.empty() ? default_drop_grid(x_tilde, k0, cfg.n_lambda, cfg.lambda_min_ratio) : cfg.grid;
  if (grid.empty()) throw DropError("lambda grid is empty");
  for (double l : grid)
    if (!(l > 0.0)) throw DropError("lambda grid entries must be positive");

  Selection sel;
  sel.path.resize(grid.size());
  auto fit_at = [&](size_t k, const Matrix& start) {
    DropConfig c = cfg.fit;
    c.lambda = grid[k];
    return fit_drop_transformed(x_tilde, c, start);
  };

  if (cfg.warm_start) {
    Matrix start = k0;
    for (size_t k = 0; k < grid.size(); ++k) {
      sel.path[k] = fit_at(k, start);
      if (sel.path[k].timed_out) {
        sel.path.resize(k + 1);
        grid.resize(k + 1);
        break;
      }
      start = sel.path[k].k;
    }
  } else {
    parallel_for(grid.size(), cfg.workers, [&](size_t k) { sel.path[k] = fit_at(k, k0); });
  }

  auto& tr = sel.trace;
  tr.lambdas = grid;
  Matrix gram;
  if (cfg.criterion == SelectionCriterion::nodewise_refit) gram = x_tilde.values().transpose() * x_tilde.values();
  for (const auto& f : sel.path) {
    const double score = f.converged ? score_with_gram(f, x_tilde, gram, cfg.criterion, cfg.gamma_ebic)
                                     : std::numeric_limits<double>::infinity();
    tr.ebic_scores.push_back(score);
    tr.edge_counts.push_back(f.edge_count());
    tr.converged.push_back(f.converged);
  }
  tr.chosen_index = argmin_ebic(tr.lambdas, tr.ebic_scores);
  if (tr.chosen_index < 0) throw SelectionError("no lambda on the grid produced a converged fit", tr);
  sel.fit = sel.path[static_cast<size_t>(tr.chosen_index)];
  return sel;
}

Selection select_lambda(const Dataset& raw, const SelectionConfig& cfg) {
  const Dataset x_tilde = npn_transform(raw);
  const PrecisionMatrix k0 = robust_init(x_tilde);
  return select_lambda_transformed(x_tilde, k0.entries(), cfg);
}

}  // namespace drop
