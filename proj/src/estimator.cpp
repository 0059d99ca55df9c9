#include <drop/estimator.hpp>

#include <drop/transform.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace drop {

ShrinkageEstimate linear_shrinkage(const Matrix& x) {
  const Index n = x.rows();
  const Index p = x.cols();
  const Matrix s = empirical_covariance(x);
  ShrinkageEstimate out;
  out.mu = s.trace() / static_cast<double>(p);
  const Matrix dev = s - out.mu * Matrix::Identity(p, p);
  const double d2 = dev.squaredNorm() / static_cast<double>(p);

  // sum_k ||x_k x_k^T - S||_F^2 = sum_k ||x_k||^4 - 2 x_k^T S x_k + ||S||_F^2
  const Vector row_sq = x.rowwise().squaredNorm();
  const Vector quad = ((x * s).array() * x.array()).rowwise().sum();
  const double s_norm2 = s.squaredNorm();
  double acc = 0.0;
  for (Index k = 0; k < n; ++k) acc += row_sq[k] * row_sq[k] - 2.0 * quad[k] + s_norm2;
  const double b2_bar = acc / (static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(p));
  const double b2 = std::min(b2_bar, d2);

  out.alpha = d2 > 0.0 ? b2 / d2 : 1.0;
  out.alpha = std::clamp(out.alpha, kMinShrinkage, 1.0);
  out.sigma = (1.0 - out.alpha) * s + out.alpha * out.mu * Matrix::Identity(p, p);
  return out;
}

PrecisionMatrix robust_init(const Dataset& d_tilde) {
  const auto est = linear_shrinkage(d_tilde.values());
  const Index p = d_tilde.p();
  Eigen::LLT<Matrix> llt(est.sigma);
  if (llt.info() != Eigen::Success) throw DropError("robust_init: shrinkage covariance is not positive definite");
  Matrix k = llt.solve(Matrix::Identity(p, p));
  return PrecisionMatrix((k + k.transpose()) * 0.5);
}

namespace {

void require_positive_diagonal(const Matrix& k) {
  for (Index i = 0; i < k.rows(); ++i) {
    if (!(k(i, i) > 0.0)) throw DropError("diagonal entry K_" + std::to_string(i) + std::to_string(i) + " must be positive");
  }
}

}  // namespace

double node_mse(const Matrix& k, const Dataset& d, Index i) {
  if (!(k(i, i) > 0.0)) throw DropError("node_mse: K_ii must be positive");
  // x_i - sum_{m != i} beta_m x_m with beta_m = -K_mi / K_ii, i.e. X K_{:,i} / K_ii.
  const Vector r = d.values() * (k.col(i) / k(i, i));
  return r.squaredNorm() / static_cast<double>(d.n());
}

Vector node_mse_all(const Matrix& k, const Dataset& d) {
  require_positive_diagonal(k);
  const Matrix r = d.values() * k;
  Vector mse(k.rows());
  for (Index i = 0; i < k.rows(); ++i) mse[i] = r.col(i).squaredNorm() / (k(i, i) * k(i, i)) / static_cast<double>(d.n());
  return mse;
}

Matrix adaptive_weights(const Matrix& k, const Vector& mse) {
  require_positive_diagonal(k);
  const Index p = k.rows();
  Vector a(p);
  for (Index i = 0; i < p; ++i) a[i] = std::sqrt(std::max(mse[i], 0.0)) / k(i, i);
  Matrix w(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) w(i, j) = i == j ? 0.0 : a[i] + a[j];
  return w;
}

Matrix adaptive_weights(const Matrix& k, const Dataset& d) { return adaptive_weights(k, node_mse_all(k, d)); }

DropState make_state(const Matrix& k, const Dataset& d) {
  DropState st;
  st.k = k;
  st.mse = node_mse_all(k, d);
  st.weights = adaptive_weights(k, st.mse);
  return st;
}

CoordinateTerms coordinate_terms(const Matrix& k, const Dataset& d, Index i, Index j) {
  const auto& x = d.values();
  const double kii = k(i, i);
  const double kjj = k(j, j);
  Vector sum_i = Vector::Zero(d.n());  // sum_{m != i,j} K_im X_m
  Vector sum_j = Vector::Zero(d.n());  // sum_{m != i,j} K_jm X_m
  for (Index m = 0; m < d.p(); ++m) {
    if (m == i || m == j) continue;
    sum_i += k(i, m) * x.col(m);
    sum_j += k(j, m) * x.col(m);
  }
  CoordinateTerms t;
  t.s0 = 2.0 * x.col(i).dot(x.col(j)) * (1.0 / kii + 1.0 / kjj) + 2.0 / (kii * kii) * x.col(j).dot(sum_i) +
         2.0 / (kjj * kjj) * x.col(i).dot(sum_j);
  t.s1 = 2.0 / (kii * kii) * x.col(j).squaredNorm() + 2.0 / (kjj * kjj) * x.col(i).squaredNorm();
  return t;
}

double soft_threshold_update(const CoordinateTerms& t, double threshold) {
  if (!(t.s1 > 0.0)) throw DropError("coordinate update: curvature S1 must be positive");
  if (t.s0 > threshold) return (-t.s0 + threshold) / t.s1;
  if (t.s0 < -threshold) return (-t.s0 - threshold) / t.s1;
  return 0.0;
}

double coordinate_update(const DropState& state, const Dataset& d, Index i, Index j, double lambda) {
  if (!(i < j)) throw DropError("coordinate_update expects i < j");
  const auto terms = coordinate_terms(state.k, d, i, j);
  return soft_threshold_update(terms, static_cast<double>(d.n()) * lambda * state.weights(i, j));
}

double drop_objective(const Matrix& k, const Dataset& d, double lambda, const Matrix& w) {
  const Index p = k.rows();
  double total = 0.0;
  for (Index i = 0; i < p; ++i) total += node_mse(k, d, i);
  double pen = 0.0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) pen += w(i, j) * std::abs(k(i, j));
  return total + lambda * pen;
}

double drop_objective(const Matrix& k, const Dataset& d, double lambda) {
  return drop_objective(k, d, lambda, adaptive_weights(k, d));
}

void DropConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DropError("lambda must be positive and finite");
  if (!(tol > 0.0)) throw DropError("tol must be positive");
  if (max_sweeps < 1) throw DropError("max_sweeps must be positive");
  if (!(edge_threshold > 0.0)) throw DropError("edge threshold must be positive");
}

namespace {

// Coordinate-descent workspace. Keeps the Gram matrix G = X^T X and M = G K so
// that S0, S1 and the node MSEs cost O(1) / O(p) instead of O(n p).
class DropSolver {
 public:
  DropSolver(const Dataset& x, const Matrix& k_start)
      : x_(x), n_(static_cast<double>(x.n())), p_(x.p()), g_(x.values().transpose() * x.values()), k_(k_start) {
    g_ = (g_ + g_.transpose()).eval() * 0.5;
    refresh_products();
  }

  const Matrix& k() const { return k_; }

  void refresh_products() { m_ = g_ * k_; }

  double mse(Index i) const {
    const double kii = k_(i, i);
    return std::max(k_.col(i).dot(m_.col(i)), 0.0) / (kii * kii) / n_;
  }

  Vector all_mse() const {
    Vector out(p_);
    for (Index i = 0; i < p_; ++i) out[i] = mse(i);
    return out;
  }

  CoordinateTerms terms(Index i, Index j) const {
    const double kii = k_(i, i), kjj = k_(j, j), kij = k_(i, j);
    const double gij = g_(i, j);
    const double sum_i = m_(j, i) - g_(j, i) * kii - g_(j, j) * kij;  // X_j^T sum_{m!=i,j} K_im X_m
    const double sum_j = m_(i, j) - g_(i, i) * kij - g_(i, j) * kjj;  // X_i^T sum_{m!=i,j} K_jm X_m
    CoordinateTerms t;
    t.s0 = 2.0 * gij * (1.0 / kii + 1.0 / kjj) + 2.0 / (kii * kii) * sum_i + 2.0 / (kjj * kjj) * sum_j;
    t.s1 = 2.0 / (kii * kii) * g_(j, j) + 2.0 / (kjj * kjj) * g_(i, i);
    return t;
  }

  /// Sets K_ij = K_ji = value; returns |change|.
  double set_pair(Index i, Index j, double value) {
    const double delta = value - k_(i, j);
    if (delta == 0.0) return 0.0;
    k_(i, j) = k_(j, i) = value;
    m_.col(j).noalias() += delta * g_.col(i);
    m_.col(i).noalias() += delta * g_.col(j);
    return std::abs(delta);
  }

  void set_diagonal(Index i, double value) {
    k_(i, i) = value;
  }

 private:
  const Dataset& x_;
  double n_;
  Index p_;
  Matrix g_;
  Matrix k_;
  Matrix m_;
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FitResult fit_drop_transformed(const Dataset& x_tilde, const DropConfig& cfg, const Matrix& k_start) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Index p = x_tilde.p();
  if (k_start.rows() != p || k_start.cols() != p) throw DropError("starting matrix has the wrong shape");
  require_positive_diagonal(k_start);

  FitResult res;
  res.lambda = cfg.lambda;
  DropSolver solver(x_tilde, (k_start + k_start.transpose()) * 0.5);
  const double n = static_cast<double>(x_tilde.n());
  if (cfg.audit_descent) res.audit = DescentAudit{};

  std::vector<bool> degenerate(static_cast<size_t>(p));
  bool degenerate_warned = false;

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    if (cfg.deadline.expired()) {
      res.timed_out = true;
      break;
    }
    solver.refresh_products();
    const Vector mse = solver.all_mse();
    const Matrix w = adaptive_weights(solver.k(), mse);
    for (Index i = 0; i < p; ++i) {
      // Exact collinearity: the node's residual vanishes relative to its scale.
      degenerate[static_cast<size_t>(i)] = mse[i] <= 1e-14 * x_tilde.column(i).squaredNorm() / n;
      if (degenerate[static_cast<size_t>(i)] && !degenerate_warned) {
        res.warnings.push_back("node " + std::to_string(i) + " has zero residual; its updates are skipped");
        degenerate_warned = true;
      }
    }

    double delta = 0.0;
    for (Index i = 0; i < p; ++i) {
      if (degenerate[static_cast<size_t>(i)]) continue;
      for (Index j = i + 1; j < p; ++j) {
        if (degenerate[static_cast<size_t>(j)]) continue;
        const auto terms = solver.terms(i, j);
        const double value = soft_threshold_update(terms, n * cfg.lambda * w(i, j));
        if (res.audit) {
          const double before = drop_objective(solver.k(), x_tilde, cfg.lambda, w);
          Matrix trial = solver.k();
          trial(i, j) = trial(j, i) = value;
          const double rise = drop_objective(trial, x_tilde, cfg.lambda, w) - before;
          ++res.audit->updates;
          res.audit->max_increase = std::max(res.audit->max_increase, rise);
          if (rise > 1e-10) ++res.audit->increases;
          assert(rise <= 1e-10 * std::max(1.0, std::abs(before)));
        }
        delta += 2.0 * solver.set_pair(i, j, value);
      }
    }

    if (cfg.refresh_diagonal) {
      solver.refresh_products();
      for (Index i = 0; i < p; ++i) {
        const double m = solver.mse(i) * solver.k()(i, i) * solver.k()(i, i);  // ||X K_i||^2 / n
        if (m > 0.0) {
          const double old = solver.k()(i, i);
          // K_ii <- 1 / MSE_i, where MSE_i = m / K_ii^2 at the current diagonal.
          const double updated = old * old / m;
          delta += std::abs(updated - old);
          solver.set_diagonal(i, updated);
        }
      }
    }

    res.sweeps = sweep;
    res.last_delta = delta;
    if (delta < cfg.tol) {
      res.converged = true;
      break;
    }
  }

  solver.refresh_products();
  res.k = solver.k();
  res.mse = solver.all_mse();
  res.adjacency = Adjacency::from_threshold(res.k, cfg.edge_threshold);
  res.wall_time_s = elapsed_s(start);
  return res;
}

FitResult fit_drop(const Dataset& raw, const DropConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset x_tilde = npn_transform(raw);
  const PrecisionMatrix k0 = robust_init(x_tilde);
  FitResult res = fit_drop_transformed(x_tilde, cfg, k0.entries());
  res.wall_time_s = elapsed_s(start);
  return res;
}

double drop_lambda_max(const Dataset& x_tilde, const Matrix& k0) {
  DropSolver solver(x_tilde, k0);
  const Vector mse = solver.all_mse();
  const Matrix w = adaptive_weights(k0, mse);
  const double n = static_cast<double>(x_tilde.n());
  double best = 0.0;
  for (Index i = 0; i < k0.rows(); ++i)
    for (Index j = i + 1; j < k0.rows(); ++j)
      if (w(i, j) > 0.0) best = std::max(best, std::abs(solver.terms(i, j).s0) / (n * w(i, j)));
  return best;
}

Matrix eigenvalue_floor(const Matrix& k, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((k + k.transpose()) * 0.5);
  Vector ev = es.eigenvalues().cwiseMax(floor);
  Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return (out + out.transpose()) * 0.5;
}

Matrix partial_correlations(const Matrix& k) {
  require_positive_diagonal(k);
  const Vector inv_sd = k.diagonal().cwiseSqrt().cwiseInverse();
  Matrix pc = -(inv_sd.asDiagonal() * k * inv_sd.asDiagonal());
  pc.diagonal().setOnes();
  return pc;
}

// ---------------------------------------------------------------------------

double single_task_objective(const Vector& y, const Matrix& x, const Vector& beta, double lambda) {
  const double n = static_cast<double>(y.size());
  const Vector r = y - x * beta;
  const double rn = r.norm();
  return rn * rn / n + lambda / std::sqrt(n) * rn * beta.lpNorm<1>();
}

namespace {

// Lasso (1/n)||y - X b||^2 + pen ||b||_1 by cyclic coordinate descent.
void weighted_lasso(const Vector& y, const Matrix& x, const Vector& col_sq, double pen, Vector& beta, int max_iter,
                    double tol) {
  const double n = static_cast<double>(y.size());
  Vector r = y - x * beta;
  const double thr = 0.5 * n * pen;
  for (int it = 0; it < max_iter; ++it) {
    double max_change = 0.0;
    for (Index j = 0; j < x.cols(); ++j) {
      if (!(col_sq[j] > 0.0)) continue;
      const double rho = x.col(j).dot(r) + col_sq[j] * beta[j];
      const double updated = rho > thr ? (rho - thr) / col_sq[j] : rho < -thr ? (rho + thr) / col_sq[j] : 0.0;
      const double change = updated - beta[j];
      if (change != 0.0) {
        r.noalias() -= change * x.col(j);
        beta[j] = updated;
        max_change = std::max(max_change, std::abs(change) * std::sqrt(col_sq[j]));
      }
    }
    if (max_change < tol) break;
  }
}

}  // namespace

Vector fit_single_task_drop(const Vector& y, const Matrix& x, double lambda, const SingleTaskOptions& opts) {
  const Index d = x.cols();
  const double n = static_cast<double>(y.size());
  if (y.size() != x.rows()) throw DropError("single-task: y and X row counts differ");
  if (y.size() < 2) throw DropError("single-task: need n >= 2");
  const Vector col_sq = x.colwise().squaredNorm();

  auto objective = [&](const Vector& b) { return single_task_objective(y, x, b, lambda); };

  Vector beta = opts.warm_start ? *opts.warm_start : Vector::Zero(d);
  if (beta.size() != d) throw DropError("single-task: warm start has the wrong length");
  double f = objective(beta);

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    // Frozen residual scale s = ||r|| / sqrt(n). The factor c makes fixed points
    // of this step stationary for the full objective, whose penalty also
    // depends on the residual.
    const double s = (y - x * beta).norm() / std::sqrt(n);
    if (!(s > 0.0)) break;
    const double c = 1.0 + lambda * beta.lpNorm<1>() / (2.0 * s);
    Vector candidate = beta;
    weighted_lasso(y, x, col_sq, lambda * s / c, candidate, opts.max_inner, 1e-12);

    double f_new = objective(candidate);
    // Backtrack toward the current iterate if the step did not descend.
    double step = 1.0;
    Vector trial = candidate;
    while (f_new > f && step > 1e-6) {
      step *= 0.5;
      trial = beta + step * (candidate - beta);
      f_new = objective(trial);
    }
    if (f_new > f) break;
    const double improvement = f - f_new;
    beta = trial;
    f = f_new;
    if (improvement < opts.tol) break;
  }

  // The objective is not convex; never return something worse than the zero vector.
  if (objective(Vector::Zero(d)) < f) beta.setZero();
  return beta;
}

// ---------------------------------------------------------------------------

namespace {

// Projected gradient ascent of (1/|B|) sum_{b in B} (1/n) sum_k (r_kb + t_k b^T v_k)^2
// over t >= 0 with (1/n)||t||^2 <= delta and v_k in [-1, 1]^p. Every iterate is
// a feasible transport plan with l_inf cost, so the best value is a lower bound.
double ascend(const Matrix& residuals, const Matrix& directions, double delta, int iters) {
  const Index n = residuals.rows();
  const Index nb = residuals.cols();
  const Index p = directions.rows();
  const double nn = static_cast<double>(n);
  auto value_of = [&](const Vector& t, const Matrix& v) {
    // v is p x n; projections P = directions^T v is nb x n.
    const Matrix proj = directions.transpose() * v;
    double acc = 0.0;
    for (Index b = 0; b < nb; ++b)
      for (Index k = 0; k < n; ++k) {
        const double e = residuals(k, b) + t[k] * proj(b, k);
        acc += e * e;
      }
    return acc / (nn * static_cast<double>(nb));
  };

  const double radius = std::sqrt(nn * delta);
  Vector t = Vector::Constant(n, std::sqrt(delta));
  // Start at the vertex aligned with the first direction and each sample's residual sign.
  Matrix v(p, n);
  for (Index k = 0; k < n; ++k) {
    const double sgn = residuals(k, 0) >= 0.0 ? 1.0 : -1.0;
    for (Index m = 0; m < p; ++m) v(m, k) = sgn * (directions(m, 0) >= 0.0 ? 1.0 : -1.0);
  }
  double best = value_of(t, v);
  if (delta == 0.0) return best;

  for (int it = 0; it < iters; ++it) {
    const double eta = 1.0 / std::sqrt(1.0 + it);
    const Matrix proj = directions.transpose() * v;  // nb x n
    Matrix err(nb, n);
    for (Index b = 0; b < nb; ++b)
      for (Index k = 0; k < n; ++k) err(b, k) = residuals(k, b) + t[k] * proj(b, k);
    // d/dt_k = (2/(n nb)) sum_b err_bk proj_bk ; d/dv_k = (2/(n nb)) t_k sum_b err_bk dir_b
    Vector gt(n);
    for (Index k = 0; k < n; ++k) gt[k] = err.col(k).dot(proj.col(k));
    const Matrix gv = directions * err;  // p x n, before the t_k factor
    for (Index k = 0; k < n; ++k) {
      const double scale = gv.col(k).cwiseAbs().maxCoeff();
      if (scale > 0.0) v.col(k) = (v.col(k) + eta * gv.col(k) / scale).cwiseMax(-1.0).cwiseMin(1.0);
    }
    const double gnorm = gt.norm();
    if (gnorm > 0.0) t += eta * radius * gt / gnorm;
    t = t.cwiseMax(0.0);
    const double tn = t.norm();
    if (tn > radius) t *= radius / tn;
    best = std::max(best, value_of(t, v));
  }
  return best;
}

}  // namespace

DualityProbe duality_probe(const Dataset& d, const Matrix& k, double delta, int budget_iters, PerturbationMode mode) {
  if (!(delta >= 0.0)) throw DropError("duality probe: delta must be nonnegative");
  require_positive_diagonal(k);
  const Index p = k.rows();
  const double n = static_cast<double>(d.n());
  // Augmented coefficient vectors in original coordinates: b_i = K_{:,i} / K_ii,
  // so b_i^T x = x_i - beta^(i)^T x_{-i}.
  Matrix dirs(p, p);
  for (Index i = 0; i < p; ++i) dirs.col(i) = k.col(i) / k(i, i);
  const Matrix resid = d.values() * dirs;  // n x p

  DualityProbe out;
  double rhs = 0.0, emp = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double mse = resid.col(i).squaredNorm() / n;
    const double dual_norm = dirs.col(i).lpNorm<1>();  // 1 + ||beta^(i)||_1
    const double term = std::sqrt(mse) + std::sqrt(delta) * dual_norm;
    rhs += term * term;
    emp += mse;
  }
  out.rhs = rhs / static_cast<double>(p);
  out.empirical = emp / static_cast<double>(p);

  if (delta == 0.0) {
    out.lhs_lower = out.empirical;
    return out;
  }
  if (mode == PerturbationMode::shared) {
    out.lhs_lower = ascend(resid, dirs, delta, budget_iters);
  } else {
    double acc = 0.0;
    for (Index i = 0; i < p; ++i) acc += ascend(resid.col(i), dirs.col(i), delta, budget_iters);
    out.lhs_lower = acc / static_cast<double>(p);
  }
  return out;
}

}  // namespace drop
