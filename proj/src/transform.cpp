#include <drop/transform.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace drop {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation, relative error about 1.15e-9.
double quantile_initial(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  if (u < lo) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u > 1.0 - lo) {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("normal_quantile: argument must lie in (0, 1)");
  if (u == 0.5) return 0.0;
  // Work in the lower tail where the CDF residual keeps full relative precision.
  if (u > 0.5) return -normal_quantile(1.0 - u);
  double x = quantile_initial(u);
  // Halley refinement against the erfc-based CDF.
  const double e = normal_cdf(x) - u;
  const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= step / (1.0 + 0.5 * x * step);
  return x;
}

std::vector<double> midranks(const Eigen::Ref<const Vector>& x) {
  const size_t n = static_cast<size_t>(x.size());
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  size_t k = 0;
  while (k < n) {
    size_t end = k + 1;
    while (end < n && x[order[end]] == x[order[k]]) ++end;
    const double avg = 0.5 * static_cast<double>(k + 1 + end);
    for (size_t t = k; t < end; ++t) ranks[order[t]] = avg;
    k = end;
  }
  return ranks;
}

namespace {

bool is_constant(const Eigen::Ref<const Vector>& x) { return (x.array() == x[0]).all(); }

std::string column_label(const Dataset& d, Index j) {
  if (!d.column_names().empty()) return "'" + d.column_names()[static_cast<size_t>(j)] + "' (index " + std::to_string(j) + ")";
  return "index " + std::to_string(j);
}

}  // namespace

Dataset npn_transform(const Dataset& d) {
  const Index n = d.n();
  Matrix out(n, d.p());
  for (Index j = 0; j < d.p(); ++j) {
    Vector col = d.column(j);
    if (is_constant(col)) throw DropError("npn_transform: column " + column_label(d, j) + " is constant");
    const auto r = midranks(col);
    for (Index k = 0; k < n; ++k) {
      out(k, j) = normal_quantile((r[static_cast<size_t>(k)] - 0.5) / static_cast<double>(n));
    }
  }
  return Dataset(center_columns(out), d.column_names());
}

double kendall_tau_direct(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const Index n = x.size();
  long long s = 0, tx = 0, ty = 0;
  for (Index k = 0; k < n; ++k) {
    for (Index l = k + 1; l < n; ++l) {
      const int sx = (x[k] > x[l]) - (x[k] < x[l]);
      const int sy = (y[k] > y[l]) - (y[k] < y[l]);
      s += sx * sy;
      tx += sx == 0;
      ty += sy == 0;
    }
  }
  const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double denom = std::sqrt((n0 - static_cast<double>(tx)) * (n0 - static_cast<double>(ty)));
  return denom > 0.0 ? static_cast<double>(s) / denom : 0.0;
}

namespace {

// Counts pairs sharing a value in a sorted sequence.
long long tied_pairs(const std::vector<double>& sorted) {
  long long t = 0, run = 1;
  for (size_t k = 1; k <= sorted.size(); ++k) {
    if (k < sorted.size() && sorted[k] == sorted[k - 1]) {
      ++run;
    } else {
      t += run * (run - 1) / 2;
      run = 1;
    }
  }
  return t;
}

long long merge_count(std::vector<double>& v, std::vector<double>& buf, size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  long long swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  size_t a = lo, b = mid, o = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      swaps += static_cast<long long>(mid - a);
      buf[o++] = v[b++];
    } else {
      buf[o++] = v[a++];
    }
  }
  while (a < mid) buf[o++] = v[a++];
  while (b < hi) buf[o++] = v[b++];
  std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi), v.begin() + static_cast<long>(lo));
  return swaps;
}

}  // namespace

double kendall_tau_merge(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const size_t n = static_cast<size_t>(x.size());
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (size_t k = 0; k < n; ++k) {
    xs[k] = x[order[k]];
    ys[k] = y[order[k]];
  }
  const long long tx = tied_pairs(xs);
  long long txy = 0, run = 1;
  for (size_t k = 1; k <= n; ++k) {
    if (k < n && xs[k] == xs[k - 1] && ys[k] == ys[k - 1]) {
      ++run;
    } else {
      txy += run * (run - 1) / 2;
      run = 1;
    }
  }
  std::vector<double> buf(n);
  const long long swaps = merge_count(ys, buf, 0, n);
  const long long ty = tied_pairs(ys);
  const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const double s = static_cast<double>(n0 - tx - ty + txy - 2 * swaps);
  const double denom = std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
  return denom > 0.0 ? s / denom : 0.0;
}

double kendall_tau(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  return x.size() <= kKendallDirectLimit ? kendall_tau_direct(x, y) : kendall_tau_merge(x, y);
}

double spearman_rho(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const Eigen::Map<const Vector> a(rx.data(), static_cast<Index>(rx.size()));
  const Eigen::Map<const Vector> b(ry.data(), static_cast<Index>(ry.size()));
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  return denom > 0.0 ? ca.dot(cb) / denom : 0.0;
}

namespace {

template <typename PairFn, typename MapFn>
RankCorrelationMatrix skeptic(const Dataset& d, RankKind kind, PairFn pair_stat, MapFn map) {
  const Index p = d.p();
  RankCorrelationMatrix out;
  out.kind = kind;
  out.entries = Matrix::Identity(p, p);
  std::vector<bool> constant(static_cast<size_t>(p));
  for (Index j = 0; j < p; ++j) {
    constant[static_cast<size_t>(j)] = is_constant(d.column(j));
    if (constant[static_cast<size_t>(j)]) out.constant_columns.push_back(j);
  }
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      double v = 0.0;
      if (!constant[static_cast<size_t>(i)] && !constant[static_cast<size_t>(j)]) {
        v = std::clamp(map(pair_stat(d.column(i), d.column(j))), -1.0, 1.0);
      }
      out.entries(i, j) = out.entries(j, i) = v;
    }
  }
  return out;
}

}  // namespace

RankCorrelationMatrix kendall_skeptic(const Dataset& d) {
  return skeptic(
      d, RankKind::kendall, [](const auto& a, const auto& b) { return kendall_tau(a, b); },
      [](double tau) { return std::sin(0.5 * std::numbers::pi * tau); });
}

RankCorrelationMatrix spearman_skeptic(const Dataset& d) {
  // Ranks are computed once per column rather than once per pair.
  const Index p = d.p();
  Matrix ranks(d.n(), p);
  for (Index j = 0; j < p; ++j) {
    const auto r = midranks(d.column(j));
    ranks.col(j) = Eigen::Map<const Vector>(r.data(), d.n());
  }
  RankCorrelationMatrix out;
  out.kind = RankKind::spearman;
  out.entries = Matrix::Identity(p, p);
  Matrix centered = center_columns(ranks);
  Vector norms = centered.colwise().norm();
  for (Index j = 0; j < p; ++j)
    if (!(norms[j] > 0.0)) out.constant_columns.push_back(j);
  Matrix cross = centered.transpose() * centered;
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      double v = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        const double rho = cross(i, j) / (norms[i] * norms[j]);
        v = std::clamp(2.0 * std::sin(std::numbers::pi * rho / 6.0), -1.0, 1.0);
      }
      out.entries(i, j) = out.entries(j, i) = v;
    }
  }
  return out;
}

}  // namespace drop
