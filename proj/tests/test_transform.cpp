#include <drop/transform.hpp>

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace drop;

namespace {

// Standard normal CDF from its Taylor series, summed in long double.
long double series_cdf(long double x) {
  long double term = x, sum = x;
  for (int k = 1; k < 400; ++k) {
    term *= -x * x / (2.0L * k);
    const long double add = term / (2.0L * k + 1.0L);
    sum += add;
    if (std::abs(add) < 1e-30L) break;
  }
  return 0.5L + sum / std::sqrt(2.0L * std::numbers::pi_v<long double>);
}

double bisection_quantile(double u) {
  long double lo = -8.0L, hi = 8.0L;
  for (int it = 0; it < 120; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (series_cdf(mid) < u) lo = mid;
    else hi = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

double brute_kendall(const Vector& x, const Vector& y) {
  double conc = 0.0, disc = 0.0, tx = 0.0, ty = 0.0;
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = i + 1; j < x.size(); ++j) {
      const double a = (x[i] > x[j]) - (x[i] < x[j]);
      const double b = (y[i] > y[j]) - (y[i] < y[j]);
      if (a == 0 && b == 0) continue;
      if (a == 0) tx += 1;
      else if (b == 0) ty += 1;
      else if (a == b) conc += 1;
      else disc += 1;
    }
  return (conc - disc) / std::sqrt((conc + disc + tx) * (conc + disc + ty));
}

}  // namespace

TEST_SUITE("transform") {
  TEST_CASE("normal_quantile fixed points and symmetry") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-7));
    // Dyadic u keeps 1 - u exact, so the check isolates the quantile itself.
    for (double u : {std::ldexp(1.0, -33), std::ldexp(1.0, -17), 0.0078125, 0.25, 0.4375})
      CHECK(std::abs(normal_quantile(1.0 - u) + normal_quantile(u)) <= 1e-9);
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(std::nan("")), std::domain_error);
  }

  TEST_CASE("normal_quantile against a series-CDF bisection oracle") {
    // The series is accurate in the central range; tails are checked in the acceptance suite.
    double worst = 0.0;
    for (int k = 1; k < 400; ++k) {
      const double u = 0.001 + 0.998 * k / 400.0;
      worst = std::max(worst, std::abs(normal_quantile(u) - bisection_quantile(u)));
    }
    CHECK(worst <= 1e-9);
  }

  TEST_CASE("normal_cdf inverts normal_quantile") {
    for (double u : {1e-8, 0.001, 0.3, 0.5, 0.9, 0.999999})
      CHECK(normal_cdf(normal_quantile(u)) == doctest::Approx(u).epsilon(1e-12));
  }

  TEST_CASE("npn_transform on a three-point column") {
    Matrix x(3, 2);
    x << 5, 1, 1, 2, 9, 3;
    const Matrix t = npn_transform(Dataset(x)).values();
    CHECK(t(0, 0) == doctest::Approx(0.0));
    CHECK(t(1, 0) == doctest::Approx(-0.9674216).epsilon(1e-6));
    CHECK(t(2, 0) == doctest::Approx(0.9674216).epsilon(1e-6));
    CHECK(t(1, 0) == doctest::Approx(normal_quantile(1.0 / 6.0)));
  }

  TEST_CASE("npn_transform is invariant under increasing maps") {
    RngStream rng(3, 1);
    const Matrix x = testing::normal_matrix(rng, 100, 3);
    const Matrix base = npn_transform(Dataset(x)).values();
    const Matrix y = x.array().exp();
    const Matrix z = x.array().cube() * 2.0 + 7.0;
    CHECK(npn_transform(Dataset(y)).values() == base);
    CHECK(npn_transform(Dataset(z)).values() == base);
  }

  TEST_CASE("npn_transform preserves order and centers columns") {
    RngStream rng(3, 2);
    const Matrix x = testing::normal_matrix(rng, 50, 2);
    const Matrix t = npn_transform(Dataset(x)).values();
    for (Index i = 0; i < 50; ++i)
      for (Index k = 0; k < 50; ++k)
        if (x(i, 0) < x(k, 0)) CHECK(t(i, 0) < t(k, 0));
    CHECK(std::abs(t.col(1).mean()) <= 1e-12);
  }

  TEST_CASE("npn_transform uses midranks for ties") {
    Matrix x(4, 2);
    x << 1, 0, 2, 1, 2, 2, 3, 3;
    const Matrix t = npn_transform(Dataset(x)).values();
    CHECK(t(1, 0) == t(2, 0));
    const auto r = midranks(x.col(0));
    CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  }

  TEST_CASE("npn_transform names a constant column") {
    Matrix x(4, 2);
    x << 1, 3, 2, 3, 3, 3, 4, 3;
    try {
      npn_transform(Dataset(x, {"alpha", "beta"}));
      FAIL("expected an error");
    } catch (const DropError& e) {
      CHECK(std::string(e.what()).find("beta") != std::string::npos);
    }
  }

  TEST_CASE("Kendall tau: direct, merge and brute force agree") {
    RngStream rng(4, 1);
    for (int trial = 0; trial < 20; ++trial) {
      const Index n = 5 + static_cast<Index>(rng.below(200));
      Vector x(n), y(n);
      for (Index i = 0; i < n; ++i) {
        // Coarse values force ties.
        x[i] = std::round(rng.normal() * 3.0);
        y[i] = std::round(0.5 * x[i] + rng.normal() * 2.0);
      }
      const double b = brute_kendall(x, y);
      CHECK(kendall_tau_direct(x, y) == doctest::Approx(b).epsilon(1e-12));
      CHECK(kendall_tau_merge(x, y) == doctest::Approx(b).epsilon(1e-12));
    }
  }

  TEST_CASE("skeptic entries are sine transforms of rank correlations") {
    RngStream rng(4, 2);
    const Matrix x = testing::normal_matrix(rng, 60, 3);
    const Dataset d(x);
    const auto k = kendall_skeptic(d);
    const auto s = spearman_skeptic(d);
    CHECK(k.entries(0, 1) == doctest::Approx(std::sin(std::numbers::pi * brute_kendall(x.col(0), x.col(1)) / 2.0)));
    CHECK(s.entries(0, 2) ==
          doctest::Approx(2.0 * std::sin(std::numbers::pi * spearman_rho(x.col(0), x.col(2)) / 6.0)));
    for (const Matrix* m : {&k.entries, &s.entries}) {
      CHECK(is_symmetric(*m, 0.0));
      for (Index i = 0; i < 3; ++i) CHECK((*m)(i, i) == 1.0);
      CHECK(m->cwiseAbs().maxCoeff() <= 1.0);
    }
  }

  TEST_CASE("skeptic extremes") {
    Matrix x(6, 2);
    x << 1, 10, 2, 20, 3, 30, 4, 40, 5, 50, 6, 60;
    CHECK(kendall_skeptic(Dataset(x)).entries(0, 1) == doctest::Approx(1.0));
    CHECK(spearman_skeptic(Dataset(x)).entries(0, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("skeptic near zero for independent columns") {
    RngStream rng(4, 3);
    const Index n = 4000;
    const Matrix x = testing::normal_matrix(rng, n, 2);
    CHECK(std::abs(kendall_skeptic(Dataset(x)).entries(0, 1)) <= 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(spearman_skeptic(Dataset(x)).entries(0, 1)) <= 3.0 / std::sqrt(static_cast<double>(n)));
  }

  TEST_CASE("constant column gives zero entries and a warning") {
    Matrix x(5, 3);
    x << 1, 2, 7, 2, 1, 7, 3, 4, 7, 4, 3, 7, 5, 5, 7;
    const auto k = kendall_skeptic(Dataset(x));
    CHECK(k.warning());
    CHECK(k.constant_columns == std::vector<Index>{2});
    CHECK(k.entries(0, 2) == 0.0);
    CHECK(k.entries(2, 2) == 1.0);
    CHECK(spearman_skeptic(Dataset(x)).warning());
  }

  TEST_CASE("skeptic recovers a latent Gaussian correlation") {
    RngStream rng(10, 2);
    Matrix z(20000, 2);
    for (Index i = 0; i < z.rows(); ++i) {
      const double a = rng.normal(), b = rng.normal();
      z(i, 0) = a;
      z(i, 1) = std::exp(0.5 * a + std::sqrt(0.75) * b);  // monotone distortion of the second margin
    }
    CHECK(std::abs(kendall_skeptic(Dataset(z)).entries(0, 1) - 0.5) <= 0.03);
    CHECK(std::abs(spearman_skeptic(Dataset(z)).entries(0, 1) - 0.5) <= 0.03);
  }
}
