#include <drop/metrics.hpp>

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace drop;

namespace {

Adjacency from_edges(Index p, std::initializer_list<std::pair<Index, Index>> edges) {
  Adjacency a(p);
  for (const auto& [i, j] : edges) a.set(i, j, true);
  return a;
}

Adjacency random_graph(RngStream& rng, Index p, double prob) {
  Adjacency a(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (rng.bernoulli(prob)) a.set(i, j, true);
  return a;
}

// Planted partition: `groups` blocks of `size` nodes.
Adjacency planted(RngStream& rng, int groups, Index size, double p_in, double p_out) {
  const Index p = groups * size;
  Adjacency a(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (rng.bernoulli(i / size == j / size ? p_in : p_out)) a.set(i, j, true);
  return a;
}

// Modularity straight from the double sum over ordered pairs.
double brute_modularity(const Adjacency& a, const std::vector<int>& g) {
  const double m2 = 2.0 * static_cast<double>(a.edge_count());
  double q = 0.0;
  for (Index i = 0; i < a.p(); ++i)
    for (Index j = 0; j < a.p(); ++j)
      if (g[static_cast<size_t>(i)] == g[static_cast<size_t>(j)])
        q += (a(i, j) ? 1.0 : 0.0) - static_cast<double>(a.degree(i) * a.degree(j)) / m2;
  return q / m2;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("confusion-count examples") {
    const EdgeMetrics m = edge_metrics_from_counts(3, 1, 1, 5);
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.75));
    CHECK(m.f1 == doctest::Approx(0.75));
    CHECK(m.mcc == doctest::Approx(14.0 / 24.0).epsilon(1e-14));
  }

  TEST_CASE("perfect and empty recovery") {
    RngStream rng(1, 1);
    const Adjacency a = random_graph(rng, 20, 0.2);
    const EdgeMetrics m = edge_metrics(a, a);
    CHECK(m.f1 == 1.0);
    CHECK(m.mcc == doctest::Approx(1.0));
    CHECK(m.fp == 0);
    const EdgeMetrics e = edge_metrics(Adjacency(20), a);
    CHECK(e.tp == 0);
    CHECK(e.precision == 0.0);
    CHECK(e.f1 == 0.0);
    CHECK(e.mcc == 0.0);
    const EdgeMetrics none = edge_metrics(Adjacency(20), Adjacency(20));
    CHECK(none.tn == 190);
    CHECK(none.recall == 0.0);
  }

  TEST_CASE("counts match a brute-force pair scan") {
    RngStream rng(1, 2);
    for (int trial = 0; trial < 10; ++trial) {
      const Adjacency h = random_graph(rng, 15, 0.3), s = random_graph(rng, 15, 0.3);
      long long tp = 0, fp = 0, fn = 0, tn = 0;
      for (Index i = 0; i < 15; ++i)
        for (Index j = i + 1; j < 15; ++j) {
          if (h(i, j) && s(i, j)) ++tp;
          else if (h(i, j)) ++fp;
          else if (s(i, j)) ++fn;
          else ++tn;
        }
      const EdgeMetrics m = edge_metrics(h, s);
      CHECK(m.tp == tp);
      CHECK(m.fp == fp);
      CHECK(m.fn == fn);
      CHECK(m.tn == tn);
      // Swapping estimate and truth swaps FP and FN and leaves MCC unchanged.
      const EdgeMetrics r = edge_metrics(s, h);
      CHECK(r.fp == fn);
      CHECK(r.mcc == doctest::Approx(m.mcc));
      CHECK(m.mcc >= -1.0);
      CHECK(m.mcc <= 1.0);
    }
  }

  TEST_CASE("size mismatch is an error") {
    CHECK_THROWS_AS(edge_metrics(Adjacency(3), Adjacency(4)), DropError);
  }

  TEST_CASE("modularity of small graphs") {
    const Adjacency tri = from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(std::abs(modularity(tri, {{0, 0, 0}})) <= 1e-12);
    const Adjacency two = from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    CHECK(modularity(two, {{0, 0, 0, 1, 1, 1}}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(modularity(Adjacency(4), {{0, 0, 1, 1}}), DropError);
  }

  TEST_CASE("modularity matches the double sum and stays in bounds") {
    RngStream rng(2, 1);
    for (int trial = 0; trial < 20; ++trial) {
      const Adjacency a = random_graph(rng, 12, 0.3);
      if (a.edge_count() == 0) continue;
      std::vector<int> g(12);
      for (auto& x : g) x = static_cast<int>(rng.below(4));
      const double q = modularity(a, {g});
      CHECK(q == doctest::Approx(brute_modularity(a, g)).epsilon(1e-12));
      CHECK(q >= -1.0);
      CHECK(q <= 1.0);
    }
  }

  TEST_CASE("Louvain splits two cliques joined by one edge") {
    Adjacency a(10);
    for (Index i = 0; i < 5; ++i)
      for (Index j = i + 1; j < 5; ++j) {
        a.set(i, j, true);
        a.set(i + 5, j + 5, true);
      }
    a.set(4, 5, true);
    RngStream rng(3, 1);
    const auto c = louvain(a, rng);
    CHECK(c.community_count() == 2);
    for (Index i = 0; i < 5; ++i) {
      CHECK(c.labels[static_cast<size_t>(i)] == 0);
      CHECK(c.labels[static_cast<size_t>(i + 5)] == 1);
    }
  }

  TEST_CASE("Louvain on a single edge") {
    RngStream rng(3, 2);
    const auto c = louvain(from_edges(4, {{1, 2}}), rng);
    CHECK(c.labels[1] == c.labels[2]);
    CHECK(c.labels[0] != c.labels[3]);
  }

  TEST_CASE("Louvain recovers a planted partition and never loses modularity") {
    RngStream rng(4, 1);
    const Adjacency a = planted(rng, 3, 20, 0.5, 0.02);
    const LouvainResult r = louvain_detailed(a, rng);
    std::set<int> block_labels[3];
    for (Index i = 0; i < 60; ++i) block_labels[i / 20].insert(r.assignment.labels[static_cast<size_t>(i)]);
    for (const auto& s : block_labels) CHECK(s.size() == 1);
    CHECK(r.assignment.community_count() == 3);

    std::vector<int> singles(60);
    for (int i = 0; i < 60; ++i) singles[static_cast<size_t>(i)] = i;
    double prev = modularity(a, {singles});
    for (const double q : r.level_modularity) {
      CHECK(q >= prev - 1e-12);
      prev = q;
    }
    CHECK(modularity(a, r.assignment) == doctest::Approx(r.level_modularity.back()));
  }

  TEST_CASE("Louvain is deterministic and labels are renumbered") {
    RngStream g(5, 1);
    const Adjacency a = planted(g, 4, 10, 0.6, 0.05);
    RngStream r1(5, 2), r2(5, 2);
    LouvainOptions opts;
    opts.shuffle = true;
    const auto c1 = louvain(a, r1, opts), c2 = louvain(a, r2, opts);
    CHECK(c1.labels == c2.labels);
    CHECK(c1.labels[0] == 0);
    int seen = -1;
    for (const int l : c1.labels) {
      CHECK(l <= seen + 1);
      seen = std::max(seen, l);
    }
  }

  TEST_CASE("type-7 quantiles") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 4.0);
    CHECK(quantile_sorted(v, 0.5) == 2.5);
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted({7.0}, 0.75) == 7.0);
  }

  TEST_CASE("degree by group on a star") {
    Adjacency star(5);
    for (Index j = 1; j < 5; ++j) star.set(0, j, true);
    const auto s = degree_by_group(star, {0, 1, 1, 1, 1});
    REQUIRE(s.size() == 2);
    CHECK(s[0].size == 1);
    CHECK(s[0].mean == 4.0);
    CHECK(s[1].mean == 1.0);
    CHECK(s[1].median == 1.0);
    const auto e = degree_by_group(Adjacency(3), {2, 2, 5});
    REQUIRE(e.size() == 2);
    CHECK(e[0].group == 2);
    CHECK(e[1].mean == 0.0);
  }

  TEST_CASE("degree by group against a brute-force computation") {
    RngStream rng(6, 1);
    const Adjacency a = random_graph(rng, 30, 0.2);
    std::vector<int> g(30);
    for (auto& x : g) x = static_cast<int>(rng.below(3));
    const auto s = degree_by_group(a, g);
    for (const auto& row : s) {
      std::vector<double> d;
      for (Index i = 0; i < 30; ++i)
        if (g[static_cast<size_t>(i)] == row.group) d.push_back(static_cast<double>(a.degree(i)));
      std::sort(d.begin(), d.end());
      double sum = 0.0;
      for (double x : d) sum += x;
      CHECK(row.size == static_cast<Index>(d.size()));
      CHECK(row.mean == doctest::Approx(sum / static_cast<double>(d.size())));
      CHECK(row.q1 == doctest::Approx(quantile_sorted(d, 0.25)));
      CHECK(row.q3 == doctest::Approx(quantile_sorted(d, 0.75)));
    }
  }
}
