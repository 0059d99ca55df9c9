#include <drop/metrics.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>

namespace drop {

EdgeMetrics edge_metrics_from_counts(long long tp, long long fp, long long fn, long long tn) {
  EdgeMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const double dtp = static_cast<double>(tp), dfp = static_cast<double>(fp);
  const double dfn = static_cast<double>(fn), dtn = static_cast<double>(tn);
  m.precision = tp + fp > 0 ? dtp / (dtp + dfp) : 0.0;
  m.recall = tp + fn > 0 ? dtp / (dtp + dfn) : 0.0;
  m.f1 = 2 * tp + fp + fn > 0 ? 2.0 * dtp / (2.0 * dtp + dfp + dfn) : 0.0;
  const double prod = (dtp + dfp) * (dtp + dfn) * (dtn + dfp) * (dtn + dfn);
  m.mcc = prod > 0.0 ? (dtp * dtn - dfp * dfn) / std::sqrt(prod) : 0.0;
  return m;
}

EdgeMetrics edge_metrics(const Adjacency& a_hat, const Adjacency& a_star) {
  if (a_hat.p() != a_star.p()) throw DropError("edge_metrics: adjacency sizes differ");
  long long tp = 0, fp = 0, fn = 0, tn = 0;
  for (Index i = 0; i < a_hat.p(); ++i) {
    for (Index j = i + 1; j < a_hat.p(); ++j) {
      const bool est = a_hat(i, j), truth = a_star(i, j);
      tp += est && truth;
      fp += est && !truth;
      fn += !est && truth;
      tn += !est && !truth;
    }
  }
  return edge_metrics_from_counts(tp, fp, fn, tn);
}

int CommunityAssignment::community_count() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

double modularity(const Adjacency& a, const CommunityAssignment& c) {
  const Index p = a.p();
  if (static_cast<Index>(c.labels.size()) != p) throw DropError("modularity: label count does not match graph size");
  const double two_m = 2.0 * static_cast<double>(a.edge_count());
  if (two_m == 0.0) throw DropError("modularity: graph has no edges");
  std::vector<double> deg(static_cast<size_t>(p));
  for (Index i = 0; i < p; ++i) deg[static_cast<size_t>(i)] = static_cast<double>(a.degree(i));
  // Accumulate per community: within-edge endpoints and degree totals.
  std::map<int, double> within, total;
  for (Index i = 0; i < p; ++i) {
    const int gi = c.labels[static_cast<size_t>(i)];
    total[gi] += deg[static_cast<size_t>(i)];
    for (Index j = 0; j < p; ++j)
      if (a(i, j) && c.labels[static_cast<size_t>(j)] == gi) within[gi] += 1.0;
  }
  double q = 0.0;
  for (const auto& [g, tot] : total) q += within[g] / two_m - (tot / two_m) * (tot / two_m);
  return q;
}

namespace {

struct WeightedGraph {
  // adjacency lists; self-loops stored once with their full (doubled) weight
  std::vector<std::vector<std::pair<int, double>>> nbrs;
  std::vector<double> strength;  // weighted degree, self-loop counted twice
  double two_m = 0.0;

  int size() const { return static_cast<int>(nbrs.size()); }
};

WeightedGraph from_adjacency(const Adjacency& a) {
  WeightedGraph g;
  const int p = static_cast<int>(a.p());
  g.nbrs.resize(static_cast<size_t>(p));
  g.strength.assign(static_cast<size_t>(p), 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && a(i, j)) {
        g.nbrs[static_cast<size_t>(i)].emplace_back(j, 1.0);
        g.strength[static_cast<size_t>(i)] += 1.0;
      }
  g.two_m = std::accumulate(g.strength.begin(), g.strength.end(), 0.0);
  return g;
}

// One local-moving phase; returns true if any node moved.
bool local_moves(const WeightedGraph& g, std::vector<int>& comm, const std::vector<int>& order) {
  const int n = g.size();
  std::vector<double> tot(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) tot[static_cast<size_t>(comm[static_cast<size_t>(i)])] += g.strength[static_cast<size_t>(i)];
  std::vector<double> link(static_cast<size_t>(n), 0.0);
  std::vector<int> touched;
  bool any = false;
  for (;;) {
    bool moved = false;
    for (int i : order) {
      const int own = comm[static_cast<size_t>(i)];
      const double ki = g.strength[static_cast<size_t>(i)];
      touched.clear();
      touched.push_back(own);
      for (auto [j, w] : g.nbrs[static_cast<size_t>(i)]) {
        if (j == i) continue;
        const int cj = comm[static_cast<size_t>(j)];
        if (link[static_cast<size_t>(cj)] == 0.0 && cj != own) touched.push_back(cj);
        link[static_cast<size_t>(cj)] += w;
      }
      tot[static_cast<size_t>(own)] -= ki;
      // Gain of joining c (up to a common positive factor): link_c - tot_c k_i / 2m.
      auto gain = [&](int c) { return link[static_cast<size_t>(c)] - tot[static_cast<size_t>(c)] * ki / g.two_m; };
      int best = own;
      double best_gain = gain(own);
      for (int c : touched) {
        const double gc = gain(c);
        if (gc > best_gain + 1e-12) {
          best = c;
          best_gain = gc;
        }
      }
      tot[static_cast<size_t>(best)] += ki;
      if (best != own) {
        comm[static_cast<size_t>(i)] = best;
        moved = true;
        any = true;
      }
      for (int c : touched) link[static_cast<size_t>(c)] = 0.0;
    }
    if (!moved) break;
  }
  return any;
}

// Renumbers communities 0.. by first appearance; returns the count.
int renumber(std::vector<int>& comm) {
  std::map<int, int> ids;
  for (auto& c : comm) {
    auto it = ids.find(c);
    if (it == ids.end()) it = ids.emplace(c, static_cast<int>(ids.size())).first;
    c = it->second;
  }
  return static_cast<int>(ids.size());
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& comm, int k) {
  std::vector<std::map<int, double>> acc(static_cast<size_t>(k));
  for (int i = 0; i < g.size(); ++i)
    for (auto [j, w] : g.nbrs[static_cast<size_t>(i)])
      acc[static_cast<size_t>(comm[static_cast<size_t>(i)])][comm[static_cast<size_t>(j)]] += w;
  WeightedGraph out;
  out.nbrs.resize(static_cast<size_t>(k));
  out.strength.assign(static_cast<size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    for (auto [d, w] : acc[static_cast<size_t>(c)]) {
      out.nbrs[static_cast<size_t>(c)].emplace_back(d, w);
      out.strength[static_cast<size_t>(c)] += w;
    }
  }
  out.two_m = g.two_m;
  return out;
}

}  // namespace

LouvainResult louvain_detailed(const Adjacency& a, RngStream& rng, const LouvainOptions& opts) {
  if (a.edge_count() == 0) throw DropError("louvain: graph has no edges");
  const int p = static_cast<int>(a.p());
  WeightedGraph g = from_adjacency(a);
  std::vector<int> node_comm(static_cast<size_t>(p));
  std::iota(node_comm.begin(), node_comm.end(), 0);

  LouvainResult res;
  double previous = modularity(a, CommunityAssignment{node_comm});
  for (int level = 0; level < opts.max_levels; ++level) {
    const int n = g.size();
    std::vector<int> comm(static_cast<size_t>(n));
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    if (opts.shuffle) {
      const auto perm = rng.permutation(static_cast<size_t>(n));
      for (int k = 0; k < n; ++k) order[static_cast<size_t>(k)] = static_cast<int>(perm[static_cast<size_t>(k)]);
    }
    if (!local_moves(g, comm, order)) break;
    const int k = renumber(comm);
    for (auto& c : node_comm) c = comm[static_cast<size_t>(c)];
    const double q = modularity(a, CommunityAssignment{node_comm});
    assert(q >= previous - 1e-12);
    previous = q;
    res.level_modularity.push_back(q);
    if (k == n) break;
    g = aggregate(g, comm, k);
  }
  renumber(node_comm);
  res.assignment.labels = std::move(node_comm);
  return res;
}

CommunityAssignment louvain(const Adjacency& a, RngStream& rng, const LouvainOptions& opts) {
  return louvain_detailed(a, rng, opts).assignment;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw DropError("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<GroupDegreeSummary> degree_by_group(const Adjacency& a, const std::vector<int>& groups) {
  if (static_cast<Index>(groups.size()) != a.p()) throw DropError("degree_by_group: label count does not match graph size");
  std::map<int, std::vector<double>> by;
  for (Index i = 0; i < a.p(); ++i) by[groups[static_cast<size_t>(i)]].push_back(static_cast<double>(a.degree(i)));
  std::vector<GroupDegreeSummary> out;
  for (auto& [g, deg] : by) {
    std::sort(deg.begin(), deg.end());
    GroupDegreeSummary s;
    s.group = g;
    s.size = static_cast<Index>(deg.size());
    s.mean = std::accumulate(deg.begin(), deg.end(), 0.0) / static_cast<double>(deg.size());
    s.q1 = quantile_sorted(deg, 0.25);
    s.median = quantile_sorted(deg, 0.5);
    s.q3 = quantile_sorted(deg, 0.75);
    out.push_back(s);
  }
  return out;
}

}  // namespace drop
