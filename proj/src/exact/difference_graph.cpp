#include "tsnsynth/exact.hpp"

#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>

namespace tsnsynth {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Edge {
  int to;
  std::int64_t cap;
  std::int64_t cost;
};

class FlowGraph {
 public:
  explicit FlowGraph(int n) : adj_(static_cast<std::size_t>(n)) {}

  void add(int from, int to, std::int64_t cap, std::int64_t cost) {
    adj_[static_cast<std::size_t>(from)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, cap, cost});
    adj_[static_cast<std::size_t>(to)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, -cost});
  }

  int size() const { return static_cast<int>(adj_.size()); }

  // Shortest distances from a virtual root joined to every vertex by a zero
  // arc, over residual edges. False on a negative cycle.
  bool potentials(std::vector<std::int64_t>& dist) const {
    const std::size_t n = adj_.size();
    dist.assign(n, 0);
    std::vector<int> relaxed(n, 0);
    std::vector<char> queued(n, 1);
    std::deque<int> q;
    for (std::size_t v = 0; v < n; ++v) q.push_back(static_cast<int>(v));
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      queued[static_cast<std::size_t>(u)] = 0;
      for (int e : adj_[static_cast<std::size_t>(u)]) {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        if (ed.cap <= 0) continue;
        const std::int64_t nd = dist[static_cast<std::size_t>(u)] + ed.cost;
        if (nd < dist[static_cast<std::size_t>(ed.to)]) {
          dist[static_cast<std::size_t>(ed.to)] = nd;
          if (++relaxed[static_cast<std::size_t>(ed.to)] > static_cast<int>(n)) return false;
          if (!queued[static_cast<std::size_t>(ed.to)]) {
            queued[static_cast<std::size_t>(ed.to)] = 1;
            q.push_back(ed.to);
          }
        }
      }
    }
    return true;
  }

  // Successive shortest paths with Dijkstra on reduced costs. Returns the
  // amount sent.
  std::int64_t min_cost_flow(int s, int t, std::int64_t want, std::vector<std::int64_t> pot) {
    const std::size_t n = adj_.size();
    std::int64_t sent = 0;
    std::vector<std::int64_t> dist(n);
    std::vector<int> via(n);
    while (sent < want) {
      dist.assign(n, kInf);
      via.assign(n, -1);
      using Item = std::pair<std::int64_t, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      dist[static_cast<std::size_t>(s)] = 0;
      pq.push({0, s});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        for (int e : adj_[static_cast<std::size_t>(u)]) {
          const Edge& ed = edges_[static_cast<std::size_t>(e)];
          if (ed.cap <= 0) continue;
          const std::int64_t nd = d + ed.cost + pot[static_cast<std::size_t>(u)] - pot[static_cast<std::size_t>(ed.to)];
          if (nd < dist[static_cast<std::size_t>(ed.to)]) {
            dist[static_cast<std::size_t>(ed.to)] = nd;
            via[static_cast<std::size_t>(ed.to)] = e;
            pq.push({nd, ed.to});
          }
        }
      }
      if (dist[static_cast<std::size_t>(t)] >= kInf) break;
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] < kInf) pot[v] += dist[v];
      std::int64_t push = want - sent;
      for (int v = t; v != s;) {
        const int e = via[static_cast<std::size_t>(v)];
        push = std::min(push, edges_[static_cast<std::size_t>(e)].cap);
        v = edges_[static_cast<std::size_t>(e ^ 1)].to;
      }
      for (int v = t; v != s;) {
        const int e = via[static_cast<std::size_t>(v)];
        edges_[static_cast<std::size_t>(e)].cap -= push;
        edges_[static_cast<std::size_t>(e ^ 1)].cap += push;
        v = edges_[static_cast<std::size_t>(e ^ 1)].to;
      }
      sent += push;
    }
    return sent;
  }

 private:
  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
};

}  // namespace

std::optional<std::vector<std::int64_t>> feasible_potentials(int vertices, int anchor, const std::vector<DiffArc>& arcs) {
  FlowGraph g(vertices);
  for (const DiffArc& a : arcs) g.add(a.from, a.to, kInf, -a.length);
  std::vector<std::int64_t> dist;
  if (!g.potentials(dist)) return std::nullopt;
  std::vector<std::int64_t> x(static_cast<std::size_t>(vertices));
  for (int v = 0; v < vertices; ++v) x[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(anchor)] - dist[static_cast<std::size_t>(v)];
  return x;
}

std::optional<LpSolution> solve_difference_lp(const DifferenceLp& lp) {
  const int n = lp.vertices;
  const int s = n, t = n + 1;
  FlowGraph g(n + 2);
  for (const DiffArc& a : lp.arcs) g.add(a.from, a.to, kInf, -a.length);
  std::int64_t want = 0, balance = 0;
  for (int v = 0; v < n; ++v) {
    const std::int64_t w = lp.weight[static_cast<std::size_t>(v)];
    balance += w;
    if (w < 0) g.add(s, v, -w, 0);
    if (w > 0) {
      g.add(v, t, w, 0);
      want += w;
    }
  }
  if (balance != 0) throw std::invalid_argument("difference LP weights must sum to zero");
  std::vector<std::int64_t> pot;
  if (!g.potentials(pot)) return std::nullopt;
  if (g.min_cost_flow(s, t, want, pot) < want) throw std::logic_error("difference LP is unbounded");
  if (!g.potentials(pot)) throw std::logic_error("negative cycle after optimal flow");

  LpSolution out;
  out.x.resize(static_cast<std::size_t>(n));
  const std::int64_t base = pot[static_cast<std::size_t>(lp.anchor)];
  for (int v = 0; v < n; ++v) {
    out.x[static_cast<std::size_t>(v)] = base - pot[static_cast<std::size_t>(v)];
    out.value += lp.weight[static_cast<std::size_t>(v)] * out.x[static_cast<std::size_t>(v)];
  }
  return out;
}

}  // namespace tsnsynth
