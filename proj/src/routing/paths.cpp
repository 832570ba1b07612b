#include "tsnsynth/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

namespace tsnsynth {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct PathOrder {
  const Network* net;
  bool operator()(const Path& a, const Path& b) const {
    if (a.weight != b.weight) return a.weight < b.weight;
    return std::lexicographical_compare(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
                                        [this](NodeId x, NodeId y) { return net->node(x).id < net->node(y).id; });
  }
};

class Restricted {
 public:
  Restricted(const Network& net, const std::vector<std::int64_t>& weights, NodeId src, NodeId dst)
      : net_(net), weights_(weights), src_(src), dst_(dst), banned_node_(net.nodes().size(), 0),
        banned_link_(net.links().size(), 0) {}

  std::int64_t weight(LinkId l) const { return weights_.empty() ? 1 : weights_[static_cast<std::size_t>(l)]; }
  void ban_node(NodeId n) { banned_node_[static_cast<std::size_t>(n)] = 1; }
  void ban_link(LinkId l) { banned_link_[static_cast<std::size_t>(l)] = 1; }
  void reset() {
    std::fill(banned_node_.begin(), banned_node_.end(), 0);
    std::fill(banned_link_.begin(), banned_link_.end(), 0);
  }

  bool usable(LinkId l) const {
    const Link& k = net_.link(l);
    if (banned_link_[static_cast<std::size_t>(l)] || banned_node_[static_cast<std::size_t>(k.src)] ||
        banned_node_[static_cast<std::size_t>(k.dst)])
      return false;
    if (k.src != src_ && net_.is_end_system(k.src)) return false;
    if (k.dst != dst_ && net_.is_end_system(k.dst)) return false;
    return true;
  }

  /// Lexicographically smallest shortest path start -> dst, if any.
  std::optional<Path> shortest(NodeId start) const {
    const std::size_t n = net_.nodes().size();
    std::vector<std::int64_t> dist(n, kInf);
    std::vector<std::vector<LinkId>> in(n);
    for (std::size_t l = 0; l < net_.links().size(); ++l)
      in[static_cast<std::size_t>(net_.link(static_cast<LinkId>(l)).dst)].push_back(static_cast<LinkId>(l));
    using Item = std::pair<std::int64_t, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[static_cast<std::size_t>(dst_)] = 0;
    pq.push({0, dst_});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d != dist[static_cast<std::size_t>(v)]) continue;
      for (LinkId l : in[static_cast<std::size_t>(v)]) {
        if (!usable(l)) continue;
        const NodeId u = net_.link(l).src;
        const std::int64_t nd = d + weight(l);
        if (nd < dist[static_cast<std::size_t>(u)]) {
          dist[static_cast<std::size_t>(u)] = nd;
          pq.push({nd, u});
        }
      }
    }
    if (dist[static_cast<std::size_t>(start)] >= kInf) return std::nullopt;
    Path p;
    p.nodes.push_back(start);
    p.weight = dist[static_cast<std::size_t>(start)];
    NodeId u = start;
    while (u != dst_) {
      LinkId best = -1;
      for (LinkId l : net_.out_links(u)) {
        if (!usable(l)) continue;
        const NodeId v = net_.link(l).dst;
        if (dist[static_cast<std::size_t>(v)] >= kInf ||
            weight(l) + dist[static_cast<std::size_t>(v)] != dist[static_cast<std::size_t>(u)])
          continue;
        if (best < 0 || net_.node(v).id < net_.node(net_.link(best).dst).id) best = l;
      }
      p.links.push_back(best);
      u = net_.link(best).dst;
      p.nodes.push_back(u);
    }
    return p;
  }

 private:
  const Network& net_;
  const std::vector<std::int64_t>& weights_;
  NodeId src_;
  NodeId dst_;
  std::vector<char> banned_node_;
  std::vector<char> banned_link_;
};

void check_endpoints(const Network& net, NodeId src, NodeId dst) {
  const auto n = static_cast<NodeId>(net.nodes().size());
  if (src < 0 || dst < 0 || src >= n || dst >= n) throw std::invalid_argument("path endpoint out of range");
  if (src == dst) throw std::invalid_argument("path source equals destination");
}

}  // namespace

std::vector<Path> k_shortest_paths(const Network& net, NodeId src, NodeId dst, int k,
                                   const std::vector<std::int64_t>& weights) {
  check_endpoints(net, src, dst);
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!weights.empty() && weights.size() != net.links().size()) throw std::invalid_argument("weight vector size mismatch");
  for (auto w : weights)
    if (w <= 0) throw std::invalid_argument("link weights must be positive");

  PathOrder order{&net};
  Restricted g(net, weights, src, dst);
  std::vector<Path> found;
  auto first = g.shortest(src);
  if (!first) return found;
  found.push_back(*first);
  std::set<Path, PathOrder> candidates(order);

  while (static_cast<int>(found.size()) < k) {
    const Path& prev = found.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      g.reset();
      const NodeId spur = prev.nodes[i];
      for (const Path& p : found)
        if (p.nodes.size() > i && std::equal(prev.nodes.begin(), prev.nodes.begin() + static_cast<long>(i) + 1, p.nodes.begin()))
          g.ban_link(p.links[i]);
      for (std::size_t j = 0; j < i; ++j) g.ban_node(prev.nodes[j]);
      auto tail = g.shortest(spur);
      if (!tail) continue;
      Path total;
      total.nodes.assign(prev.nodes.begin(), prev.nodes.begin() + static_cast<long>(i));
      total.links.assign(prev.links.begin(), prev.links.begin() + static_cast<long>(i));
      total.weight = 0;
      for (LinkId l : total.links) total.weight += g.weight(l);
      total.nodes.insert(total.nodes.end(), tail->nodes.begin(), tail->nodes.end());
      total.links.insert(total.links.end(), tail->links.begin(), tail->links.end());
      total.weight += tail->weight;
      candidates.insert(std::move(total));
    }
    // Drop candidates already selected (identical node sequences).
    while (!candidates.empty() &&
           std::any_of(found.begin(), found.end(), [&](const Path& p) { return p.nodes == candidates.begin()->nodes; }))
      candidates.erase(candidates.begin());
    if (candidates.empty()) break;
    found.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return found;
}

std::vector<Path> all_simple_paths(const Network& net, NodeId src, NodeId dst) {
  check_endpoints(net, src, dst);
  std::vector<Path> out;
  std::vector<char> on_path(net.nodes().size(), 0);
  Path cur;
  cur.nodes.push_back(src);
  on_path[static_cast<std::size_t>(src)] = 1;
  auto dfs = [&](auto&& self, NodeId u) -> void {
    for (LinkId l : net.out_links(u)) {
      const NodeId v = net.link(l).dst;
      if (on_path[static_cast<std::size_t>(v)]) continue;
      if (v != dst && net.is_end_system(v)) continue;
      cur.nodes.push_back(v);
      cur.links.push_back(l);
      if (v == dst) {
        cur.weight = static_cast<std::int64_t>(cur.links.size());
        out.push_back(cur);
      } else {
        on_path[static_cast<std::size_t>(v)] = 1;
        self(self, v);
        on_path[static_cast<std::size_t>(v)] = 0;
      }
      cur.nodes.pop_back();
      cur.links.pop_back();
    }
  };
  dfs(dfs, src);
  std::sort(out.begin(), out.end(), PathOrder{&net});
  return out;
}

}  // namespace tsnsynth
