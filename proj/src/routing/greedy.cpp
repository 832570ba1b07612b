#include "tsnsynth/routing.hpp"

#include <algorithm>
#include <queue>

namespace tsnsynth {

namespace {

constexpr int kRounds = 64;

struct Grower {
  const Network& net;
  NodeId sender;
  const std::vector<NodeId>& receivers;

  // One copy's tree: Dijkstra from the tree to each receiver in turn. A fresh
  // sender port costs extra so a copy prefers to branch inside the fabric.
  std::vector<NodeId> grow(const std::vector<double>& price) const {
    const std::size_t n = net.nodes().size();
    std::vector<NodeId> pred(n, kNoNode);
    pred[static_cast<std::size_t>(sender)] = sender;
    bool empty = true;
    for (NodeId target : receivers) {
      if (pred[static_cast<std::size_t>(target)] != kNoNode) continue;
      std::vector<double> dist(n, -1);
      std::vector<LinkId> via(n, -1);
      using Item = std::pair<double, NodeId>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      for (std::size_t v = 0; v < n; ++v) {
        if (pred[v] == kNoNode) continue;
        const auto node = static_cast<NodeId>(v);
        if (node != sender && net.is_end_system(node)) continue;
        const double d = node == sender && !empty ? 2.0 : 0.0;
        dist[v] = d;
        pq.push({d, node});
      }
      std::vector<char> done(n, 0);
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        if (u == target) break;
        if (u != sender && net.is_end_system(u)) continue;
        for (LinkId l : net.out_links(u)) {
          const NodeId v = net.link(l).dst;
          if (pred[static_cast<std::size_t>(v)] != kNoNode) continue;
          if (v != target && net.is_end_system(v)) continue;
          const double nd = d + price[static_cast<std::size_t>(l)];
          auto& dv = dist[static_cast<std::size_t>(v)];
          if (dv < 0 || nd < dv) {
            dv = nd;
            via[static_cast<std::size_t>(v)] = l;
            pq.push({nd, v});
          }
        }
      }
      if (!done[static_cast<std::size_t>(target)]) return {};
      for (NodeId v = target; pred[static_cast<std::size_t>(v)] == kNoNode;) {
        const LinkId l = via[static_cast<std::size_t>(v)];
        pred[static_cast<std::size_t>(v)] = net.link(l).src;
        v = net.link(l).src;
      }
      empty = false;
    }
    return pred;
  }

  template <class F>
  void each_link(const std::vector<NodeId>& pred, F&& f) const {
    for (std::size_t v = 0; v < pred.size(); ++v)
      if (pred[v] != kNoNode && pred[v] != static_cast<NodeId>(v)) f(*net.find_link(pred[v], static_cast<NodeId>(v)));
  }

  Path path_to(const std::vector<NodeId>& pred, NodeId target) const {
    Path p;
    for (NodeId v = target; v != sender; v = pred[static_cast<std::size_t>(v)]) {
      p.nodes.push_back(v);
      p.links.push_back(*net.find_link(pred[static_cast<std::size_t>(v)], v));
    }
    p.nodes.push_back(sender);
    std::reverse(p.nodes.begin(), p.nodes.end());
    std::reverse(p.links.begin(), p.links.end());
    p.weight = static_cast<std::int64_t>(p.links.size());
    return p;
  }
};

}  // namespace

std::optional<std::vector<std::vector<Path>>> grow_copy_trees(const Network& net, NodeId sender,
                                                              const std::vector<NodeId>& receivers, int copies,
                                                              bool disjoint) {
  const std::size_t m = net.links().size();
  Grower g{net, sender, receivers};
  std::vector<std::vector<NodeId>> trees(static_cast<std::size_t>(copies));
  std::vector<int> users(m, 0);
  std::vector<double> history(m, 0.0);
  double pressure = 0.5;
  const int rounds = disjoint && copies > 1 ? kRounds : 1;
  for (int round = 0; round < rounds; ++round) {
    // Rip up and reroute every copy against the others' current links.
    for (auto& tree : trees) {
      g.each_link(tree, [&](LinkId l) { --users[static_cast<std::size_t>(l)]; });
      std::vector<double> price(m);
      for (std::size_t l = 0; l < m; ++l)
        price[l] = (1.0 + history[l]) * (1.0 + (disjoint ? pressure * users[l] : 0.0));
      tree = g.grow(price);
      if (tree.empty()) return std::nullopt;
      g.each_link(tree, [&](LinkId l) { ++users[static_cast<std::size_t>(l)]; });
    }
    bool shared = false;
    for (std::size_t l = 0; l < m; ++l)
      if (users[l] > 1) shared = true, history[l] += 1.0;
    if (!shared) break;
    if (round + 1 == rounds) return std::nullopt;
    pressure *= 1.5;
  }
  std::vector<std::vector<Path>> out;
  for (const auto& tree : trees) {
    out.emplace_back();
    for (NodeId r : receivers) out.back().push_back(g.path_to(tree, r));
  }
  return out;
}

}  // namespace tsnsynth
