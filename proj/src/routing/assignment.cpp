#include "tsnsynth/routing.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace tsnsynth {

RouteAssignment empty_assignment(const SystemModel& model) {
  RouteAssignment a;
  a.pred.assign(model.substreams.size(), std::vector<NodeId>(model.network.nodes().size(), kNoNode));
  return a;
}

void merge_paths(RouteAssignment& assign, int sub, const std::vector<const Path*>& paths) {
  auto& pred = assign.pred.at(static_cast<std::size_t>(sub));
  for (const Path* p : paths) {
    if (p->nodes.empty()) continue;
    pred[static_cast<std::size_t>(p->nodes.front())] = p->nodes.front();
    for (std::size_t j = p->nodes.size() - 1; j > 0; --j) {
      const NodeId n = p->nodes[j];
      if (pred[static_cast<std::size_t>(n)] != kNoNode) break;
      pred[static_cast<std::size_t>(n)] = p->nodes[j - 1];
    }
  }
}

RouteTree route_tree(const SystemModel& model, const RouteAssignment& assign, int sub) {
  const Network& net = model.network;
  const int stream = model.substreams.at(static_cast<std::size_t>(sub)).stream;
  const auto& pred = assign.pred.at(static_cast<std::size_t>(sub));
  RouteTree tree;
  tree.root = model.sender_es(stream);
  tree.receivers = model.receiver_es(stream);

  std::vector<std::vector<LinkId>> children(net.nodes().size());
  for (std::size_t n = 0; n < pred.size(); ++n) {
    const NodeId p = pred[n];
    if (p == kNoNode || p == static_cast<NodeId>(n)) continue;
    if (auto l = net.find_link(p, static_cast<NodeId>(n))) children[static_cast<std::size_t>(p)].push_back(*l);
  }
  std::deque<std::pair<NodeId, int>> queue{{tree.root, -1}};
  std::vector<char> seen(net.nodes().size(), 0);
  seen[static_cast<std::size_t>(tree.root)] = 1;
  while (!queue.empty()) {
    auto [u, via] = queue.front();
    queue.pop_front();
    auto& kids = children[static_cast<std::size_t>(u)];
    std::sort(kids.begin(), kids.end());
    for (LinkId l : kids) {
      const NodeId v = net.link(l).dst;
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      tree.links.push_back(l);
      tree.parent.push_back(via);
      queue.push_back({v, static_cast<int>(tree.links.size()) - 1});
    }
  }
  return tree;
}

int RouteTree::link_into(const Network& net, NodeId n) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (net.link(links[i]).dst == n) return static_cast<int>(i);
  return -1;
}

std::vector<int> RouteTree::path_to(const Network& net, NodeId receiver) const {
  std::vector<int> out;
  for (int i = link_into(net, receiver); i >= 0; i = parent[static_cast<std::size_t>(i)]) out.push_back(i);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<int> RouteTree::children(int link_index) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < parent.size(); ++i)
    if (parent[i] == link_index) out.push_back(static_cast<int>(i));
  return out;
}

std::int64_t route_length(const RouteAssignment& assign) {
  std::int64_t total = 0;
  for (const auto& pred : assign.pred)
    for (std::size_t n = 0; n < pred.size(); ++n)
      if (pred[n] != kNoNode && pred[n] != static_cast<NodeId>(n)) ++total;
  return total;
}

std::int64_t route_overlaps(const SystemModel& model, const RouteAssignment& assign) {
  std::int64_t total = 0;
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    std::map<std::pair<NodeId, NodeId>, int> uses;
    for (std::size_t sub = 0; sub < model.substreams.size(); ++sub) {
      if (model.substreams[sub].stream != static_cast<int>(s)) continue;
      const auto& pred = assign.pred[sub];
      for (std::size_t n = 0; n < pred.size(); ++n)
        if (pred[n] != kNoNode && pred[n] != static_cast<NodeId>(n)) ++uses[{pred[n], static_cast<NodeId>(n)}];
    }
    for (const auto& [link, count] : uses) total += count - 1;
  }
  return total;
}

std::int64_t routing_cost(const SystemModel& model, const RouteAssignment& assign, RoutingMode mode) {
  if (mode == RoutingMode::Strict) return route_length(assign);
  return route_length(assign) + 100 * route_overlaps(model, assign);
}

std::vector<Rational> bandwidth_utilization(const SystemModel& model, const RouteAssignment& assign) {
  const Network& net = model.network;
  std::vector<Rational> util(net.links().size(), Rational(0));
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const Stream& st = model.streams[s];
    if (st.period <= 0) continue;
    std::vector<char> used(net.links().size(), 0);
    for (std::size_t sub = 0; sub < model.substreams.size(); ++sub) {
      if (model.substreams[sub].stream != static_cast<int>(s)) continue;
      const auto& pred = assign.pred[sub];
      for (std::size_t n = 0; n < pred.size(); ++n) {
        if (pred[n] == kNoNode || pred[n] == static_cast<NodeId>(n)) continue;
        if (auto l = net.find_link(pred[n], static_cast<NodeId>(n))) used[static_cast<std::size_t>(*l)] = 1;
      }
    }
    const Rational rate(model.wire_size(static_cast<int>(s)), st.period);
    for (std::size_t l = 0; l < used.size(); ++l)
      if (used[l]) util[l] += rate / net.link(static_cast<LinkId>(l)).speed;
  }
  return util;
}

std::vector<RouteViolation> check_routing_constraints(const SystemModel& model, const RouteAssignment& assign,
                                                      RoutingMode mode) {
  std::vector<RouteViolation> out;
  const Network& net = model.network;
  const std::size_t n_nodes = net.nodes().size();
  if (assign.pred.size() != model.substreams.size()) {
    out.push_back({"R3", "", "assignment does not cover every sub-stream"});
    return out;
  }
  for (std::size_t sub = 0; sub < model.substreams.size(); ++sub) {
    const std::string& sid = model.substreams[sub].id;
    const int stream = model.substreams[sub].stream;
    const auto& pred = assign.pred[sub];
    if (pred.size() != n_nodes) {
      out.push_back({"R3", sid, "predecessor map has the wrong size"});
      continue;
    }
    const NodeId sender = model.sender_es(stream);
    const auto receivers = model.receiver_es(stream);
    auto is_receiver = [&](NodeId n) { return std::binary_search(receivers.begin(), receivers.end(), n); };

    if (pred[static_cast<std::size_t>(sender)] != sender)
      out.push_back({"R3", sid, "sender " + net.node(sender).id + " is not its own predecessor"});
    std::vector<int> child_count(n_nodes, 0);
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const NodeId p = pred[n];
      const NodeId self = static_cast<NodeId>(n);
      const std::string& name = net.node(self).id;
      if (net.is_end_system(self) && self != sender) {
        if (is_receiver(self) && p == kNoNode) out.push_back({"R3", sid, "receiver " + name + " is not reached"});
        if (!is_receiver(self) && p != kNoNode) out.push_back({"R3", sid, "end system " + name + " is not a receiver"});
      }
      if (p == kNoNode || self == sender) continue;
      if (p == self || p < 0 || static_cast<std::size_t>(p) >= n_nodes || !net.find_link(p, self)) {
        out.push_back({"R3", sid, "node " + name + " has no link from its predecessor"});
        continue;
      }
      if (net.is_end_system(p) && p != sender)
        out.push_back({"R4", sid, "end system " + net.node(p).id + " forwards to " + name});
      ++child_count[static_cast<std::size_t>(p)];
      // Walk towards the sender; more than n_nodes steps means a cycle.
      NodeId cur = self;
      std::size_t steps = 0;
      while (cur != sender && cur != kNoNode && steps <= n_nodes) {
        const NodeId nxt = pred[static_cast<std::size_t>(cur)];
        if (nxt == cur) break;
        cur = nxt;
        ++steps;
      }
      if (steps > n_nodes) out.push_back({"R1", sid, "route through " + name + " contains a cycle"});
      else if (cur != sender) out.push_back({"R2", sid, "route through " + name + " does not lead to the sender"});
    }
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const NodeId self = static_cast<NodeId>(n);
      if (net.is_end_system(self) || pred[n] == kNoNode) continue;
      if (child_count[n] == 0) out.push_back({"R2", sid, "switch " + net.node(self).id + " is a loose end"});
    }
  }

  auto util = bandwidth_utilization(model, assign);
  for (std::size_t l = 0; l < util.size(); ++l)
    if (util[l] > 1) out.push_back({"R5", net.link_name(static_cast<LinkId>(l)), "bandwidth exceeded"});

  if (mode == RoutingMode::Strict) {
    for (std::size_t s = 0; s < model.streams.size(); ++s) {
      const auto copies = model.copies_of(static_cast<int>(s));
      const NodeId sender = model.sender_es(static_cast<int>(s));
      for (std::size_t i = 0; i < copies.size(); ++i)
        for (std::size_t j = i + 1; j < copies.size(); ++j) {
          const auto& a = assign.pred[static_cast<std::size_t>(copies[i])];
          const auto& b = assign.pred[static_cast<std::size_t>(copies[j])];
          for (std::size_t n = 0; n < n_nodes; ++n) {
            if (static_cast<NodeId>(n) == sender || a[n] == kNoNode || a[n] != b[n]) continue;
            out.push_back({"R6", model.streams[s].id,
                           model.substreams[static_cast<std::size_t>(copies[i])].id + " and " +
                               model.substreams[static_cast<std::size_t>(copies[j])].id + " share link " +
                               net.node(a[n]).id + "->" + net.node(static_cast<NodeId>(n)).id});
          }
        }
    }
  }
  return out;
}

}  // namespace tsnsynth
