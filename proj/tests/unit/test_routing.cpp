#include "fixtures.hpp"

#include "tsnsynth/rng.hpp"
#include "tsnsynth/routing.hpp"
#include "tsnsynth/toolkit.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <set>

using namespace tsnsynth;

namespace {

// Every simple path src -> dst that never passes through an end system,
// sorted by weight and then by node names.
std::vector<Path> brute_paths(const Network& net, NodeId src, NodeId dst, const std::vector<std::int64_t>& w) {
  std::vector<Path> out;
  Path cur;
  cur.nodes.push_back(src);
  std::vector<char> on(net.nodes().size(), 0);
  on[static_cast<std::size_t>(src)] = 1;
  std::function<void(NodeId)> go = [&](NodeId u) {
    if (u == dst) {
      out.push_back(cur);
      return;
    }
    if (u != src && net.is_end_system(u)) return;
    for (LinkId l : net.out_links(u)) {
      const NodeId v = net.link(l).dst;
      if (on[static_cast<std::size_t>(v)]) continue;
      on[static_cast<std::size_t>(v)] = 1;
      cur.nodes.push_back(v);
      cur.links.push_back(l);
      cur.weight += w.empty() ? 1 : w[static_cast<std::size_t>(l)];
      go(v);
      cur.weight -= w.empty() ? 1 : w[static_cast<std::size_t>(l)];
      cur.links.pop_back();
      cur.nodes.pop_back();
      on[static_cast<std::size_t>(v)] = 0;
    }
  };
  go(src);
  std::sort(out.begin(), out.end(), [&](const Path& a, const Path& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    std::vector<std::string> na, nb;
    for (NodeId n : a.nodes) na.push_back(net.node(n).id);
    for (NodeId n : b.nodes) nb.push_back(net.node(n).id);
    return na < nb;
  });
  return out;
}

// Minimum total link count over choices of one simple path per (copy,
// receiver) whose per-copy union is a tree and whose copies share no link.
std::int64_t brute_strict_cost(const SystemModel& m) {
  const Network& net = m.network;
  std::int64_t total = 0;
  for (std::size_t s = 0; s < m.streams.size(); ++s) {
    const NodeId src = m.sender_es(static_cast<int>(s));
    const auto recv = m.receiver_es(static_cast<int>(s));
    std::vector<std::vector<Path>> cand;
    for (NodeId r : recv) cand.push_back(brute_paths(net, src, r, {}));
    // All trees for one copy.
    std::vector<std::set<LinkId>> trees;
    std::vector<std::size_t> pick(recv.size(), 0);
    std::function<void(std::size_t)> choose = [&](std::size_t i) {
      if (i == recv.size()) {
        std::set<LinkId> links;
        std::vector<int> indeg(net.nodes().size(), 0);
        for (std::size_t r = 0; r < recv.size(); ++r)
          for (LinkId l : cand[r][pick[r]].links) links.insert(l);
        for (LinkId l : links)
          if (++indeg[static_cast<std::size_t>(net.link(l).dst)] > 1) return;
        trees.push_back(links);
        return;
      }
      for (pick[i] = 0; pick[i] < cand[i].size(); ++pick[i]) choose(i + 1);
    };
    choose(0);
    const int rl = m.streams[s].rl;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<std::size_t> sel;
    std::function<void(std::size_t, std::set<LinkId>, std::int64_t)> copies = [&](std::size_t from, std::set<LinkId> used,
                                                                                  std::int64_t cost) {
      if (static_cast<int>(sel.size()) == rl) {
        best = std::min(best, cost);
        return;
      }
      for (std::size_t t = 0; t < trees.size(); ++t) {
        bool clash = false;
        for (LinkId l : trees[t]) clash = clash || used.count(l);
        if (clash) continue;
        auto u2 = used;
        u2.insert(trees[t].begin(), trees[t].end());
        sel.push_back(t);
        copies(t + 1, u2, cost + static_cast<std::int64_t>(trees[t].size()));
        sel.pop_back();
      }
      (void)from;
    };
    copies(0, {}, 0);
    if (best == std::numeric_limits<std::int64_t>::max()) return -1;
    total += best;
  }
  return total;
}

}  // namespace

TEST_CASE("k shortest paths agree with exhaustive enumeration") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const Network net = generate_topology(4, 4, seed, Rational(100));
    Rng rng(seed);
    std::vector<std::int64_t> w(net.links().size());
    for (auto& x : w) x = rng.uniform_int(1, 5);
    const NodeId a = net.node_id("ES1"), b = net.node_id("ES3");
    for (const auto& weights : {std::vector<std::int64_t>{}, w}) {
      const auto all = brute_paths(net, a, b, weights);
      for (int k : {1, 3, 8}) {
        const auto got = k_shortest_paths(net, a, b, k, weights);
        REQUIRE(got.size() == std::min<std::size_t>(static_cast<std::size_t>(k), all.size()));
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].nodes == all[i].nodes);
          CHECK(got[i].weight == all[i].weight);
        }
      }
      const auto every = all_simple_paths(net, a, b);
      if (weights.empty()) {
        REQUIRE(every.size() == all.size());
        for (std::size_t i = 0; i < every.size(); ++i) CHECK(every[i].nodes == all[i].nodes);
      }
    }
  }
}

TEST_CASE("paths never transit an end system") {
  const SystemModel m = fixtures::motivational();
  const auto& net = m.network;
  for (const Path& p : all_simple_paths(net, net.node_id("ES1"), net.node_id("ES4")))
    for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) CHECK_FALSE(net.is_end_system(p.nodes[i]));
}

TEST_CASE("motivational example routes") {
  const SystemModel m = expand_security_model(fixtures::motivational());
  const RouteResult r = optimize_routes_exact(expand_security_model(fixtures::motivational(false)));
  CHECK(r.cost == 8);
  CHECK(r.optimal);
  CHECK(check_routing_constraints(expand_security_model(fixtures::motivational(false)), r.assign, RoutingMode::Strict).empty());

  const RouteResult full = optimize_routes_exact(m);
  CHECK(check_routing_constraints(m, full.assign, RoutingMode::Strict).empty());
  const auto& net = m.network;
  const int s2_0 = *m.find_substream("s2_0"), s2_1 = *m.find_substream("s2_1");
  const NodeId es3 = net.node_id("ES3"), es4 = net.node_id("ES4");
  // Both receivers of a copy hang off the same switch, and the copies use different switches.
  const NodeId via0 = full.assign.pred[static_cast<std::size_t>(s2_0)][static_cast<std::size_t>(es3)];
  const NodeId via1 = full.assign.pred[static_cast<std::size_t>(s2_1)][static_cast<std::size_t>(es3)];
  CHECK(via0 != via1);
  CHECK(full.assign.pred[static_cast<std::size_t>(s2_0)][static_cast<std::size_t>(es4)] == via0);
  CHECK(full.assign.pred[static_cast<std::size_t>(s2_1)][static_cast<std::size_t>(es4)] == via1);
  const int s1 = *m.find_substream("s1_0");
  CHECK(route_tree(m, full.assign, s1).links.size() == 2);
}

TEST_CASE("exact routing matches exhaustive search on small generated cases") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    SystemModel m = generate_case(tiny_spec(seed));
    const std::int64_t want = brute_strict_cost(m);
    if (want < 0) {
      CHECK_THROWS_AS(optimize_routes_exact(m), InfeasibleError);
      continue;
    }
    const RouteResult got = optimize_routes_exact(m);
    CHECK(got.cost == want);
    CHECK(routing_cost(m, got.assign, RoutingMode::Strict) == want);
    CHECK(check_routing_constraints(m, got.assign, RoutingMode::Strict).empty());
    ++compared;
  }
  CHECK(compared >= 15);
}

TEST_CASE("grown copy trees are disjoint trees reaching every receiver") {
  int grown = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Network net = generate_topology(8, 16, seed, speed_from_mbps(100));
    Rng rng(seed);
    std::vector<NodeId> es;
    for (std::size_t v = 0; v < net.nodes().size(); ++v)
      if (net.is_end_system(static_cast<NodeId>(v))) es.push_back(static_cast<NodeId>(v));
    rng.shuffle(es);
    const NodeId sender = es[0];
    std::vector<NodeId> receivers(es.begin() + 1, es.begin() + 1 + static_cast<long>(1 + seed % 9));
    std::sort(receivers.begin(), receivers.end());
    const int copies = 1 + static_cast<int>(seed % 3);
    const auto trees = grow_copy_trees(net, sender, receivers, copies, true);
    REQUIRE(trees.has_value());
    ++grown;
    std::vector<int> users(net.links().size(), 0);
    for (const auto& copy : *trees) {
      REQUIRE(copy.size() == receivers.size());
      std::set<LinkId> tree_links;
      std::vector<NodeId> parent(net.nodes().size(), kNoNode);
      for (std::size_t r = 0; r < receivers.size(); ++r) {
        const Path& p = copy[r];
        CHECK(p.nodes.front() == sender);
        CHECK(p.nodes.back() == receivers[r]);
        for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) CHECK_FALSE(net.is_end_system(p.nodes[i]));
        for (std::size_t i = 0; i < p.links.size(); ++i) {
          CHECK(net.link(p.links[i]).src == p.nodes[i]);
          CHECK(net.link(p.links[i]).dst == p.nodes[i + 1]);
          // One parent per node: the paths of a copy form a tree.
          auto& par = parent[static_cast<std::size_t>(p.nodes[i + 1])];
          CHECK((par == kNoNode || par == p.nodes[i]));
          par = p.nodes[i];
          tree_links.insert(p.links[i]);
        }
      }
      for (LinkId l : tree_links) ++users[static_cast<std::size_t>(l)];
    }
    CHECK(std::all_of(users.begin(), users.end(), [](int u) { return u <= 1; }));
  }
  CHECK(grown == 20);
}

TEST_CASE("route tree order and paths") {
  const SystemModel m = fixtures::motivational();
  const auto& net = m.network;
  RouteAssignment a = empty_assignment(m);
  const auto p3 = k_shortest_paths(net, net.node_id("ES2"), net.node_id("ES3"), 1);
  const auto p4 = k_shortest_paths(net, net.node_id("ES2"), net.node_id("ES4"), 1);
  merge_paths(a, 1, {&p3[0], &p4[0]});
  const RouteTree t = route_tree(m, a, 1);
  REQUIRE(t.links.size() == 3);
  CHECK(t.parent[0] == -1);
  CHECK(t.parent[1] == 0);
  CHECK(t.parent[2] == 0);
  CHECK(t.links[1] < t.links[2]);
  CHECK(t.path_to(net, net.node_id("ES4")).size() == 2);
  CHECK(t.link_into(net, net.node_id("ES1")) == -1);
  CHECK(t.children(0).size() == 2);
}

TEST_CASE("constraint checks flag broken routes") {
  const SystemModel m = fixtures::motivational();
  const auto& net = m.network;
  RouteAssignment a = empty_assignment(m);
  auto codes = [&](RoutingMode mode) {
    std::set<std::string> out;
    for (const auto& v : check_routing_constraints(m, a, mode)) out.insert(v.code);
    return out;
  };
  CHECK(codes(RoutingMode::Strict).count("R3"));

  // Both copies of s2 on the same tree.
  const auto p3 = k_shortest_paths(net, net.node_id("ES2"), net.node_id("ES3"), 1);
  const auto p4 = k_shortest_paths(net, net.node_id("ES2"), net.node_id("ES4"), 1);
  const auto p1 = k_shortest_paths(net, net.node_id("ES1"), net.node_id("ES3"), 1);
  merge_paths(a, 0, {&p1[0]});
  merge_paths(a, 1, {&p3[0], &p4[0]});
  merge_paths(a, 2, {&p3[0], &p4[0]});
  CHECK(codes(RoutingMode::Strict).count("R6"));
  CHECK(route_overlaps(m, a) == 3);
  CHECK(routing_cost(m, a, RoutingMode::Relaxed) == 8 + 100 * 3);

  SUBCASE("cycle") {
    const NodeId sw1 = net.node_id("SW1"), sw2 = net.node_id("SW2");
    a.pred[0][static_cast<std::size_t>(sw1)] = sw2;
    a.pred[0][static_cast<std::size_t>(sw2)] = sw1;
    CHECK(codes(RoutingMode::Relaxed).count("R1"));
  }
  SUBCASE("end system forwarding") {
    a.pred[0][static_cast<std::size_t>(net.node_id("ES3"))] = net.node_id("ES1");
    CHECK_FALSE(codes(RoutingMode::Relaxed).empty());
  }
}

TEST_CASE("bandwidth utilization counts each stream once per link") {
  ModelBuilder b = fixtures::line(Rational(1));  // 1 byte per microsecond
  const int app = b.application("a", 100);
  b.task(app, "x", "A", 1);
  b.task(app, "y", "B", 1);
  b.stream(app, "s", "x", {"y"}, 60, 1);
  SystemModel m = b.build();
  const RouteResult r = optimize_routes_exact(m);
  const auto u = bandwidth_utilization(m, r.assign);
  const LinkId as = *m.network.find_link(0, 2);
  CHECK(u[static_cast<std::size_t>(as)] == Rational(60, 100));
  m.streams[0].size = 150;
  CHECK_THROWS_AS(optimize_routes_exact(m), InfeasibleError);
}
