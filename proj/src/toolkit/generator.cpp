#include "tsnsynth/rng.hpp"
#include "tsnsynth/toolkit.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/one_bit_color_map.hpp>
#include <boost/graph/stoer_wagner_min_cut.hpp>
#include <boost/property_map/property_map.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace tsnsynth {

void validate_spec(const TestCaseSpec& s) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("test-case spec: " + what); };
  if (s.n_es < 1 || s.n_sw < 1) fail("node counts must be at least 1");
  if (s.tasks < 1 || s.layers < 1) fail("tasks and layers must be at least 1");
  if (!(s.edge_prob >= 0 && s.edge_prob <= 1) || !(s.secure_prob >= 0 && s.secure_prob <= 1)) fail("probabilities must lie in [0, 1]");
  if (!(s.wcet_cap > 0 && s.wcet_cap <= 1)) fail("wcet_cap must lie in (0, 1]");
  if (s.min_size < 1 || s.min_size > s.max_size || s.max_size > s.constants.mtu) fail("stream size range must lie within 1..MTU");
  if (s.rl_min < 1 || s.rl_min > s.rl_max) fail("bad redundancy range");
  if (s.periods.empty() || std::any_of(s.periods.begin(), s.periods.end(), [](Micros p) { return p <= 0; })) fail("bad period set");
  if (s.link_mbps <= 0 || s.hash_time <= 0) fail("link speed and hash time must be positive");
  if (s.max_apps < 0) fail("max_apps must be non-negative");
}

namespace {

double dist2(const Node& a, const Node& b) { return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y); }

// Nearest first, ties by index.
std::vector<int> by_distance(const std::vector<Node>& nodes, const Node& from, int first, int count, int skip) {
  std::vector<int> idx;
  for (int i = first; i < first + count; ++i)
    if (i != skip) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return dist2(nodes[static_cast<std::size_t>(a)], from) < dist2(nodes[static_cast<std::size_t>(b)], from);
  });
  return idx;
}

int find(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
  return x;
}

// Global minimum edge cut of the switch fabric: its weight and one side.
std::pair<int, std::vector<bool>> fabric_min_cut(const Network& net, int n_sw) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, boost::no_property,
                                      boost::property<boost::edge_weight_t, int>>;
  Graph g(static_cast<std::size_t>(n_sw));
  for (const Link& l : net.links())
    if (l.src < l.dst && l.dst < n_sw) boost::add_edge(static_cast<std::size_t>(l.src), static_cast<std::size_t>(l.dst), 1, g);
  auto parity = boost::make_one_bit_color_map(boost::num_vertices(g), boost::get(boost::vertex_index, g));
  const int w = boost::stoer_wagner_min_cut(g, boost::get(boost::edge_weight, g), boost::parity_map(parity));
  std::vector<bool> side(static_cast<std::size_t>(n_sw));
  for (int v = 0; v < n_sw; ++v) side[static_cast<std::size_t>(v)] = boost::get(parity, static_cast<std::size_t>(v));
  return {w, side};
}

}  // namespace

Network generate_topology(int n_sw, int n_es, std::uint64_t seed, Rational speed, Micros hash_time) {
  if (n_sw < 1 || n_es < 1) throw std::invalid_argument("topology needs at least one switch and one end system");
  Rng rng(seed);
  Network net;
  // Coordinates on a 0.1 grid keep the layout exactly reproducible in text form.
  auto coord = [&] { return static_cast<double>(rng.uniform_int(0, 1000)) / 10.0; };
  for (int i = 0; i < n_sw; ++i) {
    const double x = coord(), y = coord();
    net.add_node({"SW" + std::to_string(i + 1), NodeKind::Switch, 0, x, y});
  }
  for (int i = 0; i < n_es; ++i) {
    const double x = coord(), y = coord();
    net.add_node({"ES" + std::to_string(i + 1), NodeKind::EndSystem, hash_time, x, y});
  }
  const auto& nodes = net.nodes();
  const int cap = std::min(4, n_sw - 1);
  std::vector<int> degree(static_cast<std::size_t>(n_sw), 0);
  std::vector<int> parent(static_cast<std::size_t>(n_sw));
  std::iota(parent.begin(), parent.end(), 0);
  auto join = [&](int a, int b) {
    net.add_duplex(a, b, speed);
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
    parent[static_cast<std::size_t>(find(parent, a))] = find(parent, b);
  };
  for (int i = 0; i < n_sw; ++i)
    for (int j : by_distance(nodes, nodes[static_cast<std::size_t>(i)], 0, n_sw, i)) {
      if (degree[static_cast<std::size_t>(i)] >= cap) break;
      if (!net.find_link(i, j)) join(i, j);
    }
  // Bridge components, then thicken thin cuts so three disjoint copies can
  // cross the fabric: the closest missing link across the current minimum cut.
  const int target = std::min(3, n_sw - 1);
  for (;;) {
    std::vector<bool> side(static_cast<std::size_t>(n_sw), false);
    bool split = false;
    for (int v = 0; v < n_sw; ++v) side[static_cast<std::size_t>(v)] = find(parent, v) != find(parent, 0), split = split || side[static_cast<std::size_t>(v)];
    if (!split && n_sw > 1) {
      auto [w, cut] = fabric_min_cut(net, n_sw);
      if (w >= target) break;
      side = std::move(cut);
    } else if (!split) {
      break;
    }
    double best = -1;
    int ba = -1, bb = -1;
    for (int a = 0; a < n_sw; ++a)
      for (int b = a + 1; b < n_sw; ++b) {
        if (side[static_cast<std::size_t>(a)] == side[static_cast<std::size_t>(b)] || net.find_link(a, b)) continue;
        const double d = dist2(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]);
        if (best < 0 || d < best) best = d, ba = a, bb = b;
      }
    if (ba < 0) break;
    join(ba, bb);
  }
  const int per_es = std::min(3, n_sw);
  for (int e = 0; e < n_es; ++e) {
    const auto near = by_distance(nodes, nodes[static_cast<std::size_t>(n_sw + e)], 0, n_sw, -1);
    for (int k = 0; k < per_es; ++k) net.add_duplex(n_sw + e, near[static_cast<std::size_t>(k)], speed);
  }
  return net;
}

SystemModel generate_applications(const TestCaseSpec& spec, Network net) {
  validate_spec(spec);
  Rng rng(spec.seed ^ 0x5eedf00dULL);
  SystemModel m;
  m.network = std::move(net);
  m.constants = spec.constants;
  const Network& nw = m.network;

  std::vector<NodeId> es;
  for (std::size_t i = 0; i < nw.nodes().size(); ++i)
    if (nw.is_end_system(static_cast<NodeId>(i))) es.push_back(static_cast<NodeId>(i));
  if (es.empty()) throw std::invalid_argument("network has no end systems");
  rng.shuffle(es);

  // Layer sizes as even as possible, earlier layers take the remainder.
  const int n = spec.tasks;
  std::vector<int> layer(static_cast<std::size_t>(n));
  {
    int i = 0;
    for (int l = 0; l < spec.layers; ++l) {
      const int size = n / spec.layers + (l < n % spec.layers ? 1 : 0);
      for (int k = 0; k < size; ++k) layer[static_cast<std::size_t>(i++)] = l;
    }
  }
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (layer[static_cast<std::size_t>(v)] == layer[static_cast<std::size_t>(u)] + 1 && rng.bernoulli(spec.edge_prob)) {
        succ[static_cast<std::size_t>(u)].push_back(v);
        parent[static_cast<std::size_t>(find(parent, u))] = find(parent, v);
      }

  // One application per component, numbered by smallest member.
  std::vector<int> roots;
  for (int u = 0; u < n; ++u) {
    const int r = find(parent, u);
    if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
  }
  if (spec.max_apps > 0 && static_cast<int>(roots.size()) > spec.max_apps) roots.resize(static_cast<std::size_t>(spec.max_apps));

  auto degree = [&](NodeId e) { return static_cast<int>(nw.out_links(e).size()); };
  std::vector<int> task_of(static_cast<std::size_t>(n), -1);
  for (std::size_t a = 0; a < roots.size(); ++a) {
    Application app;
    app.id = "a" + std::to_string(a + 1);
    app.period = spec.periods[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(spec.periods.size()) - 1))];
    const int ai = static_cast<int>(m.apps.size());
    const Micros cap = std::max<Micros>(1, static_cast<Micros>(std::floor(spec.wcet_cap * static_cast<double>(app.period))));
    for (int u = 0; u < n; ++u) {
      if (find(parent, u) != roots[a]) continue;
      Task t;
      t.id = "t" + std::to_string(u + 1);
      t.app = ai;
      t.es = es[static_cast<std::size_t>(u) % es.size()];
      t.wcet = rng.uniform_int(1, cap);
      t.period = app.period;
      task_of[static_cast<std::size_t>(u)] = static_cast<int>(m.tasks.size());
      app.tasks.push_back(static_cast<int>(m.tasks.size()));
      m.tasks.push_back(t);
    }
    for (int u = 0; u < n; ++u) {
      if (find(parent, u) != roots[a] || succ[static_cast<std::size_t>(u)].empty()) continue;
      const int sender = task_of[static_cast<std::size_t>(u)];
      const NodeId se = m.tasks[static_cast<std::size_t>(sender)].es;
      Stream s;
      s.id = "s" + std::to_string(u + 1);
      s.app = ai;
      s.sender = sender;
      s.period = app.period;
      int max_rl = degree(se);
      for (int v : succ[static_cast<std::size_t>(u)]) {
        const int rt = task_of[static_cast<std::size_t>(v)];
        const NodeId re = m.tasks[static_cast<std::size_t>(rt)].es;
        if (re == se) {
          app.dependencies.push_back({sender, rt});
        } else {
          s.receivers.push_back(rt);
          max_rl = std::min(max_rl, degree(re));
        }
      }
      // Draws happen for every sender so that toggles elsewhere keep the sequence stable.
      s.size = rng.uniform_int(spec.min_size, spec.max_size);
      s.rl = static_cast<int>(rng.uniform_int(spec.rl_min, spec.rl_max));
      s.secure = rng.bernoulli(spec.secure_prob);
      s.rl = std::max(1, std::min(s.rl, max_rl));
      if (s.receivers.empty()) continue;
      app.streams.push_back(static_cast<int>(m.streams.size()));
      m.streams.push_back(s);
    }
    m.apps.push_back(app);
  }
  materialize_substreams(m);
  return m;
}

SystemModel generate_case(const TestCaseSpec& spec) {
  validate_spec(spec);
  Network net = generate_topology(spec.n_sw, spec.n_es, spec.seed, speed_from_mbps(spec.link_mbps), spec.hash_time);
  return generate_applications(spec, std::move(net));
}

TestCaseSpec tiny_spec(std::uint64_t seed) {
  Rng rng(seed * 7919 + 17);
  TestCaseSpec s;
  s.label = "tiny";
  s.seed = seed;
  s.n_es = static_cast<int>(rng.uniform_int(3, 4));
  s.n_sw = static_cast<int>(rng.uniform_int(1, 2));
  s.link_mbps = 100;
  s.tasks = static_cast<int>(rng.uniform_int(3, 5));
  s.layers = 3;
  s.min_size = 20;
  s.max_size = 200;
  s.wcet_cap = 0.1;
  s.rl_max = 2;
  s.periods = {1000, 2000};
  s.max_apps = 3;
  return s;
}

}  // namespace tsnsynth
