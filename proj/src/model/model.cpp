#include "tsnsynth/model.hpp"

#include <algorithm>
#include <numeric>

namespace tsnsynth {

Micros transmission_time(std::int64_t bytes, const Rational& speed) {
  if (speed <= 0) throw ModelError("link speed must be positive");
  // ceil(bytes * den / num)
  const std::int64_t num = bytes * speed.denominator();
  const std::int64_t den = speed.numerator();
  return (num + den - 1) / den;
}

NodeId Network::add_node(Node node) {
  if (by_id_.count(node.id)) throw ModelError("duplicate node id " + node.id);
  const auto id = static_cast<NodeId>(nodes_.size());
  by_id_.emplace(node.id, id);
  nodes_.push_back(std::move(node));
  out_.emplace_back();
  return id;
}

LinkId Network::add_link(NodeId src, NodeId dst, Rational speed) {
  if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= nodes_.size() ||
      static_cast<std::size_t>(dst) >= nodes_.size())
    throw ModelError("link endpoint out of range");
  if (find_link(src, dst)) throw ModelError("duplicate link " + nodes_[src].id + "->" + nodes_[dst].id);
  const auto id = static_cast<LinkId>(links_.size());
  links_.push_back({src, dst, speed});
  out_[static_cast<std::size_t>(src)].push_back(id);
  return id;
}

void Network::add_duplex(NodeId a, NodeId b, Rational speed) {
  add_link(a, b, speed);
  add_link(b, a, speed);
}

std::optional<NodeId> Network::find_node(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

NodeId Network::node_id(std::string_view id) const {
  auto n = find_node(id);
  if (!n) throw ModelError("unknown node " + std::string(id));
  return *n;
}

std::optional<LinkId> Network::find_link(NodeId src, NodeId dst) const {
  if (src < 0 || static_cast<std::size_t>(src) >= out_.size()) return std::nullopt;
  for (LinkId l : out_[static_cast<std::size_t>(src)])
    if (links_[static_cast<std::size_t>(l)].dst == dst) return l;
  return std::nullopt;
}

std::size_t Network::switch_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::Switch; }));
}

std::string Network::link_name(LinkId l) const {
  const Link& k = link(l);
  return node(k.src).id + "->" + node(k.dst).id;
}

namespace {
template <class Vec>
std::optional<int> find_by_id(const Vec& v, std::string_view id) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i].id == id) return static_cast<int>(i);
  return std::nullopt;
}
}  // namespace

std::optional<int> SystemModel::find_task(std::string_view id) const { return find_by_id(tasks, id); }
std::optional<int> SystemModel::find_stream(std::string_view id) const { return find_by_id(streams, id); }
std::optional<int> SystemModel::find_app(std::string_view id) const { return find_by_id(apps, id); }
std::optional<int> SystemModel::find_substream(std::string_view id) const { return find_by_id(substreams, id); }

std::int64_t SystemModel::wire_size(int stream) const {
  const Stream& s = streams.at(static_cast<std::size_t>(stream));
  return s.size + constants.header_overhead + (s.secure ? constants.mac_size : 0);
}

std::vector<NodeId> SystemModel::receiver_es(int stream) const {
  std::vector<NodeId> out;
  for (int t : streams.at(static_cast<std::size_t>(stream)).receivers) out.push_back(tasks.at(static_cast<std::size_t>(t)).es);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> SystemModel::copies_of(int stream) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < substreams.size(); ++i)
    if (substreams[i].stream == stream) out.push_back(static_cast<int>(i));
  return out;
}

bool SystemModel::has_security_apps() const {
  return std::any_of(apps.begin(), apps.end(), [](const Application& a) { return a.kind == AppKind::Security; });
}

std::vector<int> SystemModel::normal_apps() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < apps.size(); ++i)
    if (apps[i].kind == AppKind::Normal) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> SystemModel::security_apps() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < apps.size(); ++i)
    if (apps[i].kind == AppKind::Security) out.push_back(static_cast<int>(i));
  return out;
}

std::optional<int> SystemModel::key_verify_task(NodeId source, NodeId es) const {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].role == TaskRole::KeyVerify && tasks[i].key_source == source && tasks[i].es == es)
      return static_cast<int>(i);
  return std::nullopt;
}

std::vector<Micros> SystemModel::periods() const {
  std::vector<Micros> out;
  for (const auto& a : apps)
    if (a.period > 0) out.push_back(a.period);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Micros SystemModel::hyperperiod() const {
  auto p = periods();
  return tsnsynth::hyperperiod(p);
}

Micros hyperperiod(std::span<const Micros> periods) {
  if (periods.empty()) throw ModelError("hyperperiod of an empty period set");
  Micros h = 1;
  for (Micros p : periods) {
    if (p <= 0) throw ModelError("period must be positive");
    h = std::lcm(h, p);
  }
  return h;
}

void materialize_substreams(SystemModel& model) {
  model.substreams.clear();
  for (std::size_t s = 0; s < model.streams.size(); ++s)
    for (int c = 0; c < model.streams[s].rl; ++c)
      model.substreams.push_back({static_cast<int>(s), c, model.streams[s].id + "_" + std::to_string(c)});
}

int communication_depth(const SystemModel& model, int app) {
  const Application& a = model.apps.at(static_cast<std::size_t>(app));
  // Edges between task indices with weight 1 for secure streams, 0 otherwise.
  std::vector<std::tuple<int, int, int>> edges;
  for (const auto& d : a.dependencies) edges.emplace_back(d.from, d.to, 0);
  for (int s : a.streams) {
    const Stream& st = model.streams[static_cast<std::size_t>(s)];
    for (int r : st.receivers) edges.emplace_back(st.sender, r, st.secure ? 1 : 0);
  }
  std::unordered_map<int, int> indeg, depth;
  for (int t : a.tasks) indeg[t] = 0, depth[t] = 0;
  for (auto& [u, v, w] : edges) ++indeg[v];
  std::vector<int> ready;
  for (int t : a.tasks)
    if (indeg[t] == 0) ready.push_back(t);
  std::size_t seen = 0;
  int best = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++seen;
    best = std::max(best, depth[u]);
    for (auto& [x, v, w] : edges) {
      if (x != u) continue;
      depth[v] = std::max(depth[v], depth[u] + w);
      if (--indeg[v] == 0) ready.push_back(v);
    }
  }
  if (seen != a.tasks.size()) throw ModelError("application " + a.id + " is not acyclic");
  return best;
}

SystemModel without_security(SystemModel model) {
  if (model.has_security_apps()) throw ModelError("security toggle must be applied before expansion");
  for (auto& s : model.streams) s.secure = false;
  return model;
}

SystemModel without_redundancy(SystemModel model) {
  for (auto& s : model.streams) s.rl = 1;
  materialize_substreams(model);
  return model;
}

}  // namespace tsnsynth
