#include "tsnsynth/model.hpp"

#include <set>

namespace tsnsynth {

namespace {

void add(std::vector<Diagnostic>& out, std::string code, std::string message) {
  out.push_back({std::move(code), std::move(message)});
}

template <class Vec>
void check_unique_ids(const Vec& v, const char* what, std::vector<Diagnostic>& out) {
  std::set<std::string> seen;
  for (const auto& x : v)
    if (!seen.insert(x.id).second) add(out, "duplicate-id", std::string(what) + " id " + x.id + " is not unique");
}

bool valid_index(int i, std::size_t n) { return i >= 0 && static_cast<std::size_t>(i) < n; }

}  // namespace

std::vector<Diagnostic> validate_model(const SystemModel& m) {
  std::vector<Diagnostic> out;
  const Network& net = m.network;

  for (const Node& n : net.nodes())
    if (n.kind == NodeKind::EndSystem && n.hash_time <= 0) add(out, "hash-time", "end system " + n.id + " needs hash_time > 0");

  for (std::size_t l = 0; l < net.links().size(); ++l) {
    const Link& k = net.links()[l];
    const std::string name = net.link_name(static_cast<LinkId>(l));
    if (k.src == k.dst) add(out, "self-link", "self link " + name);
    if (k.speed <= 0) add(out, "link-speed", "link " + name + " needs speed > 0");
    auto back = net.find_link(k.dst, k.src);
    if (!back || net.link(*back).speed != k.speed) add(out, "duplex", "link " + name + " has no reverse link of equal speed");
  }

  const GlobalConstants& c = m.constants;
  if (c.header_overhead < 0 || c.mtu < 0 || c.key_size < 0 || c.mac_size < 0 || c.sync_precision < 0)
    add(out, "constants", "global constants must be nonnegative");

  check_unique_ids(m.apps, "application", out);
  check_unique_ids(m.tasks, "task", out);
  check_unique_ids(m.streams, "stream", out);

  for (const Task& t : m.tasks) {
    if (t.es < 0 || static_cast<std::size_t>(t.es) >= net.nodes().size() || !net.is_end_system(t.es)) {
      add(out, "task-es", "task " + t.id + " is not mapped to an end system");
      continue;
    }
    if (t.period > 0 && (t.wcet <= 0 || t.wcet > t.period))
      add(out, "wcet", "task " + t.id + " needs 0 < wcet <= period");
    if (!valid_index(t.app, m.apps.size())) add(out, "task-app", "task " + t.id + " has no application");
  }

  bool any_secure = false;
  for (std::size_t s = 0; s < m.streams.size(); ++s) {
    const Stream& st = m.streams[s];
    any_secure |= st.secure;
    if (st.size > c.mtu) add(out, "mtu", "stream " + st.id + " exceeds the MTU");
    if (st.size <= 0) add(out, "size", "stream " + st.id + " needs a positive size");
    if (st.rl < 1) add(out, "rl", "stream " + st.id + " needs redundancy level >= 1");
    if (st.receivers.empty()) add(out, "receivers", "stream " + st.id + " has no destination");
    if (!valid_index(st.sender, m.tasks.size())) {
      add(out, "endpoint", "stream " + st.id + " has an invalid sender");
      continue;
    }
    const Task& snd = m.tasks[static_cast<std::size_t>(st.sender)];
    if (snd.app != st.app) add(out, "endpoint", "stream " + st.id + " sender is in another application");
    for (int r : st.receivers) {
      if (!valid_index(r, m.tasks.size())) {
        add(out, "endpoint", "stream " + st.id + " has an invalid destination");
        continue;
      }
      const Task& rt = m.tasks[static_cast<std::size_t>(r)];
      if (rt.app != st.app) add(out, "endpoint", "stream " + st.id + " destination " + rt.id + " is in another application");
      if (rt.es == snd.es) add(out, "same-es", "stream " + st.id + " sends to its own end system via " + rt.id);
    }
  }
  if (any_secure && (c.key_size <= 0 || c.mac_size <= 0))
    add(out, "constants", "key and MAC sizes must be positive when secure streams exist");

  std::size_t expected_copies = 0;
  for (const auto& st : m.streams) expected_copies += static_cast<std::size_t>(std::max(st.rl, 0));
  if (m.substreams.size() != expected_copies) add(out, "substreams", "sub-stream list does not match redundancy levels");

  for (std::size_t a = 0; a < m.apps.size(); ++a) {
    const Application& app = m.apps[a];
    if (app.kind == AppKind::Normal && app.period <= 0) add(out, "period", "application " + app.id + " needs a positive period");
    for (int t : app.tasks)
      if (valid_index(t, m.tasks.size()) && m.tasks[static_cast<std::size_t>(t)].period != app.period)
        add(out, "period", "task " + m.tasks[static_cast<std::size_t>(t)].id + " period differs from its application");
    for (int s : app.streams)
      if (valid_index(s, m.streams.size()) && m.streams[static_cast<std::size_t>(s)].period != app.period)
        add(out, "period", "stream " + m.streams[static_cast<std::size_t>(s)].id + " period differs from its application");
    for (const auto& d : app.dependencies)
      if (!valid_index(d.from, m.tasks.size()) || !valid_index(d.to, m.tasks.size()))
        add(out, "dependency", "application " + app.id + " has an invalid dependency");
    try {
      communication_depth(m, static_cast<int>(a));
    } catch (const ModelError&) {
      add(out, "cycle", "application " + app.id + " graph has a cycle");
    } catch (const std::exception&) {
    }
  }
  return out;
}

}  // namespace tsnsynth
