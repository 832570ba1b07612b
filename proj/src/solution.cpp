#include "tsnsynth/solution.hpp"

#include <algorithm>

namespace tsnsynth {

Schedule empty_schedule(const SystemModel& model) {
  Schedule s;
  s.task_offsets.assign(model.tasks.size(), kUnscheduled);
  s.copies.assign(model.substreams.size(), CopySchedule{});
  return s;
}

std::optional<Micros> app_latency(const SystemModel& model, const Schedule& schedule, int app) {
  const Application& a = model.apps.at(static_cast<std::size_t>(app));
  if (a.tasks.empty()) return 0;
  Micros first = 0, last = 0;
  bool any = false;
  for (int t : a.tasks) {
    const Micros o = schedule.task_offsets.at(static_cast<std::size_t>(t));
    if (o == kUnscheduled) return std::nullopt;
    const Micros end = o + model.tasks[static_cast<std::size_t>(t)].wcet;
    first = any ? std::min(first, o) : o;
    last = any ? std::max(last, end) : end;
    any = true;
  }
  return last - first;
}

std::int64_t total_latency(const SystemModel& model, const Schedule& schedule) {
  std::int64_t total = 0;
  for (std::size_t a = 0; a < model.apps.size(); ++a)
    if (auto l = app_latency(model, schedule, static_cast<int>(a))) total += *l;
  return total;
}

std::vector<std::string> unplaced_apps(const SystemModel& model, const Schedule& schedule) {
  std::vector<std::string> out;
  for (const Application& a : model.apps) {
    bool bad = std::any_of(a.tasks.begin(), a.tasks.end(),
                           [&](int t) { return schedule.task_offsets[static_cast<std::size_t>(t)] == kUnscheduled; });
    for (int s : a.streams)
      for (int c : model.copies_of(s))
        if (!schedule.copies[static_cast<std::size_t>(c)].scheduled) bad = true;
    if (bad) out.push_back(a.id);
  }
  return out;
}

Micros link_duration(const SystemModel& model, int stream, LinkId link) {
  return transmission_time(model.wire_size(stream), model.network.link(link).speed);
}

std::vector<BlockSpec> block_layout(const SystemModel& model, const RouteTree& tree, int sub) {
  const Network& net = model.network;
  const int stream = model.substreams.at(static_cast<std::size_t>(sub)).stream;
  const bool secure = model.streams[static_cast<std::size_t>(stream)].secure;
  std::vector<BlockSpec> out;
  int gen = -1;
  if (secure) {
    BlockSpec b;
    b.role = BlockRole::MacGen;
    b.es = tree.root;
    b.length = net.node(tree.root).hash_time;
    out.push_back(b);
    gen = 0;
  }
  const int base = static_cast<int>(out.size());
  for (std::size_t i = 0; i < tree.links.size(); ++i) {
    BlockSpec b;
    b.role = BlockRole::Link;
    b.link = tree.links[i];
    b.tree_index = static_cast<int>(i);
    b.length = link_duration(model, stream, tree.links[i]);
    b.prev = tree.parent[i] >= 0 ? base + tree.parent[i] : gen;
    out.push_back(b);
  }
  if (secure) {
    for (std::size_t r = 0; r < tree.receivers.size(); ++r) {
      BlockSpec b;
      b.role = BlockRole::MacVal;
      b.es = tree.receivers[r];
      b.tree_index = static_cast<int>(r);
      b.length = net.node(b.es).hash_time;
      const int into = tree.link_into(net, b.es);
      b.prev = into >= 0 ? base + into : -1;
      out.push_back(b);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].prev >= 0) out[static_cast<std::size_t>(out[i].prev)].next.push_back(static_cast<int>(i));
  return out;
}

}  // namespace tsnsynth
