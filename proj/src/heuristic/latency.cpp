#include "tsnsynth/heuristic.hpp"

#include <algorithm>
#include <set>

namespace tsnsynth {

namespace {

IntervalSet offsets_fitting(const IntervalSet& free, Micros length) {
  IntervalSet out;
  for (const Interval& iv : free.intervals())
    if (iv.end - length >= iv.begin) out.add(iv.begin, iv.end - length + 1);
  return out;
}

}  // namespace

void AsapScheduler::optimize_latency() {
  std::set<int> done;
  for (std::size_t a = 0; a < model_.apps.size(); ++a) {
    if (app_failed_[a]) continue;
    for (int node : graph_.app_order[a]) {
      const PrecNode& n = graph_.nodes[static_cast<std::size_t>(node)];
      if (n.kind != PrecNode::Kind::Copy) continue;
      const int stream = model_.substreams[static_cast<std::size_t>(n.id)].stream;
      const Stream& st = model_.streams[static_cast<std::size_t>(stream)];
      if (!st.secure || st.key_stream || !done.insert(stream).second) continue;
      const auto copies = model_.copies_of(stream);
      for (std::size_t c = 0; c + 1 < copies.size(); ++c) optimize_latency_for_stream(copies[c], false);
      optimize_latency_for_stream(copies.back(), true);
    }
  }
  // Single-block moves stall when a frame's queue window is pinned by another
  // stream; rigid shifts of whole copies get past that.
  for (std::size_t a = 0; a < model_.apps.size(); ++a)
    if (!app_failed_[a]) compact_app(static_cast<int>(a));
}

void AsapScheduler::compact_app(int app) {
  const Application& a = model_.apps[static_cast<std::size_t>(app)];
  for (int pass = 0; pass < 4; ++pass) {
    Micros end = 0;
    for (int t : a.tasks) {
      if (task_offset_[static_cast<std::size_t>(t)] == kUnscheduled) return;
      end = std::max(end, task_offset_[static_cast<std::size_t>(t)] + model_.tasks[static_cast<std::size_t>(t)].wcet);
    }
    bool changed = false;
    const auto& order = graph_.app_order[static_cast<std::size_t>(app)];
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const PrecNode& n = graph_.nodes[static_cast<std::size_t>(*it)];
      if (n.kind == PrecNode::Kind::Copy) {
        changed = shift_copy_right(n.id) || changed;
      } else if (model_.tasks[static_cast<std::size_t>(n.id)].role != TaskRole::KeyVerify) {
        // Key verifications bound other streams' MAC validations; they stay.
        changed = move_task_right(n.id, end) || changed;
      }
    }
    if (!changed) return;
  }
}

bool AsapScheduler::shift_copy_right(int sub) {
  CopyState& st = copies_[static_cast<std::size_t>(sub)];
  if (!st.placed) return false;
  const Network& net = model_.network;
  const Stream& stream = model_.streams[static_cast<std::size_t>(model_.substreams[static_cast<std::size_t>(sub)].stream)];
  const Micros period = copy_period(sub);

  Micros ub = kNever;
  for (std::size_t i = 0; i < st.blocks.size(); ++i) {
    const BlockSpec& b = st.blocks[i];
    if (b.role == BlockRole::MacVal) continue;
    for (int g : b.next)
      if (st.blocks[static_cast<std::size_t>(g)].role == BlockRole::MacVal)
        ub = std::min(ub, st.offset[static_cast<std::size_t>(g)] - b.length - st.offset[i]);
    if (b.role != BlockRole::Link) continue;
    const NodeId dst = net.link(b.link).dst;
    if (!std::binary_search(st.tree.receivers.begin(), st.tree.receivers.end(), dst)) continue;
    if (stream.secure) {
      ub = std::min(ub, st.phi * p_int_ - 1 - b.length - st.offset[i]);
    } else {
      for (int r : stream.receivers)
        if (model_.tasks[static_cast<std::size_t>(r)].es == dst)
          ub = std::min(ub, task_offset_[static_cast<std::size_t>(r)] - b.length - st.offset[i]);
    }
  }
  if (ub == kNever || ub <= 0) return false;

  std::vector<int> moving;
  for (std::size_t i = 0; i < st.blocks.size(); ++i)
    if (st.blocks[i].role != BlockRole::MacVal) moving.push_back(static_cast<int>(i));
  for (int b : moving) release_copy_block(sub, b);

  // Admissible shifts: every block and every queue window must land on free time.
  IntervalSet shifts(1, ub + 1);
  auto restrict = [&](const IntervalSet& free, Micros from, Micros length) {
    IntervalSet d;
    for (const Interval& iv : free.intervals())
      if (iv.end - length >= iv.begin) d.add(iv.begin - from, iv.end - length + 1 - from);
    shifts = shifts.intersect(d);
  };
  for (int i : moving) {
    const BlockSpec& b = st.blocks[static_cast<std::size_t>(i)];
    const Micros o = st.offset[static_cast<std::size_t>(i)];
    restrict(resources_[static_cast<std::size_t>(resource_of(b))].free(period), o, b.length);
    if (queued(b)) {
      const Micros p = st.offset[static_cast<std::size_t>(b.prev)];
      if (o > p) restrict(queues_[static_cast<std::size_t>(b.link)].free(period), p, o - p);
    }
  }
  const Micros delta = shifts.last_at_or_before(ub).value_or(0);
  if (delta > 0)
    for (int i : moving) st.offset[static_cast<std::size_t>(i)] += delta;
  for (int b : moving) commit_copy_block(sub, b);
  return delta > 0;
}

void AsapScheduler::optimize_latency_for_stream(int sub, bool move_task) {
  CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const int stream = model_.substreams[static_cast<std::size_t>(sub)].stream;
  if (!st.placed || !model_.streams[static_cast<std::size_t>(stream)].secure) return;
  const std::size_t base = st.blocks.front().role == BlockRole::MacGen ? 1 : 0;
  for (std::size_t r = 0; r < st.tree.receivers.size(); ++r) {
    const int into = st.tree.link_into(model_.network, st.tree.receivers[r]);
    if (into < 0) continue;
    int cur = static_cast<int>(base) + into;
    while (cur >= 0) {
      st.offset[static_cast<std::size_t>(cur)] = move_right(sub, cur, kNever);
      cur = st.blocks[static_cast<std::size_t>(cur)].prev;
    }
    if (move_task && r + 1 == st.tree.receivers.size())
      move_task_right(model_.streams[static_cast<std::size_t>(stream)].sender);
  }
}

Micros AsapScheduler::move_right(int sub, int block, Micros ub) {
  CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const BlockSpec& b = st.blocks[static_cast<std::size_t>(block)];
  const Micros period = copy_period(sub);
  const Micros cur = st.offset[static_cast<std::size_t>(block)];
  ub = std::min(ub, period - b.length);
  for (int g : b.next) ub = std::min(ub, st.offset[static_cast<std::size_t>(g)] - b.length);
  if (b.role == BlockRole::Link) {
    const NodeId dst = model_.network.link(b.link).dst;
    if (std::binary_search(st.tree.receivers.begin(), st.tree.receivers.end(), dst))
      ub = std::min(ub, st.phi * p_int_ - 1 - b.length);
  }
  if (ub <= cur) return cur;

  release_copy_block(sub, block);
  if (queued(b)) {
    const Micros p = st.offset[static_cast<std::size_t>(b.prev)];
    auto run = queues_[static_cast<std::size_t>(b.link)].free(period).run_containing(p);
    ub = run ? std::min(ub, run->end) : cur;
  }
  IntervalSet region = offsets_fitting(resources_[static_cast<std::size_t>(resource_of(b))].free(period), b.length);
  region = region.intersect(IntervalSet(cur, std::max(cur, ub) + 1));
  const Micros moved = region.last_at_or_before(ub).value_or(cur);
  st.offset[static_cast<std::size_t>(block)] = moved;
  commit_copy_block(sub, block);
  // Windows of the following switch ports start at this block's offset.
  for (int g : b.next) {
    const BlockSpec& nb = st.blocks[static_cast<std::size_t>(g)];
    if (!queued(nb)) continue;
    queues_[static_cast<std::size_t>(nb.link)].remove_owner(owner(sub, g));
    const Micros o = st.offset[static_cast<std::size_t>(g)];
    queues_[static_cast<std::size_t>(nb.link)].add({moved, o - moved, period, owner(sub, g)});
  }
  return moved;
}

bool AsapScheduler::move_task_right(int task, Micros sink_end) {
  const Task& t = model_.tasks[static_cast<std::size_t>(task)];
  const Micros cur = task_offset_[static_cast<std::size_t>(task)];
  if (cur == kUnscheduled) return false;
  Micros ub = t.period - t.wcet;
  const PrecNode& n = graph_.nodes[static_cast<std::size_t>(graph_.task_node[static_cast<std::size_t>(task)])];
  if (n.succs.empty()) {
    if (sink_end == kNever) return false;
    ub = std::min(ub, sink_end - t.wcet);
  }
  for (int s : n.succs) {
    const PrecNode& sn = graph_.nodes[static_cast<std::size_t>(s)];
    if (sn.kind == PrecNode::Kind::Task) {
      const Micros o = task_offset_[static_cast<std::size_t>(sn.id)];
      if (o == kUnscheduled) return false;
      ub = std::min(ub, o - t.wcet);
      continue;
    }
    const CopyState& cs = copies_[static_cast<std::size_t>(sn.id)];
    if (!cs.placed) return false;
    for (std::size_t i = 0; i < cs.blocks.size(); ++i)
      if (cs.blocks[i].prev < 0 && cs.blocks[i].role != BlockRole::MacVal) ub = std::min(ub, cs.offset[i] - t.wcet);
  }
  if (ub <= cur) return false;
  release_task(task);
  IntervalSet region = offsets_fitting(resources_[static_cast<std::size_t>(es_resource(t.es))].free(t.period), t.wcet);
  region = region.intersect(IntervalSet(cur, ub + 1));
  task_offset_[static_cast<std::size_t>(task)] = region.last_at_or_before(ub).value_or(cur);
  commit_task(task);
  return task_offset_[static_cast<std::size_t>(task)] != cur;
}

}  // namespace tsnsynth
