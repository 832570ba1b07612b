#include "tsnsynth/heuristic.hpp"
#include "tsnsynth/tesla.hpp"

#include <algorithm>

namespace tsnsynth {

namespace {

IntervalSet offsets_fitting(const IntervalSet& free, Micros length) {
  IntervalSet out;
  for (const Interval& iv : free.intervals())
    if (iv.end - length >= iv.begin) out.add(iv.begin, iv.end - length + 1);
  return out;
}

}  // namespace

Micros earliest_offset(Micros lower, const IntervalSet& region) {
  auto o = region.first_at_or_after(lower);
  return o ? *o : kNever;
}

AsapScheduler::AsapScheduler(const SystemModel& model, const RouteAssignment& routes, HeuristicOptions opts)
    : model_(model), opts_(opts), p_int_(model.p_int), graph_(build_precedence_graph(model)) {
  const Network& net = model.network;
  copies_.resize(model.substreams.size());
  for (std::size_t c = 0; c < model.substreams.size(); ++c) {
    CopyState& st = copies_[c];
    st.tree = route_tree(model, routes, static_cast<int>(c));
    st.blocks = block_layout(model, st.tree, static_cast<int>(c));
    st.offset.assign(st.blocks.size(), kUnscheduled);
    st.lower.assign(st.blocks.size(), 0);
    st.upper.assign(st.blocks.size(), 0);
    if (model.streams[static_cast<std::size_t>(model.substreams[c].stream)].secure && p_int_ <= 0)
      throw ModelError("secure streams need a bound key disclosure interval");
  }
  task_offset_.assign(model.tasks.size(), kUnscheduled);
  app_failed_.assign(model.apps.size(), 0);
  resources_.resize(net.nodes().size() + net.links().size());
  queues_.resize(net.links().size());
}

int AsapScheduler::resource_of(const BlockSpec& b) const {
  return b.role == BlockRole::Link ? link_resource(b.link) : es_resource(b.es);
}

bool AsapScheduler::queued(const BlockSpec& b) const {
  return b.role == BlockRole::Link && !model_.network.is_end_system(model_.network.link(b.link).src);
}

std::int64_t AsapScheduler::owner(int sub, int block) const {
  return (static_cast<std::int64_t>(sub) + 1) * 4096 + block;
}

Micros AsapScheduler::copy_period(int sub) const {
  return model_.streams[static_cast<std::size_t>(model_.substreams[static_cast<std::size_t>(sub)].stream)].period;
}

void AsapScheduler::schedule(const std::vector<int>& order) {
  for (int node : order) {
    const PrecNode& n = graph_.nodes.at(static_cast<std::size_t>(node));
    if (app_failed_[static_cast<std::size_t>(n.app)]) continue;
    const bool ok = n.kind == PrecNode::Kind::Task ? place_task(n.id) : place_copy(n.id);
    if (!ok) app_failed_[static_cast<std::size_t>(n.app)] = 1;
  }
}

Micros AsapScheduler::arrival_at(int sub, NodeId es) const {
  const CopyState& st = copies_[static_cast<std::size_t>(sub)];
  if (!st.placed) return kNever;
  for (std::size_t i = 0; i < st.blocks.size(); ++i) {
    const BlockSpec& b = st.blocks[i];
    if (b.role == BlockRole::MacVal && b.es == es) return st.offset[i] + b.length;
  }
  for (std::size_t i = 0; i < st.blocks.size(); ++i) {
    const BlockSpec& b = st.blocks[i];
    if (b.role == BlockRole::Link && model_.network.link(b.link).dst == es) return st.offset[i] + b.length;
  }
  return kNever;
}

Micros AsapScheduler::arrival_end(int sub) const {
  const CopyState& st = copies_[static_cast<std::size_t>(sub)];
  Micros end = 0;
  for (NodeId r : st.tree.receivers) {
    const int li = st.tree.link_into(model_.network, r);
    if (li < 0) return kNever;
    const std::size_t bi = static_cast<std::size_t>(li) + (st.blocks.front().role == BlockRole::MacGen ? 1 : 0);
    if (st.offset[bi] == kUnscheduled) return kNever;
    end = std::max(end, st.offset[bi] + st.blocks[bi].length);
  }
  return end;
}

Micros AsapScheduler::key_verify_end(int sub, NodeId es) const {
  const NodeId source = copies_[static_cast<std::size_t>(sub)].tree.root;
  auto kv = model_.key_verify_task(source, es);
  if (!kv || task_offset_[static_cast<std::size_t>(*kv)] == kUnscheduled) return kNever;
  return task_offset_[static_cast<std::size_t>(*kv)] + model_.tasks[static_cast<std::size_t>(*kv)].wcet;
}

Micros AsapScheduler::task_lower_bound(int task) const {
  Micros lb = 0;
  const PrecNode& n = graph_.nodes[static_cast<std::size_t>(graph_.task_node[static_cast<std::size_t>(task)])];
  const NodeId es = model_.tasks[static_cast<std::size_t>(task)].es;
  for (int p : n.preds) {
    const PrecNode& pn = graph_.nodes[static_cast<std::size_t>(p)];
    Micros end;
    if (pn.kind == PrecNode::Kind::Task) {
      const Micros o = task_offset_[static_cast<std::size_t>(pn.id)];
      end = o == kUnscheduled ? kNever : o + model_.tasks[static_cast<std::size_t>(pn.id)].wcet;
    } else {
      end = arrival_at(pn.id, es);
    }
    if (end == kNever) return kNever;
    lb = std::max(lb, end);
  }
  return lb;
}

Micros AsapScheduler::calculate_lower_bound(int sub, int block) const {
  const CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const BlockSpec& b = st.blocks[static_cast<std::size_t>(block)];
  Micros lb = 0;
  if (b.prev < 0) {
    const int sender = model_.streams[static_cast<std::size_t>(model_.substreams[static_cast<std::size_t>(sub)].stream)].sender;
    const Micros o = task_offset_[static_cast<std::size_t>(sender)];
    if (o == kUnscheduled) return kNever;
    lb = o + model_.tasks[static_cast<std::size_t>(sender)].wcet;
  } else if (b.role == BlockRole::Link) {
    const Micros o = st.offset[static_cast<std::size_t>(b.prev)];
    if (o == kUnscheduled) return kNever;
    lb = o + st.blocks[static_cast<std::size_t>(b.prev)].length;
  } else {
    const Micros kv_end = key_verify_end(sub, b.es);
    const Micros arrival = arrival_end(sub);
    if (kv_end == kNever || arrival == kNever) return kNever;
    lb = earliest_auth_time(auth_interval(arrival, p_int_), p_int_, kv_end);
  }
  return std::max(lb, st.lower[static_cast<std::size_t>(block)]);
}

IntervalSet AsapScheduler::feasible_region(int sub, int block) const {
  const CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const BlockSpec& b = st.blocks[static_cast<std::size_t>(block)];
  const Micros period = copy_period(sub);
  IntervalSet region = offsets_fitting(resources_[static_cast<std::size_t>(resource_of(b))].free(period), b.length);
  if (b.role == BlockRole::Link) {
    for (int g : b.next) {
      const BlockSpec& nb = st.blocks[static_cast<std::size_t>(g)];
      if (nb.role == BlockRole::Link) region = region.intersect(queues_[static_cast<std::size_t>(nb.link)].free(period));
    }
  }
  return region;
}

Micros AsapScheduler::latest_queue_available(int sub, int block, Micros prev_offset) const {
  const BlockSpec& b = copies_[static_cast<std::size_t>(sub)].blocks[static_cast<std::size_t>(block)];
  const Micros period = copy_period(sub);
  const Micros base = period - b.length;
  if (!queued(b)) return base;
  auto run = queues_[static_cast<std::size_t>(b.link)].free(period).run_containing(prev_offset);
  if (!run) return -1;
  return std::min(base, run->end);
}

Micros AsapScheduler::earliest_queue_available(int sub, int block, Micros offset) const {
  const CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const BlockSpec& b = st.blocks[static_cast<std::size_t>(block)];
  const Micros prev_o = st.offset[static_cast<std::size_t>(b.prev)];
  Micros start = offset;
  if (queued(b)) {
    if (auto run = queues_[static_cast<std::size_t>(b.link)].free(copy_period(sub)).run_containing(offset - 1))
      start = run->begin;
  }
  return std::max(start, prev_o + 1);
}

bool AsapScheduler::place_task(int task) {
  const Task& t = model_.tasks[static_cast<std::size_t>(task)];
  const Micros lb = task_lower_bound(task);
  if (lb == kNever) return false;
  const IntervalSet region = offsets_fitting(resources_[static_cast<std::size_t>(es_resource(t.es))].free(t.period), t.wcet);
  const Micros o = earliest_offset(lb, region);
  if (o == kNever) return false;
  task_offset_[static_cast<std::size_t>(task)] = o;
  commit_task(task);
  return true;
}

bool AsapScheduler::place_copy(int sub) {
  CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const Micros period = copy_period(sub);
  const int n = static_cast<int>(st.blocks.size());
  for (int i = 0; i < n; ++i) {
    st.offset[static_cast<std::size_t>(i)] = kUnscheduled;
    st.lower[static_cast<std::size_t>(i)] = 0;
    st.upper[static_cast<std::size_t>(i)] = period - st.blocks[static_cast<std::size_t>(i)].length;
  }
  int i = 0;
  int backtracks = 0;
  while (i < n) {
    const std::size_t bi = static_cast<std::size_t>(i);
    const BlockSpec& b = st.blocks[bi];
    const Micros lb = calculate_lower_bound(sub, i);
    if (lb == kNever) return false;
    st.lower[bi] = lb;
    const Micros o = earliest_offset(lb, feasible_region(sub, i));
    if (o == kNever) return false;
    if (o <= st.upper[bi]) {
      st.offset[bi] = o;
      for (int g : b.next)
        if (st.blocks[static_cast<std::size_t>(g)].role == BlockRole::Link)
          st.upper[static_cast<std::size_t>(g)] = latest_queue_available(sub, g, o);
      ++i;
    } else {
      if (b.prev < 0 || ++backtracks > opts_.backtrack_cap) return false;
      st.lower[static_cast<std::size_t>(b.prev)] = earliest_queue_available(sub, i, o);
      i = b.prev;
    }
  }
  if (model_.streams[static_cast<std::size_t>(model_.substreams[static_cast<std::size_t>(sub)].stream)].secure)
    st.phi = auth_interval(arrival_end(sub), p_int_);
  st.placed = true;
  for (int b = 0; b < n; ++b) commit_copy_block(sub, b);
  return true;
}

void AsapScheduler::commit_copy_block(int sub, int block) {
  const CopyState& st = copies_[static_cast<std::size_t>(sub)];
  const BlockSpec& b = st.blocks[static_cast<std::size_t>(block)];
  const Micros period = copy_period(sub);
  const Micros o = st.offset[static_cast<std::size_t>(block)];
  resources_[static_cast<std::size_t>(resource_of(b))].add({o, b.length, period, owner(sub, block)});
  if (queued(b)) {
    const Micros p = st.offset[static_cast<std::size_t>(b.prev)];
    queues_[static_cast<std::size_t>(b.link)].add({p, o - p, period, owner(sub, block)});
  }
}

void AsapScheduler::release_copy_block(int sub, int block) {
  const BlockSpec& b = copies_[static_cast<std::size_t>(sub)].blocks[static_cast<std::size_t>(block)];
  resources_[static_cast<std::size_t>(resource_of(b))].remove_owner(owner(sub, block));
  if (queued(b)) queues_[static_cast<std::size_t>(b.link)].remove_owner(owner(sub, block));
}

void AsapScheduler::commit_task(int task) {
  const Task& t = model_.tasks[static_cast<std::size_t>(task)];
  resources_[static_cast<std::size_t>(es_resource(t.es))].add(
      {task_offset_[static_cast<std::size_t>(task)], t.wcet, t.period, -(static_cast<std::int64_t>(task) + 1)});
}

void AsapScheduler::release_task(int task) {
  const Task& t = model_.tasks[static_cast<std::size_t>(task)];
  resources_[static_cast<std::size_t>(es_resource(t.es))].remove_owner(-(static_cast<std::int64_t>(task) + 1));
}

Schedule AsapScheduler::to_schedule() const {
  Schedule s = empty_schedule(model_);
  s.task_offsets = task_offset_;
  for (std::size_t c = 0; c < copies_.size(); ++c) {
    const CopyState& st = copies_[c];
    CopySchedule& out = s.copies[c];
    if (!st.placed) continue;
    out.scheduled = true;
    out.link_offsets.assign(st.tree.links.size(), kUnscheduled);
    out.mac_val.assign(st.tree.receivers.size(), kUnscheduled);
    out.auth_interval = st.phi;
    for (std::size_t i = 0; i < st.blocks.size(); ++i) {
      const BlockSpec& b = st.blocks[i];
      switch (b.role) {
        case BlockRole::MacGen: out.mac_gen = st.offset[i]; break;
        case BlockRole::Link: out.link_offsets[static_cast<std::size_t>(b.tree_index)] = st.offset[i]; break;
        case BlockRole::MacVal: out.mac_val[static_cast<std::size_t>(b.tree_index)] = st.offset[i]; break;
      }
    }
  }
  return s;
}

std::vector<std::string> AsapScheduler::infeasible_apps() const { return unplaced_apps(model_, to_schedule()); }

}  // namespace tsnsynth
