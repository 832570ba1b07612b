#pragma once

// Precedence graphs, ASAP list scheduling with backtracking, and latency
// post-optimization of secure streams.

#include "tsnsynth/interval_set.hpp"
#include "tsnsynth/model.hpp"
#include "tsnsynth/routing.hpp"
#include "tsnsynth/solution.hpp"

#include <limits>
#include <vector>

namespace tsnsynth {

struct PrecNode {
  enum class Kind { Task, Copy } kind = Kind::Task;
  int id = -1;  // task index or sub-stream index
  int app = -1;
  std::vector<int> preds;
  std::vector<int> succs;
};

struct PrecedenceGraph {
  std::vector<PrecNode> nodes;
  std::vector<int> task_node;  // task index -> node
  std::vector<int> copy_node;  // sub-stream index -> node
  std::vector<std::vector<int>> app_order;  // per application: a topological order of its nodes

  /// Security applications first, then normal applications in the given sequence.
  std::vector<int> order(const SystemModel& model, const std::vector<int>& normal_sequence) const;
  /// Default order: applications in index order, security first.
  std::vector<int> initial_order(const SystemModel& model) const;
};

PrecedenceGraph build_precedence_graph(const SystemModel& model);

inline constexpr Micros kNever = std::numeric_limits<Micros>::max();

/// Smallest offset >= lower contained in region, or kNever.
Micros earliest_offset(Micros lower, const IntervalSet& region);

struct HeuristicOptions {
  int backtrack_cap = 256;
};

class AsapScheduler {
 public:
  AsapScheduler(const SystemModel& model, const RouteAssignment& routes, HeuristicOptions opts = {});

  /// Places the precedence-graph nodes of `order` one after another.
  void schedule(const std::vector<int>& order);
  /// Shifts secure streams and their senders towards the receiving interval,
  /// then compacts every application towards its latest-ending task.
  void optimize_latency();
  void optimize_latency_for_stream(int sub, bool move_task);

  Schedule to_schedule() const;
  std::vector<std::string> infeasible_apps() const;
  const PrecedenceGraph& graph() const noexcept { return graph_; }

  /// Admissible offsets for block `block` of sub-stream `sub` given the current timelines.
  IntervalSet feasible_region(int sub, int block) const;
  /// Lower bound for block `block` of sub-stream `sub` from already placed blocks.
  Micros calculate_lower_bound(int sub, int block) const;
  const ResourceTimeline& resource(int index) const { return resources_[static_cast<std::size_t>(index)]; }
  int es_resource(NodeId n) const { return n; }
  int link_resource(LinkId l) const { return static_cast<int>(model_.network.nodes().size()) + l; }

 private:
  struct CopyState {
    RouteTree tree;
    std::vector<BlockSpec> blocks;
    std::vector<Micros> offset;
    std::vector<Micros> lower;
    std::vector<Micros> upper;
    std::int64_t phi = 0;
    bool placed = false;
  };

  bool place_task(int task);
  bool place_copy(int sub);
  void commit_copy(int sub);
  void release_copy_block(int sub, int block);
  void commit_copy_block(int sub, int block);
  void commit_task(int task);
  void release_task(int task);
  Micros task_lower_bound(int task) const;
  Micros arrival_at(int sub, NodeId es) const;
  Micros arrival_end(int sub) const;
  Micros key_verify_end(int sub, NodeId es) const;
  Micros latest_queue_available(int sub, int block, Micros prev_offset) const;
  Micros earliest_queue_available(int sub, int block, Micros offset) const;
  int resource_of(const BlockSpec& b) const;
  bool queued(const BlockSpec& b) const;  // link leaving a switch
  std::int64_t owner(int sub, int block) const;
  Micros copy_period(int sub) const;
  Micros move_right(int sub, int block, Micros ub);
  /// Sinks (no successors) move only when `sink_end` is given, and end by it.
  bool move_task_right(int task, Micros sink_end = kNever);
  /// Moves all blocks of a copy except MAC validations by one common shift.
  bool shift_copy_right(int sub);
  void compact_app(int app);

  const SystemModel& model_;
  HeuristicOptions opts_;
  Micros p_int_;
  PrecedenceGraph graph_;
  std::vector<CopyState> copies_;
  std::vector<Micros> task_offset_;
  std::vector<char> app_failed_;
  std::vector<ResourceTimeline> resources_;  // end systems, then links
  std::vector<ResourceTimeline> queues_;     // per link: windows [prev offset, offset)
};

}  // namespace tsnsynth
