#pragma once

// Schedules, solutions and the block layout shared by both scheduling engines.

#include "tsnsynth/model.hpp"
#include "tsnsynth/routing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tsnsynth {

inline constexpr Micros kUnscheduled = -1;

/// Offsets of one sub-stream. Link offsets follow the route tree's link order,
/// MAC validations follow the sorted receiver list.
struct CopySchedule {
  bool scheduled = false;
  std::vector<Micros> link_offsets;
  Micros mac_gen = kUnscheduled;
  std::vector<Micros> mac_val;
  std::int64_t auth_interval = 0;  // TESLA interval index, secure streams only

  bool operator==(const CopySchedule&) const = default;
};

struct Schedule {
  std::vector<Micros> task_offsets;  // kUnscheduled if not placed
  std::vector<CopySchedule> copies;  // per sub-stream

  bool operator==(const Schedule&) const = default;
};

Schedule empty_schedule(const SystemModel& model);

struct Solution {
  RouteAssignment routes;
  Schedule schedule;
  Micros p_int = 0;
  std::int64_t routing_cost = 0;
  std::int64_t schedule_cost = 0;  // sum of application latencies over feasible applications
  bool optimal = false;
  std::vector<std::string> infeasible_apps;

  bool feasible() const { return infeasible_apps.empty(); }
};

/// cost(app) = latest task end - earliest task start; nullopt if a task is unplaced.
std::optional<Micros> app_latency(const SystemModel& model, const Schedule& schedule, int app);
/// Sum of latencies of all fully placed applications.
std::int64_t total_latency(const SystemModel& model, const Schedule& schedule);
/// Ids of applications with an unplaced task or sub-stream.
std::vector<std::string> unplaced_apps(const SystemModel& model, const Schedule& schedule);

enum class BlockRole { MacGen, Link, MacVal };

/// One occupancy of a sub-stream on one resource.
struct BlockSpec {
  BlockRole role = BlockRole::Link;
  NodeId es = kNoNode;   // MAC blocks
  LinkId link = -1;      // link blocks
  int tree_index = -1;   // link blocks: index into RouteTree::links; MacVal: receiver index
  Micros length = 0;
  int prev = -1;
  std::vector<int> next;
};

/// Blocks of a sub-stream: MAC generation (secure), links breadth-first, MAC
/// validation per receiver (secure).
std::vector<BlockSpec> block_layout(const SystemModel& model, const RouteTree& tree, int sub);

Micros link_duration(const SystemModel& model, int stream, LinkId link);

}  // namespace tsnsynth
