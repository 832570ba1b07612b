#pragma once

// Route representation (per-copy predecessor maps), route trees, routing
// constraints and costs, k-shortest paths and the exact route optimizer.

#include "tsnsynth/model.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace tsnsynth {

struct Path {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
  std::int64_t weight = 0;
};

/// Up to k loop-free paths src -> dst that never pass through an end system,
/// ordered by weight and then by the node-id sequence. `weights` is indexed by
/// link id; empty means unit weights.
std::vector<Path> k_shortest_paths(const Network& net, NodeId src, NodeId dst, int k,
                                   const std::vector<std::int64_t>& weights = {});

/// Every simple path src -> dst without intermediate end systems, in the same order.
std::vector<Path> all_simple_paths(const Network& net, NodeId src, NodeId dst);

/// Greedy multicast copies: each copy grows a tree from the sender, joining
/// receivers by BFS from the tree. With `disjoint`, a copy avoids every link
/// of the earlier copies. Result is [copy][receiver] full paths from the
/// sender, or nullopt when some receiver cannot be reached.
std::optional<std::vector<std::vector<Path>>> grow_copy_trees(const Network& net, NodeId sender,
                                                              const std::vector<NodeId>& receivers, int copies,
                                                              bool disjoint);

/// For each sub-stream and node: the node it receives the stream from, the
/// node itself for the sender, kNoNode if unused.
struct RouteAssignment {
  std::vector<std::vector<NodeId>> pred;

  bool operator==(const RouteAssignment&) const = default;
};

/// A sub-stream's route as a tree of links rooted at the sender.
struct RouteTree {
  NodeId root = kNoNode;
  std::vector<LinkId> links;     // breadth-first from the root, ties by link id
  std::vector<int> parent;       // index into `links`, -1 for links leaving the root
  std::vector<NodeId> receivers; // sorted receiver end systems

  /// Indices into `links` from the root to `receiver`.
  std::vector<int> path_to(const Network& net, NodeId receiver) const;
  /// Index of the link entering node n, or -1.
  int link_into(const Network& net, NodeId n) const;
  std::vector<int> children(int link_index) const;
};

/// Builds an empty assignment sized for a model.
RouteAssignment empty_assignment(const SystemModel& model);

/// Merges per-receiver paths into sub-stream `sub`: each path is walked from
/// the receiver back towards the sender until it meets the existing tree.
void merge_paths(RouteAssignment& assign, int sub, const std::vector<const Path*>& paths);

RouteTree route_tree(const SystemModel& model, const RouteAssignment& assign, int sub);

enum class RoutingMode { Strict, Relaxed };

/// Number of links used per sub-stream, summed.
std::int64_t route_length(const RouteAssignment& assign);
/// Per distinct stream and link: copies using the link beyond the first.
std::int64_t route_overlaps(const SystemModel& model, const RouteAssignment& assign);
std::int64_t routing_cost(const SystemModel& model, const RouteAssignment& assign, RoutingMode mode);

struct RouteViolation {
  std::string code;  // R1 .. R6
  std::string entity;
  std::string detail;
};

std::vector<RouteViolation> check_routing_constraints(const SystemModel& model, const RouteAssignment& assign,
                                                      RoutingMode mode);

/// Per link: sum over distinct streams of wire_size/period, divided by the link speed.
std::vector<Rational> bandwidth_utilization(const SystemModel& model, const RouteAssignment& assign);

struct RouteOptions {
  RoutingMode mode = RoutingMode::Strict;
  int k = 8;
  /// Topologies with at most this many nodes use every simple path as a candidate.
  std::size_t exhaustive_nodes = 8;
  std::chrono::milliseconds budget{10000};
  std::int64_t node_cap = 5'000'000;
};

struct RouteResult {
  RouteAssignment assign;
  std::int64_t cost = 0;
  bool optimal = true;
};

/// Minimum-cost routing over the candidate path sets. Throws InfeasibleError
/// naming the first stream without an admissible routing.
RouteResult optimize_routes_exact(const SystemModel& model, const RouteOptions& opts = {});

}  // namespace tsnsynth
