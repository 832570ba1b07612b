#pragma once

// Exact scheduling by branch-and-bound over difference constraints, and the
// three-stage pipeline (routes, TESLA interval, schedule).

#include "tsnsynth/model.hpp"
#include "tsnsynth/routing.hpp"
#include "tsnsynth/solution.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace tsnsynth {

/// Constraint x[to] - x[from] >= length.
struct DiffArc {
  int from = 0;
  int to = 0;
  std::int64_t length = 0;
};

/// min sum(weight[v] * x[v]) subject to difference constraints, with x[anchor] = 0.
/// Weights must sum to zero. Returns nullopt if the system is infeasible.
/// Solved through the dual min-cost flow; the optimum is integral.
struct DifferenceLp {
  int vertices = 0;
  int anchor = 0;
  std::vector<std::int64_t> weight;
  std::vector<DiffArc> arcs;
};

struct LpSolution {
  std::int64_t value = 0;
  std::vector<std::int64_t> x;
};

std::optional<LpSolution> solve_difference_lp(const DifferenceLp& lp);

/// Longest-path feasibility only: a solution with x[anchor] = 0, or nullopt.
std::optional<std::vector<std::int64_t>> feasible_potentials(int vertices, int anchor, const std::vector<DiffArc>& arcs);

struct ExactBudget {
  std::chrono::milliseconds time{10000};
  std::int64_t node_cap = 2'000'000;
  /// Seed the search with the list scheduler's solution when it is consistent.
  bool warm_start = true;
};

struct ExactSolution {
  Schedule schedule;
  std::int64_t objective = 0;    // sum of application latencies
  std::int64_t lower_bound = 0;  // proven bound; equals objective when optimal
  bool found = false;
  bool optimal = false;
  std::int64_t nodes = 0;
};

/// Model must be security-expanded with P_int bound to `p_int`. Throws
/// InfeasibleError (stage "schedule") when the search proves no schedule exists.
ExactSolution solve_schedule_exact(const SystemModel& model, const RouteAssignment& routes, Micros p_int,
                                   const ExactBudget& budget = {});

struct PipelineOptions {
  RouteOptions routing;
  ExactBudget schedule;
};

/// Expands security tasks if needed, then routes, P_int (bound on `model` in
/// place) and the schedule.
/// Errors carry the failing stage: "routing", "tesla" or "schedule".
Solution solve_pipeline_exact(SystemModel& model, const PipelineOptions& opts = {});

}  // namespace tsnsynth
