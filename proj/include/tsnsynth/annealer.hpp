#pragma once

// Simulated annealing over routes and scheduling orders.

#include "tsnsynth/heuristic.hpp"
#include "tsnsynth/rng.hpp"
#include "tsnsynth/solution.hpp"

#include <chrono>
#include <functional>
#include <optional>

namespace tsnsynth {

struct SALogRecord {
  std::int64_t iteration = 0;
  double temperature = 0;
  double cost = 0;
  double best = 0;
};

struct SAParams {
  double t_start = 1000.0;
  double alpha = 0.999;
  int k = 8;
  double p_rmv = 0.3;
  double a = 50000.0;   // per overlapping copy link
  double b = 10000.0;   // per infeasible application
  std::int64_t w = 10000;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> max_iterations;
  std::chrono::milliseconds time_limit{10000};
  bool stop_at_first_feasible = false;
  /// Stop once a feasible solution costs at most this much.
  std::optional<double> target_cost;
  HeuristicOptions heuristic;
  std::function<void(const SALogRecord&)> log;
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate_params(const SAParams& p);

struct SAState {
  std::vector<std::vector<std::vector<Path>>> candidates;  // [sub][receiver]
  std::vector<std::vector<int>> choice;                    // [sub][receiver]
  std::vector<int> app_sequence;                           // normal applications
  RouteAssignment routes;
  Schedule schedule;
  std::vector<std::string> infeasible;
  double cost = 0;
};

/// a * overlaps + route length + b * infeasible applications + latency of the feasible ones.
double sa_cost(const SystemModel& model, const RouteAssignment& routes, const Schedule& schedule, double a, double b);

/// Rebuilds routes from the choices, schedules and prices the state.
void evaluate(const SystemModel& model, SAState& state, const SAParams& params, bool optimize_latency);

SAState initial_solution(const SystemModel& model, const SAParams& params);

enum class MoveKind { Route, Swap, Identity };
SAState random_neighbour(const SystemModel& model, const SAState& state, const SAParams& params, Rng& rng,
                         MoveKind* kind = nullptr);

struct SAResult {
  Solution solution;
  double cost = 0;
  std::int64_t iterations = 0;
  double seconds = 0;
  std::optional<double> first_feasible_seconds;
};

/// Model must be security-expanded with P_int bound.
SAResult anneal(const SystemModel& model, const SAParams& params);

}  // namespace tsnsynth
