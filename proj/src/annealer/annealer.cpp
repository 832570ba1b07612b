#include "tsnsynth/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsnsynth {

namespace {
using Clock = std::chrono::steady_clock;
constexpr double kMinTemperature = 1e-9;
}  // namespace

void validate_params(const SAParams& p) {
  if (!(p.alpha > 0 && p.alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(p.p_rmv >= 0 && p.p_rmv <= 1)) throw std::invalid_argument("p_rmv must lie in [0, 1]");
  if (p.a <= 0 || p.b <= 0 || p.w <= 0 || p.k <= 0 || p.t_start <= 0)
    throw std::invalid_argument("a, b, w, k and t_start must be positive");
}

double sa_cost(const SystemModel& model, const RouteAssignment& routes, const Schedule& schedule, double a, double b) {
  const auto infeasible = unplaced_apps(model, schedule);
  return a * static_cast<double>(route_overlaps(model, routes)) + static_cast<double>(route_length(routes)) +
         b * static_cast<double>(infeasible.size()) + static_cast<double>(total_latency(model, schedule));
}

namespace {
// Unplaced applications plus owners of streams whose copies share a link:
// overlapping copies lose fault tolerance, so such a state is not feasible.
std::vector<std::string> offenders(const SystemModel& model, const SAState& state) {
  auto out = unplaced_apps(model, state.schedule);
  std::vector<int> users(model.network.links().size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    std::fill(users.begin(), users.end(), 0);
    bool shared = false;
    for (int sub : model.copies_of(static_cast<int>(s))) {
      const auto& pred = state.routes.pred[static_cast<std::size_t>(sub)];
      for (std::size_t v = 0; v < pred.size(); ++v) {
        if (pred[v] == kNoNode || pred[v] == static_cast<NodeId>(v)) continue;
        const auto l = model.network.find_link(pred[v], static_cast<NodeId>(v));
        if (l && users[static_cast<std::size_t>(*l)]++ > 0) shared = true;
      }
    }
    const std::string& app = model.apps[static_cast<std::size_t>(model.streams[s].app)].id;
    if (shared && std::find(out.begin(), out.end(), app) == out.end()) out.push_back(app);
  }
  return out;
}
}  // namespace

void evaluate(const SystemModel& model, SAState& state, const SAParams& params, bool optimize_latency) {
  state.routes = empty_assignment(model);
  for (std::size_t sub = 0; sub < model.substreams.size(); ++sub) {
    std::vector<const Path*> paths;
    for (std::size_t r = 0; r < state.candidates[sub].size(); ++r)
      paths.push_back(&state.candidates[sub][r][static_cast<std::size_t>(state.choice[sub][r])]);
    merge_paths(state.routes, static_cast<int>(sub), paths);
  }
  AsapScheduler scheduler(model, state.routes, params.heuristic);
  scheduler.schedule(scheduler.graph().order(model, state.app_sequence));
  if (optimize_latency) scheduler.optimize_latency();
  state.schedule = scheduler.to_schedule();
  state.infeasible = offenders(model, state);
  state.cost = sa_cost(model, state.routes, state.schedule, params.a, params.b);
}

SAState initial_solution(const SystemModel& model, const SAParams& params) {
  validate_params(params);
  const Network& net = model.network;
  SAState state;
  state.candidates.resize(model.substreams.size());
  state.choice.resize(model.substreams.size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const NodeId sender = model.sender_es(static_cast<int>(s));
    const auto receivers = model.receiver_es(static_cast<int>(s));
    std::vector<std::int64_t> weights(net.links().size(), 1);
    bool weighted = false;
    const auto copies = model.copies_of(static_cast<int>(s));
    // Disjoint greedy trees, when they exist, are each copy's starting choice.
    const auto trees = grow_copy_trees(net, sender, receivers, static_cast<int>(copies.size()), true);
    for (std::size_t c = 0; c < copies.size(); ++c) {
      const int sub = copies[c];
      auto& cand = state.candidates[static_cast<std::size_t>(sub)];
      for (std::size_t r = 0; r < receivers.size(); ++r) {
        auto paths = k_shortest_paths(net, sender, receivers[r], params.k, weighted ? weights : std::vector<std::int64_t>{});
        if (paths.empty())
          throw InfeasibleError("routing", model.streams[s].id,
                                "no path from " + net.node(sender).id + " to " + net.node(receivers[r]).id);
        if (trees) {
          const Path& seed = (*trees)[c][r];
          std::erase_if(paths, [&](const Path& p) { return p.nodes == seed.nodes; });
          paths.insert(paths.begin(), seed);
          if (static_cast<int>(paths.size()) > params.k) paths.pop_back();
        }
        cand.push_back(std::move(paths));
      }
      state.choice[static_cast<std::size_t>(sub)].assign(receivers.size(), 0);
      // Links of this copy's initial tree weigh w for the following copies.
      RouteAssignment tmp = empty_assignment(model);
      std::vector<const Path*> paths;
      for (const auto& cs : cand) paths.push_back(&cs.front());
      merge_paths(tmp, sub, paths);
      const auto& pred = tmp.pred[static_cast<std::size_t>(sub)];
      for (std::size_t n = 0; n < pred.size(); ++n)
        if (pred[n] != kNoNode && pred[n] != static_cast<NodeId>(n))
          weights[static_cast<std::size_t>(*net.find_link(pred[n], static_cast<NodeId>(n)))] = params.w;
      weighted = true;
    }
  }
  state.app_sequence = model.normal_apps();
  evaluate(model, state, params, true);
  return state;
}

SAState random_neighbour(const SystemModel& model, const SAState& state, const SAParams& params, Rng& rng,
                         MoveKind* kind) {
  SAState next = state;
  if (rng.bernoulli(params.p_rmv)) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t sub = 0; sub < state.candidates.size(); ++sub)
      for (std::size_t r = 0; r < state.candidates[sub].size(); ++r) pairs.emplace_back(static_cast<int>(sub), static_cast<int>(r));
    if (pairs.empty()) {
      if (kind) *kind = MoveKind::Identity;
      return next;
    }
    const auto [sub, r] = pairs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pairs.size()) - 1))];
    const auto& options = state.candidates[static_cast<std::size_t>(sub)][static_cast<std::size_t>(r)];
    next.choice[static_cast<std::size_t>(sub)][static_cast<std::size_t>(r)] =
        static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1));
    if (kind) *kind = MoveKind::Route;
    evaluate(model, next, params, false);
    return next;
  }
  const auto n = static_cast<std::int64_t>(next.app_sequence.size());
  if (n < 2) {
    if (kind) *kind = MoveKind::Identity;
    return next;
  }
  const auto i = rng.uniform_int(0, n - 1);
  auto j = rng.uniform_int(0, n - 2);
  if (j >= i) ++j;
  std::swap(next.app_sequence[static_cast<std::size_t>(i)], next.app_sequence[static_cast<std::size_t>(j)]);
  if (kind) *kind = MoveKind::Swap;
  evaluate(model, next, params, true);
  return next;
}

SAResult anneal(const SystemModel& model, const SAParams& params) {
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  Rng rng(params.seed);
  SAResult result;

  SAState current = initial_solution(model, params);
  SAState best = current;
  bool best_feasible = current.infeasible.empty();
  if (best_feasible) result.first_feasible_seconds = elapsed();

  auto better = [&](const SAState& s) {
    const bool feasible = s.infeasible.empty();
    if (feasible != best_feasible) return feasible;
    return s.cost < best.cost;
  };

  double t = params.t_start;
  std::int64_t it = 0;
  auto stop = [&] {
    if (params.stop_at_first_feasible && result.first_feasible_seconds) return true;
    if (params.target_cost && best_feasible && best.cost <= *params.target_cost) return true;
    if (params.max_iterations && it >= *params.max_iterations) return true;
    return Clock::now() - start >= params.time_limit;
  };
  while (!stop()) {
    SAState candidate = random_neighbour(model, current, params, rng);
    const double delta = candidate.cost - current.cost;
    if (delta < 0 || rng.uniform01() < std::exp(-delta / t)) current = std::move(candidate);
    if (better(current)) {
      best = current;
      best_feasible = best.infeasible.empty();
      if (best_feasible && !result.first_feasible_seconds) result.first_feasible_seconds = elapsed();
    }
    t = std::max(t * params.alpha, kMinTemperature);
    ++it;
    if (params.log) params.log({it, t, current.cost, best.cost});
  }

  result.iterations = it;
  result.seconds = elapsed();
  result.cost = best.cost;
  Solution& sol = result.solution;
  sol.routes = best.routes;
  sol.schedule = best.schedule;
  sol.p_int = model.p_int;
  sol.routing_cost = route_length(best.routes);
  sol.schedule_cost = total_latency(model, best.schedule);
  sol.infeasible_apps = best.infeasible;
  return result;
}

}  // namespace tsnsynth
