#include "tsnsynth/exact.hpp"
#include "tsnsynth/tesla.hpp"

namespace tsnsynth {

Solution solve_pipeline_exact(SystemModel& model, const PipelineOptions& opts) {
  // Already-expanded senders are skipped, so this is safe on prepared models.
  model = expand_security_model(std::move(model));
  const RouteResult routes = optimize_routes_exact(model, opts.routing);
  const Micros p_int = choose_p_int(model);
  if (model.has_security_apps()) bind_p_int(model, p_int);
  else model.p_int = p_int;

  const ExactSolution sched = solve_schedule_exact(model, routes.assign, p_int, opts.schedule);
  Solution sol;
  sol.routes = routes.assign;
  sol.p_int = p_int;
  sol.routing_cost = routes.cost;
  sol.schedule = sched.schedule;
  sol.schedule_cost = sched.objective;
  sol.optimal = routes.optimal && sched.optimal;
  if (!sched.found)
    for (const Application& a : model.apps) sol.infeasible_apps.push_back(a.id);
  return sol;
}

}  // namespace tsnsynth
