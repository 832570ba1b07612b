#include "fixtures.hpp"

#include "tsnsynth/exact.hpp"
#include "tsnsynth/heuristic.hpp"
#include "tsnsynth/rng.hpp"
#include "tsnsynth/tesla.hpp"
#include "tsnsynth/toolkit.hpp"
#include "tsnsynth/verify.hpp"

#include <doctest.h>

#include <array>
#include <limits>

using namespace tsnsynth;

namespace {

constexpr std::int64_t kBig = std::numeric_limits<std::int64_t>::max();

// Periodic windows [a, a+la) and [b, b+lb) repeat every pa and pb.
bool periodic_clash(Micros a, Micros la, Micros pa, Micros b, Micros lb, Micros pb) {
  const Micros h = std::lcm(pa, pb);
  for (Micros i = a; i < h; i += pa)
    for (Micros j = b; j < h; j += pb)
      for (Micros s : {-h, Micros{0}, h})
        if (i < j + s + lb && j + s < i + la) return true;
  return false;
}

Solution wrap(const SystemModel& m, const RouteAssignment& r, const Schedule& s) {
  Solution sol;
  sol.routes = r;
  sol.schedule = s;
  sol.p_int = m.p_int;
  return sol;
}

}  // namespace

TEST_CASE("difference LP agrees with enumeration") {
  Rng rng(42);
  for (int round = 0; round < 150; ++round) {
    // Vertex 0 anchors; x1..x3 live in [0, 8].
    DifferenceLp lp;
    lp.vertices = 4;
    lp.anchor = 0;
    lp.weight.assign(4, 0);
    for (int v = 1; v < 4; ++v) {
      lp.weight[static_cast<std::size_t>(v)] = rng.uniform_int(-3, 3);
      lp.weight[0] -= lp.weight[static_cast<std::size_t>(v)];
      lp.arcs.push_back({0, v, 0});
      lp.arcs.push_back({v, 0, -8});
    }
    const int extra = static_cast<int>(rng.uniform_int(1, 5));
    for (int e = 0; e < extra; ++e) {
      const int a = static_cast<int>(rng.uniform_int(1, 3));
      int b = static_cast<int>(rng.uniform_int(1, 3));
      if (a == b) b = a % 3 + 1;
      lp.arcs.push_back({a, b, rng.uniform_int(-6, 6)});
    }
    std::int64_t best = kBig;
    for (int x1 = 0; x1 <= 8; ++x1)
      for (int x2 = 0; x2 <= 8; ++x2)
        for (int x3 = 0; x3 <= 8; ++x3) {
          const std::array<std::int64_t, 4> x{0, x1, x2, x3};
          bool ok = true;
          for (const auto& arc : lp.arcs)
            ok = ok && x[static_cast<std::size_t>(arc.to)] - x[static_cast<std::size_t>(arc.from)] >= arc.length;
          if (!ok) continue;
          std::int64_t v = 0;
          for (int i = 0; i < 4; ++i) v += lp.weight[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
          best = std::min(best, v);
        }
    const auto sol = solve_difference_lp(lp);
    const auto pot = feasible_potentials(lp.vertices, lp.anchor, lp.arcs);
    CHECK(sol.has_value() == (best != kBig));
    CHECK(pot.has_value() == (best != kBig));
    if (!sol) continue;
    CHECK(sol->value == best);
    CHECK(sol->x[0] == 0);
    for (const auto& arc : lp.arcs) CHECK(sol->x[static_cast<std::size_t>(arc.to)] - sol->x[static_cast<std::size_t>(arc.from)] >= arc.length);
    for (const auto& arc : lp.arcs) CHECK((*pot)[static_cast<std::size_t>(arc.to)] - (*pot)[static_cast<std::size_t>(arc.from)] >= arc.length);
  }
}

TEST_CASE("exact schedule agrees with enumeration on two competing chains") {
  for (const auto& [tx, ty] : std::vector<std::pair<Micros, Micros>>{{12, 8}, {12, 12}, {10, 6}}) {
    ModelBuilder b;
    b.end_system("A", 1);
    b.end_system("B", 1);
    b.link("A", "B", Rational(1));
    const int x = b.application("X", tx);
    b.task(x, "x1", "A", 2);
    b.task(x, "x2", "B", 2);
    b.stream(x, "sx", "x1", {"x2"}, 2);
    const int y = b.application("Y", ty);
    b.task(y, "y1", "A", 3);
    b.task(y, "y2", "B", 1);
    b.stream(y, "sy", "y1", {"y2"}, 3);
    SystemModel m = b.build();
    REQUIRE(prepare_model(m));
    const RouteResult r = optimize_routes_exact(m);

    // Offsets: x1, sx, x2, y1, sy, y2.
    std::int64_t best = kBig;
    for (Micros a1 = 0; a1 + 2 <= tx; ++a1)
      for (Micros l1 = a1 + 2; l1 + 2 <= tx; ++l1)
        for (Micros a2 = l1 + 2; a2 + 2 <= tx; ++a2)
          for (Micros b1 = 0; b1 + 3 <= ty; ++b1) {
            if (periodic_clash(a1, 2, tx, b1, 3, ty)) continue;
            for (Micros l2 = b1 + 3; l2 + 3 <= ty; ++l2) {
              if (periodic_clash(l1, 2, tx, l2, 3, ty)) continue;
              for (Micros b2 = l2 + 3; b2 + 1 <= ty; ++b2) {
                if (periodic_clash(a2, 2, tx, b2, 1, ty)) continue;
                best = std::min(best, (a2 + 2 - a1) + (b2 + 1 - b1));
              }
            }
          }
    if (best == kBig) {
      CHECK_THROWS_AS(solve_schedule_exact(m, r.assign, m.p_int), InfeasibleError);
      continue;
    }
    const ExactSolution e = solve_schedule_exact(m, r.assign, m.p_int);
    CHECK(e.found);
    CHECK(e.optimal);
    CHECK(e.objective == best);
    CHECK(e.lower_bound == best);
    CHECK(verify_solution(m, wrap(m, r.assign, e.schedule)).ok());
  }
}

TEST_CASE("tasks that exceed an end system's capacity are infeasible") {
  ModelBuilder b = fixtures::line(Rational(1));
  const int a = b.application("A", 1000);
  b.task(a, "x", "A", 300);
  const int c = b.application("C", 1000);
  b.task(c, "y", "A", 800);
  SystemModel m = b.build();
  REQUIRE(prepare_model(m));
  try {
    solve_schedule_exact(m, empty_assignment(m), m.p_int);
    FAIL("expected an infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.stage() == "schedule");
  }
}

TEST_CASE("chain over a fast direct link") {
  ModelBuilder b;
  b.end_system("A", 10);
  b.end_system("B", 10);
  b.duplex("A", "B", speed_from_mbps(1000));
  const int app = b.application("a", 1000);
  b.task(app, "t1", "A", 40);
  b.task(app, "t2", "B", 60);
  b.stream(app, "s", "t1", {"t2"}, 100);
  SystemModel m = b.build();
  const Solution sol = solve_pipeline_exact(m);
  // 100 B at 125 B/us takes one microsecond.
  CHECK(sol.schedule_cost == 40 + 1 + 60);
  CHECK(sol.routing_cost == 1);
  CHECK(sol.optimal);
}

TEST_CASE("motivational example under the exact pipeline") {
  SystemModel m = fixtures::motivational();
  const Solution sol = solve_pipeline_exact(m);
  CHECK(m.p_int == 500);
  CHECK(sol.p_int == 500);
  REQUIRE(sol.feasible());
  CHECK(sol.optimal);
  // s1 two hops; s2 three hops per copy; keys mirror their streams.
  CHECK(sol.routing_cost == 2 + 3 + 3 + 2 + 3 + 3);
  CHECK(sol.schedule.task_offsets[static_cast<std::size_t>(*m.find_task("t3"))] >= 500);
  CHECK(sol.schedule.task_offsets[static_cast<std::size_t>(*m.find_task("t4"))] >= 500);
  CHECK(verify_solution(m, sol).ok());

  SystemModel plain = fixtures::motivational(false, true);
  const Solution open = solve_pipeline_exact(plain);
  REQUIRE(open.feasible());
  CHECK(open.schedule_cost <= sol.schedule_cost);
  CHECK(open.schedule_cost < 500);
}

TEST_CASE("exact never loses to the list scheduler, and security never helps") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    SystemModel m = generate_case(tiny_spec(seed));
    SystemModel plain = without_security(m);
    Solution sec, open;
    try {
      sec = solve_pipeline_exact(m);
      open = solve_pipeline_exact(plain);
    } catch (const InfeasibleError& e) {
      MESSAGE("seed ", seed, ": ", e.what());
      continue;
    }
    if (!sec.optimal || !open.optimal) MESSAGE("seed ", seed, " not proven optimal");
    if (!sec.feasible() || !open.feasible() || !sec.optimal || !open.optimal) continue;
    CHECK(verify_solution(m, sec).ok());

    AsapScheduler h(m, sec.routes);
    h.schedule(h.graph().initial_order(m));
    h.optimize_latency();
    if (h.infeasible_apps().empty()) CHECK(sec.schedule_cost <= total_latency(m, h.to_schedule()));

    // Only normal applications are comparable across the toggle.
    std::int64_t normal = 0;
    for (int a : m.normal_apps()) normal += *app_latency(m, sec.schedule, a);
    CHECK(open.schedule_cost <= normal);
    ++compared;
  }
  CHECK(compared >= 8);
}

TEST_CASE("budget exhaustion reports a bound") {
  SystemModel m = fixtures::prepared(generate_case(tiny_spec(3)));
  const RouteResult r = optimize_routes_exact(m);
  ExactBudget tight;
  tight.node_cap = 1;
  tight.warm_start = false;
  const ExactSolution e = solve_schedule_exact(m, r.assign, m.p_int, tight);
  if (e.found) {
    CHECK(e.lower_bound <= e.objective);
    CHECK(verify_solution(m, wrap(m, r.assign, e.schedule)).ok());
  }
  const ExactSolution full = solve_schedule_exact(m, r.assign, m.p_int);
  REQUIRE(full.optimal);
  CHECK(e.lower_bound <= full.objective);
}
