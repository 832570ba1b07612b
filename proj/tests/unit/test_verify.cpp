#include "fixtures.hpp"

#include "tsnsynth/exact.hpp"
#include "tsnsynth/toolkit.hpp"
#include "tsnsynth/verify.hpp"

#include <doctest.h>

#include <algorithm>

using namespace tsnsynth;

namespace {

std::size_t idx(std::optional<int> i) {
  REQUIRE(i.has_value());
  return static_cast<std::size_t>(*i);
}

bool names(const Violation& v, const std::string& id) {
  return std::find(v.entities.begin(), v.entities.end(), id) != v.entities.end();
}

// Two unrelated streams A -> B over one direct 1 B/us link, scheduled by hand.
struct Pair {
  SystemModel m;
  Solution sol;
};

Pair hand_pair() {
  ModelBuilder b;
  b.end_system("A", 10);
  b.end_system("B", 10);
  b.link("A", "B", Rational(1));
  const int x = b.application("X", 1000);
  b.task(x, "x1", "A", 10);
  b.task(x, "x2", "B", 10);
  b.stream(x, "sx", "x1", {"x2"}, 100);
  const int y = b.application("Y", 1000);
  b.task(y, "y1", "A", 10);
  b.task(y, "y2", "B", 10);
  b.stream(y, "sy", "y1", {"y2"}, 100);
  Pair p{b.build(), {}};
  REQUIRE(prepare_model(p.m));
  const SystemModel& m = p.m;
  p.sol.routes = optimize_routes_exact(m).assign;
  p.sol.p_int = m.p_int;
  p.sol.schedule = empty_schedule(m);
  auto& s = p.sol.schedule;
  s.task_offsets[idx(m.find_task("x1"))] = 0;
  s.task_offsets[idx(m.find_task("y1"))] = 10;
  s.copies[idx(m.find_substream("sx_0"))] = {true, {10}, kUnscheduled, {}, 0};
  s.copies[idx(m.find_substream("sy_0"))] = {true, {110}, kUnscheduled, {}, 0};
  s.task_offsets[idx(m.find_task("x2"))] = 110;
  s.task_offsets[idx(m.find_task("y2"))] = 210;
  return p;
}

// e1 and e2 both reach e3 through sw1.
Pair hand_switch(Micros s2_first, Micros s2_second) {
  ModelBuilder b;
  for (const char* e : {"e1", "e2", "e3"}) b.end_system(e, 10);
  b.switch_node("sw1");
  for (const char* e : {"e1", "e2", "e3"}) b.duplex(e, "sw1", Rational(1));
  const int a1 = b.application("a1", 1000);
  b.task(a1, "p1", "e1", 10);
  b.task(a1, "c1", "e3", 10);
  b.stream(a1, "s1", "p1", {"c1"}, 100);
  const int a2 = b.application("a2", 1000);
  b.task(a2, "p2", "e2", 10);
  b.task(a2, "c2", "e3", 10);
  b.stream(a2, "s2", "p2", {"c2"}, 100);
  Pair p{b.build(), {}};
  REQUIRE(prepare_model(p.m));
  const SystemModel& m = p.m;
  p.sol.routes = optimize_routes_exact(m).assign;
  p.sol.p_int = m.p_int;
  p.sol.schedule = empty_schedule(m);
  auto& s = p.sol.schedule;
  s.task_offsets[idx(m.find_task("p1"))] = 0;
  s.task_offsets[idx(m.find_task("p2"))] = 0;
  s.copies[idx(m.find_substream("s1_0"))] = {true, {10, 110}, kUnscheduled, {}, 0};
  s.copies[idx(m.find_substream("s2_0"))] = {true, {s2_first, s2_second}, kUnscheduled, {}, 0};
  s.task_offsets[idx(m.find_task("c1"))] = 210;
  s.task_offsets[idx(m.find_task("c2"))] = s2_second + 100 + 10;
  return p;
}

}  // namespace

TEST_CASE("a clean hand schedule passes") {
  const Pair p = hand_pair();
  const VerifyReport r = verify_solution(p.m, p.sol);
  CHECK_MESSAGE(r.ok(), r.to_text());
}

TEST_CASE("two frames on one link at once give one conflict naming both") {
  Pair p = hand_pair();
  p.sol.schedule.copies[idx(p.m.find_substream("sy_0"))].link_offsets[0] = 20;
  p.sol.schedule.task_offsets[idx(p.m.find_task("y2"))] = 130;
  const VerifyReport r = verify_solution(p.m, p.sol);
  REQUIRE(r.count("S8") == 1);
  CHECK(r.violations.size() == 1);
  CHECK(names(r.violations[0], "sx_0"));
  CHECK(names(r.violations[0], "sy_0"));
  CHECK(r.applications(p.m) == std::vector<std::string>{"X", "Y"});
}

TEST_CASE("task conflicts and precedence are told apart") {
  Pair p = hand_pair();
  auto& s = p.sol.schedule;
  SUBCASE("receiver starts before arrival") {
    s.task_offsets[idx(p.m.find_task("x2"))] = 100;
    const VerifyReport r = verify_solution(p.m, p.sol);
    CHECK(r.count("T3") == 1);
    CHECK(r.violations.size() == 1);
  }
  SUBCASE("frame sent before its sender ends") {
    s.copies[idx(p.m.find_substream("sx_0"))].link_offsets[0] = 5;
    s.copies[idx(p.m.find_substream("sy_0"))].link_offsets[0] = 110;
    const VerifyReport r = verify_solution(p.m, p.sol);
    CHECK(r.count("T2") == 1);
    CHECK(r.violations.size() == 1);
  }
  SUBCASE("two tasks share the end system") {
    s.task_offsets[idx(p.m.find_task("y1"))] = 5;
    s.copies[idx(p.m.find_substream("sy_0"))].link_offsets[0] = 110;
    const VerifyReport r = verify_solution(p.m, p.sol);
    CHECK(r.count("T4") == 1);
    CHECK(r.violations.size() == 1);
  }
  SUBCASE("an occupancy leaving its period") {
    s.task_offsets[idx(p.m.find_task("y2"))] = 995;
    CHECK(verify_solution(p.m, p.sol).count("bounds") == 1);
  }
  SUBCASE("an unscheduled copy") {
    s.copies[idx(p.m.find_substream("sy_0"))] = CopySchedule{};
    const VerifyReport r = verify_solution(p.m, p.sol);
    CHECK(r.count("missing") == 1);
    CHECK(r.applications(p.m) == std::vector<std::string>{"Y"});
  }
}

TEST_CASE("route shape violations") {
  Pair p = hand_pair();
  const NodeId b = p.m.network.node_id("B");
  auto& pred = p.sol.routes.pred[idx(p.m.find_substream("sx_0"))];
  SUBCASE("receiver not reached") {
    pred[static_cast<std::size_t>(b)] = kNoNode;
    CHECK(verify_solution(p.m, p.sol).count("R3") >= 1);
  }
  SUBCASE("hop without a link") {
    pred[static_cast<std::size_t>(b)] = b == 0 ? 1 : 0;
    pred[static_cast<std::size_t>(p.m.network.node_id("A"))] = kNoNode;
    CHECK(!verify_solution(p.m, p.sol).ok());
  }
}

TEST_CASE("printed and queue isolation differ on a back-to-back handover") {
  // s2 enters sw1 exactly when s1 starts leaving it.
  const Pair p = hand_switch(110, 210);
  const VerifyReport printed = verify_solution(p.m, p.sol, Strictness::Printed);
  CHECK_MESSAGE(printed.ok(), printed.to_text());
  const VerifyReport queue = verify_solution(p.m, p.sol, Strictness::Queue);
  CHECK(queue.count("S9") == 1);
  CHECK(queue.violations.size() == 1);

  // Arriving while s1 still waits breaks both readings.
  const Pair early = hand_switch(100, 210);
  CHECK(verify_solution(early.m, early.sol, Strictness::Printed).count("S9") == 1);
  CHECK(verify_solution(early.m, early.sol, Strictness::Queue).count("S9") == 1);
}

TEST_CASE("key interval violations on a secure stream") {
  SystemModel m = fixtures::motivational();
  Solution sol = solve_pipeline_exact(m);
  REQUIRE(sol.feasible());
  REQUIRE(verify_solution(m, sol).ok());
  auto& c = sol.schedule.copies[idx(m.find_substream("s1_0"))];
  SUBCASE("validation before the key can be checked") {
    c.mac_val[0] -= 1;
    CHECK(verify_solution(m, sol).count("S6") >= 1);
  }
  SUBCASE("interval that does not follow arrival") {
    c.auth_interval = 0;
    CHECK(verify_solution(m, sol).count("S5") == 1);
  }
  SUBCASE("a later interval delays validation") {
    c.auth_interval += 1;
    const VerifyReport r = verify_solution(m, sol);
    CHECK(r.count("S5") == 0);
    CHECK(r.count("S6") == 1);
  }
  SUBCASE("missing key verification") {
    sol.schedule.task_offsets[idx(m.find_task("kv_ES1_ES3"))] = kUnscheduled;
    const VerifyReport r = verify_solution(m, sol);
    CHECK(r.count("missing") == 1);
    CHECK(r.count("S6") >= 1);
  }
}

TEST_CASE("fault tolerance of the motivational routes") {
  SystemModel m = fixtures::motivational();
  const Solution sol = solve_pipeline_exact(m);
  CHECK(fault_tolerance_violations(m, sol.routes).empty());

  const Network& net = m.network;
  const LinkId cut = *net.find_link(net.node_id("SW1"), net.node_id("ES3"));
  const auto delivered = delivered_under_failures(m, sol.routes, {cut});
  CHECK_FALSE(delivered[idx(m.find_stream("s1"))]);
  CHECK(delivered[idx(m.find_stream("s2"))]);

  // Both copies of s2 through SW1 lose redundancy.
  RouteAssignment same = sol.routes;
  same.pred[idx(m.find_substream("s2_1"))] = same.pred[idx(m.find_substream("s2_0"))];
  const auto bad = fault_tolerance_violations(m, same);
  CHECK(std::find(bad.begin(), bad.end(), "s2") != bad.end());
  Solution shared = sol;
  shared.routes = same;
  CHECK(verify_solution(m, shared).count("R6") >= 1);
}

TEST_CASE("report text lists each violation") {
  Pair p = hand_pair();
  p.sol.schedule.task_offsets[idx(p.m.find_task("x2"))] = 100;
  p.sol.schedule.task_offsets[idx(p.m.find_task("y2"))] = 995;
  const VerifyReport r = verify_solution(p.m, p.sol);
  const std::string text = r.to_text();
  CHECK(text.find("T3") != std::string::npos);
  CHECK(text.find("bounds") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= static_cast<long>(r.violations.size()));
}
