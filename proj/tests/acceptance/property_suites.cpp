#include "property_suites.hpp"

#include "tsnsynth/annealer.hpp"
#include "tsnsynth/exact.hpp"
#include "tsnsynth/heuristic.hpp"
#include "tsnsynth/tesla.hpp"
#include "tsnsynth/toolkit.hpp"
#include "tsnsynth/verify.hpp"

#include <map>
#include <numeric>
#include <sstream>

using namespace tsnsynth;

namespace props {

namespace {

struct Failures {
  int checks = 0;
  int failed = 0;
  std::string first;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failed++ == 0) first = what;
  }
  SuiteResult result(std::string name) const {
    std::ostringstream os;
    os << checks << " checks";
    if (failed) os << ", " << failed << " failed, first: " << first;
    return {std::move(name), failed == 0 && checks > 0, os.str()};
  }
};

// Prepared tiny instances that have a key interval.
std::vector<SystemModel> tiny_models(int count, std::uint64_t first_seed = 1) {
  std::vector<SystemModel> out;
  for (std::uint64_t seed = first_seed; static_cast<int>(out.size()) < count && seed < first_seed + 10 * count; ++seed) {
    SystemModel m = generate_case(tiny_spec(seed));
    if (prepare_model(m)) out.push_back(std::move(m));
  }
  return out;
}

Micros ceil_div(Rational r) {
  Micros whole = r.numerator() / r.denominator();
  if (whole * r.denominator() < r.numerator()) ++whole;
  return whole;
}

// Links of a copy in the order used by the schedule, rebuilt from the
// predecessor map: breadth-first from the sender, children by link id.
std::vector<LinkId> bfs_links(const SystemModel& m, const RouteAssignment& r, int sub) {
  const Network& net = m.network;
  const auto& pred = r.pred[static_cast<std::size_t>(sub)];
  NodeId root = kNoNode;
  std::vector<std::vector<LinkId>> out(net.nodes().size());
  for (std::size_t v = 0; v < pred.size(); ++v) {
    if (pred[v] == static_cast<NodeId>(v)) root = static_cast<NodeId>(v);
    else if (pred[v] != kNoNode) out[static_cast<std::size_t>(pred[v])].push_back(*net.find_link(pred[v], static_cast<NodeId>(v)));
  }
  std::vector<LinkId> order;
  std::vector<NodeId> queue{root};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    auto kids = out[static_cast<std::size_t>(queue[i])];
    std::sort(kids.begin(), kids.end());
    for (LinkId l : kids) {
      order.push_back(l);
      queue.push_back(net.link(l).dst);
    }
  }
  return order;
}

// Per resource (ESs, then links): how many instances cover each microsecond of the hyperperiod.
std::vector<std::vector<int>> hyper_timeline(const SystemModel& m, const RouteAssignment& r, const Schedule& s) {
  Micros h = 1;
  for (const auto& t : m.tasks) h = std::lcm(h, t.period);
  for (const auto& st : m.streams) h = std::lcm(h, st.period);
  const Network& net = m.network;
  std::vector<std::vector<int>> busy(net.nodes().size() + net.links().size(), std::vector<int>(static_cast<std::size_t>(h), 0));
  auto mark = [&](std::size_t res, Micros o, Micros len, Micros period) {
    if (o < 0) return;
    for (Micros k = 0; k < h; k += period)
      for (Micros x = o + k; x < o + k + len; ++x) ++busy[res][static_cast<std::size_t>(x % h)];
  };
  for (std::size_t t = 0; t < m.tasks.size(); ++t)
    mark(static_cast<std::size_t>(m.tasks[t].es), s.task_offsets[t], m.tasks[t].wcet, m.tasks[t].period);
  for (std::size_t c = 0; c < m.substreams.size(); ++c) {
    const CopySchedule& cs = s.copies[c];
    if (!cs.scheduled) continue;
    const Stream& st = m.streams[static_cast<std::size_t>(m.substreams[c].stream)];
    const std::int64_t bytes = st.size + m.constants.header_overhead + (st.secure ? m.constants.mac_size : 0);
    const auto links = bfs_links(m, r, static_cast<int>(c));
    for (std::size_t i = 0; i < links.size(); ++i)
      mark(net.nodes().size() + static_cast<std::size_t>(links[i]), cs.link_offsets[i],
           ceil_div(Rational(bytes) / net.link(links[i]).speed), st.period);
    if (st.secure) {
      const NodeId root = m.tasks[static_cast<std::size_t>(st.sender)].es;
      mark(static_cast<std::size_t>(root), cs.mac_gen, net.node(root).hash_time, st.period);
      std::vector<NodeId> recv;
      for (int t : st.receivers) recv.push_back(m.tasks[static_cast<std::size_t>(t)].es);
      std::sort(recv.begin(), recv.end());
      recv.erase(std::unique(recv.begin(), recv.end()), recv.end());
      for (std::size_t i = 0; i < recv.size(); ++i)
        mark(static_cast<std::size_t>(recv[i]), cs.mac_val[i], net.node(recv[i]).hash_time, st.period);
    }
  }
  return busy;
}

}  // namespace

SuiteResult folding_vs_timeline() {
  Failures f;
  // Raw folding: free(target) against marking the common hyperperiod.
  Rng rng(2024);
  const std::vector<Micros> periods{4, 6, 8, 12, 24};
  for (int trial = 0; trial < 300; ++trial) {
    ResourceTimeline tl;
    std::vector<Occupancy> occ;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i) {
      const Micros p = periods[static_cast<std::size_t>(rng.uniform_int(0, 4))];
      const Micros len = rng.uniform_int(1, p);
      const Occupancy o{rng.uniform_int(0, p - len), len, p, i};
      tl.add(o);
      occ.push_back(o);
    }
    for (Micros target : periods) {
      Micros h = target;
      for (const auto& o : occ) h = std::lcm(h, o.period);
      std::vector<char> line(static_cast<std::size_t>(h), 0);
      for (const auto& o : occ)
        for (Micros k = 0; k < h; k += o.period)
          for (Micros x = o.offset + k; x < o.offset + k + o.length; ++x) line[static_cast<std::size_t>(x % h)] = 1;
      const IntervalSet& free = tl.free(target);
      for (Micros x = 0; x < target; ++x) {
        bool hit = false;
        for (Micros y = x; y < h; y += target) hit = hit || line[static_cast<std::size_t>(y)];
        f.expect(free.contains(x) == !hit, "fold mismatch at " + std::to_string(x) + " for period " + std::to_string(target));
      }
    }
  }
  // Schedules built on folded timelines never double-book a hyperperiod instant.
  for (const SystemModel& m : tiny_models(25)) {
    RouteResult r;
    try {
      r = optimize_routes_exact(m);
    } catch (const InfeasibleError&) {
      continue;
    }
    AsapScheduler s(m, r.assign);
    s.schedule(s.graph().initial_order(m));
    s.optimize_latency();
    const auto busy = hyper_timeline(m, r.assign, s.to_schedule());
    bool clean = true;
    for (const auto& res : busy)
      for (int c : res) clean = clean && c <= 1;
    f.expect(clean, "double booking in a list schedule");
  }
  return f.result("folding vs hyperperiod timeline");
}

SuiteResult p_int_maximality() {
  Failures f;
  Rng rng(99);
  const std::vector<Micros> base{1000, 1500, 2000, 2500, 3000, 5000, 6000, 10000};
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<AppTiming> apps;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i)
      apps.push_back({"a" + std::to_string(i), base[static_cast<std::size_t>(rng.uniform_int(0, 7))],
                      static_cast<int>(rng.uniform_int(0, 5))});
    Micros h = 1, g = 0;
    for (const auto& a : apps) h = std::lcm(h, a.period), g = std::gcd(g, a.period);
    Micros want = 0;
    for (Micros p = h; p >= 1 && want == 0; --p) {
      if (h % p) continue;
      bool ok = p % g == 0 || g % p == 0;
      for (const auto& a : apps) ok = ok && p * (a.depth + 1) <= a.period;
      if (ok) want = p;
    }
    try {
      const Micros got = optimize_p_int(apps, h);
      f.expect(got == want, "P_int " + std::to_string(got) + " expected " + std::to_string(want));
    } catch (const InfeasibleError&) {
      f.expect(want == 0, "optimizer gave up although " + std::to_string(want) + " fits");
    }
  }
  return f.result("P_int maximality");
}

SuiteResult latency_monotonicity() {
  Failures f;
  for (const SystemModel& m : tiny_models(40, 100)) {
    RouteResult r;
    try {
      r = optimize_routes_exact(m);
    } catch (const InfeasibleError&) {
      continue;
    }
    AsapScheduler s(m, r.assign);
    s.schedule(s.graph().initial_order(m));
    const Schedule before = s.to_schedule();
    const auto bad_before = s.infeasible_apps();
    s.optimize_latency();
    const Schedule after = s.to_schedule();
    f.expect(s.infeasible_apps() == bad_before, "optimization changed the infeasible set");
    for (std::size_t a = 0; a < m.apps.size(); ++a) {
      const auto lb = app_latency(m, before, static_cast<int>(a));
      const auto la = app_latency(m, after, static_cast<int>(a));
      if (lb && la) f.expect(*la <= *lb, "latency of " + m.apps[a].id + " grew");
    }
    f.expect(total_latency(m, after) <= total_latency(m, before), "total latency grew");
    if (bad_before.empty()) {
      Solution sol;
      sol.routes = r.assign;
      sol.schedule = after;
      sol.p_int = m.p_int;
      f.expect(verify_solution(m, sol).ok(), "optimized schedule fails verification");
    }
  }
  return f.result("latency optimization monotonicity");
}

SuiteResult gcl_round_trip() {
  Failures f;
  for (const SystemModel& base : tiny_models(20, 300)) {
    SystemModel m = base;
    SAParams p;
    p.seed = 5;
    p.max_iterations = 100;
    const SAResult res = anneal(m, p);
    if (!res.solution.feasible()) continue;
    const Solution& sol = res.solution;
    Micros h = 1;
    for (const auto& st : m.streams) h = std::lcm(h, st.period);
    for (const auto& t : m.tasks) h = std::lcm(h, t.period);
    std::vector<IntervalSet> blocks(m.network.links().size());
    for (std::size_t c = 0; c < m.substreams.size(); ++c) {
      const Stream& st = m.streams[static_cast<std::size_t>(m.substreams[c].stream)];
      const std::int64_t bytes = st.size + m.constants.header_overhead + (st.secure ? m.constants.mac_size : 0);
      const auto links = bfs_links(m, sol.routes, static_cast<int>(c));
      for (std::size_t i = 0; i < links.size(); ++i) {
        const Micros len = ceil_div(Rational(bytes) / m.network.link(links[i]).speed);
        for (Micros k = 0; k < h; k += st.period)
          blocks[static_cast<std::size_t>(links[i])].add(sol.schedule.copies[c].link_offsets[i] + k,
                                                         sol.schedule.copies[c].link_offsets[i] + k + len);
      }
    }
    const auto gcls = export_gcl(m, sol);
    f.expect(gcls.size() == blocks.size(), "one list per link");
    for (const auto& g : gcls) {
      f.expect(g.cycle == h, "cycle is the hyperperiod");
      f.expect(gate_windows(g) == blocks[static_cast<std::size_t>(g.link)], "gate windows differ on " + g.port);
      for (std::size_t i = 1; i < g.events.size(); ++i) f.expect(g.events[i - 1].time < g.events[i].time, "events out of order");
    }
  }
  return f.result("GCL round trip");
}

SuiteResult determinism() {
  Failures f;
  for (std::uint64_t seed : {3u, 8u, 21u}) {
    f.expect(model_to_json(generate_case(tiny_spec(seed))) == model_to_json(generate_case(tiny_spec(seed))), "generator");
    TestCaseSpec big;
    big.seed = seed;
    f.expect(model_to_json(generate_case(big)) == model_to_json(generate_case(big)), "generator, default scale");

    SystemModel m = generate_case(tiny_spec(seed));
    if (!prepare_model(m)) continue;
    SAParams p;
    p.seed = seed;
    p.max_iterations = 120;
    const SAResult a = anneal(m, p), b = anneal(m, p);
    f.expect(solution_to_json(m, a.solution) == solution_to_json(m, b.solution), "annealer");
    f.expect(render_svg(m, a.solution, RenderTarget::Gantt) == render_svg(m, b.solution, RenderTarget::Gantt), "render");

    SystemModel e1 = generate_case(tiny_spec(seed)), e2 = generate_case(tiny_spec(seed));
    try {
      const Solution x = solve_pipeline_exact(e1), y = solve_pipeline_exact(e2);
      if (x.optimal && y.optimal) f.expect(solution_to_json(e1, x) == solution_to_json(e2, y), "exact");
    } catch (const InfeasibleError&) {
    }
  }
  ExperimentConfig cfg;
  cfg.cases = {tiny_spec(2), tiny_spec(6)};
  cfg.sa.max_iterations = 40;
  cfg.workers = 3;
  const std::string one = experiment_csv(run_experiment(cfg), false);
  cfg.workers = 1;
  f.expect(one == experiment_csv(run_experiment(cfg), false), "experiment table");
  return f.result("determinism under fixed seeds");
}

std::vector<std::function<SuiteResult()>> all_suites() {
  return {folding_vs_timeline, p_int_maximality, latency_monotonicity, gcl_round_trip, determinism};
}

}  // namespace props
