#include "tsnsynth/toolkit.hpp"
#include "tsnsynth/verify.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

namespace tsnsynth {

double mean_link_utilization(const SystemModel& model, const RouteAssignment& routes) {
  const auto util = bandwidth_utilization(model, routes);
  if (util.empty()) return 0;
  double sum = 0;
  for (const Rational& u : util) sum += boost::rational_cast<double>(u);
  return sum / static_cast<double>(util.size());
}

double mean_es_utilization(const SystemModel& model) {
  const Network& net = model.network;
  std::vector<double> load(net.nodes().size(), 0.0);
  for (const Task& t : model.tasks)
    if (t.period > 0) load[static_cast<std::size_t>(t.es)] += static_cast<double>(t.wcet) / static_cast<double>(t.period);
  for (const SubStream& c : model.substreams) {
    const Stream& s = model.streams[static_cast<std::size_t>(c.stream)];
    if (!s.secure || s.period <= 0) continue;
    const NodeId src = model.sender_es(c.stream);
    load[static_cast<std::size_t>(src)] += static_cast<double>(net.node(src).hash_time) / static_cast<double>(s.period);
    for (NodeId r : model.receiver_es(c.stream))
      load[static_cast<std::size_t>(r)] += static_cast<double>(net.node(r).hash_time) / static_cast<double>(s.period);
  }
  double sum = 0;
  int count = 0;
  for (std::size_t i = 0; i < load.size(); ++i)
    if (net.is_end_system(static_cast<NodeId>(i))) sum += load[i], ++count;
  return count ? sum / count : 0;
}

namespace {

struct Job {
  int case_index;
  bool security;
  bool redundancy;
  bool exact;
};

ExperimentRow run_job(const ExperimentConfig& cfg, const Job& job) {
  const TestCaseSpec& spec = cfg.cases[static_cast<std::size_t>(job.case_index)];
  ExperimentRow row;
  row.label = spec.label;
  row.case_index = job.case_index;
  row.seed = spec.seed;
  row.security = job.security;
  row.redundancy = job.redundancy;
  row.engine = job.exact ? "exact" : "sa";
  try {
    SystemModel m = generate_case(spec);
    if (!job.security) m = without_security(std::move(m));
    if (!job.redundancy) m = without_redundancy(std::move(m));
    if (!prepare_model(m)) {
      row.error = "no key disclosure interval fits";
      return row;
    }
    row.cpu = mean_es_utilization(m);
    const auto start = std::chrono::steady_clock::now();
    Solution sol;
    if (job.exact) {
      sol = solve_pipeline_exact(m, cfg.exact);
      row.cost = static_cast<double>(sol.routing_cost + sol.schedule_cost);
    } else {
      const SAResult r = anneal(m, cfg.sa);
      sol = r.solution;
      row.cost = r.cost;
      row.first_feasible_seconds = r.first_feasible_seconds;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (job.exact && sol.feasible()) row.first_feasible_seconds = row.seconds;
    row.feasible = sol.feasible();
    row.routing_cost = route_length(sol.routes);
    row.schedule_cost = total_latency(m, sol.schedule);
    row.bandwidth = mean_link_utilization(m, sol.routes);
    if (row.feasible) row.violations = verify_solution(m, sol, Strictness::Printed).violations.size();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  validate_params(cfg.sa);
  for (const auto& c : cfg.cases) validate_spec(c);
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cfg.cases.size(); ++c) {
    // Baseline (neither measure) first, as in the usual table layout.
    std::vector<std::pair<bool, bool>> variants = {{true, true}};
    if (cfg.toggles) variants = {{false, false}, {false, true}, {true, false}, {true, true}};
    for (auto [sec, red] : variants) {
      if (cfg.run_exact) jobs.push_back({static_cast<int>(c), sec, red, true});
      if (cfg.run_sa) jobs.push_back({static_cast<int>(c), sec, red, false});
    }
  }
  std::vector<ExperimentRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) rows[i] = run_job(cfg, jobs[i]);
  };
  const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string experiment_csv(const std::vector<ExperimentRow>& rows, bool timing) {
  std::ostringstream os;
  os << "label,case,seed,security,redundancy,engine,feasible,cost,routing_cost,schedule_cost,seconds,first_feasible,bandwidth,cpu,"
        "violations,error\n";
  for (const ExperimentRow& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ' ';
    os << r.label << ',' << r.case_index << ',' << r.seed << ',' << r.security << ',' << r.redundancy << ',' << r.engine << ','
       << r.feasible << ',' << fixed(r.cost, 1) << ',' << r.routing_cost << ',' << r.schedule_cost << ','
       << (timing ? fixed(r.seconds, 3) : "") << ','
       << (timing && r.first_feasible_seconds ? fixed(*r.first_feasible_seconds, 3) : "") << ',' << fixed(r.bandwidth, 6) << ','
       << fixed(r.cpu, 6) << ',' << r.violations << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace tsnsynth
