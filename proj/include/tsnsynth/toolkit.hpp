#pragma once

// Model construction, file formats, test-case generation, GCL export, SVG
// rendering and the batch experiment driver.

#include "tsnsynth/annealer.hpp"
#include "tsnsynth/exact.hpp"
#include "tsnsynth/interval_set.hpp"
#include "tsnsynth/model.hpp"
#include "tsnsynth/solution.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsnsynth {

/// Builds a model by string ids. build() materializes the sub-streams.
class ModelBuilder {
 public:
  explicit ModelBuilder(GlobalConstants constants = {});

  NodeId end_system(const std::string& id, Micros hash_time, double x = 0, double y = 0);
  NodeId switch_node(const std::string& id, double x = 0, double y = 0);
  void duplex(const std::string& a, const std::string& b, Rational speed);
  void link(const std::string& src, const std::string& dst, Rational speed);
  int application(const std::string& id, Micros period);
  int task(int app, const std::string& id, const std::string& es, Micros wcet);
  int stream(int app, const std::string& id, const std::string& sender, const std::vector<std::string>& receivers,
             std::int64_t size, int rl = 1, bool secure = false);
  void dependency(int app, const std::string& from, const std::string& to);

  SystemModel& model() { return model_; }
  SystemModel build() const;

 private:
  int task_index(const std::string& id) const;
  SystemModel model_;
};

// ---- file formats (JSON) ----

/// Normal applications only; security applications are derived on load by the caller.
std::string model_to_json(const SystemModel& model);
SystemModel model_from_json(const std::string& text);
SystemModel load_model(const std::string& path);
void save_model(const std::string& path, const SystemModel& model);

/// Solutions refer to sub-streams, tasks and links by id.
std::string solution_to_json(const SystemModel& model, const Solution& solution);
Solution solution_from_json(const SystemModel& model, const std::string& text);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Overrides SAParams fields present in a JSON object {"sa": {...}}.
void apply_sa_config(const std::string& json_text, SAParams& params);

// ---- generator ----

struct TestCaseSpec {
  std::string label = "case";
  int n_es = 16;
  int n_sw = 8;
  std::int64_t link_mbps = 1000;
  Micros hash_time = 10;
  int tasks = 24;               // DAG nodes, spread over the layers
  int layers = 3;
  double edge_prob = 0.5;
  std::int64_t min_size = 1;
  std::int64_t max_size = 1500;
  double wcet_cap = 0.06;       // WCET up to this fraction of the period
  double secure_prob = 0.3;
  int rl_min = 1;
  int rl_max = 3;
  std::vector<Micros> periods{10000, 15000, 20000, 50000};
  int max_apps = 0;             // 0: keep every connected component
  std::uint64_t seed = 1;
  GlobalConstants constants{};
};

/// Throws std::invalid_argument on out-of-range fields.
void validate_spec(const TestCaseSpec& spec);

/// Random plane layout; switches joined to their nearest switches up to degree
/// 4, end systems to their 3 nearest switches. Components are bridged by their
/// closest switch pair so the switch fabric is connected.
Network generate_topology(int n_sw, int n_es, std::uint64_t seed, Rational speed, Micros hash_time = 10);

/// Layered random DAGs over `net`'s end systems; one application per
/// connected component. Returns the unexpanded model.
SystemModel generate_applications(const TestCaseSpec& spec, Network net);

/// Topology and applications for one spec.
SystemModel generate_case(const TestCaseSpec& spec);

/// Small instances for cross-checking the two engines: at most 4 end systems,
/// 2 switches and 3 applications.
TestCaseSpec tiny_spec(std::uint64_t seed);

/// Expands security, chooses and binds P_int. Returns false if no interval fits.
bool prepare_model(SystemModel& model);

// ---- gate control lists ----

struct GateEvent {
  Micros time = 0;
  bool open = false;

  bool operator==(const GateEvent&) const = default;
};

struct GateControlList {
  LinkId link = -1;
  std::string port;  // "src->dst"
  Micros cycle = 0;  // hyperperiod
  std::vector<GateEvent> events;

  bool operator==(const GateControlList&) const = default;
};

/// One list per link, over one hyperperiod. Throws std::invalid_argument when
/// the solution is infeasible.
std::vector<GateControlList> export_gcl(const SystemModel& model, const Solution& solution);

/// Per link: union of all frame transmissions over the hyperperiod.
std::vector<IntervalSet> frame_windows(const SystemModel& model, const Solution& solution);
/// Open windows described by a list.
IntervalSet gate_windows(const GateControlList& gcl);

std::string gcl_to_text(const std::vector<GateControlList>& gcls);

// ---- rendering ----

enum class RenderTarget { Gantt, Routes };

/// Standalone SVG document. Deterministic for a given input.
std::string render_svg(const SystemModel& model, const Solution& solution, RenderTarget target);

// ---- experiments ----

struct ExperimentConfig {
  std::vector<TestCaseSpec> cases;
  bool run_exact = false;
  bool run_sa = true;
  /// Four variants per case: security and redundancy each on or off.
  bool toggles = true;
  SAParams sa;
  PipelineOptions exact;
  int workers = 1;
};

struct ExperimentRow {
  std::string label;
  int case_index = 0;
  std::uint64_t seed = 0;
  bool security = true;
  bool redundancy = true;
  std::string engine;
  bool feasible = false;
  double cost = 0;
  std::int64_t routing_cost = 0;
  std::int64_t schedule_cost = 0;
  double seconds = 0;
  std::optional<double> first_feasible_seconds;
  double bandwidth = 0;  // mean link utilization
  double cpu = 0;        // mean end-system utilization
  std::size_t violations = 0;
  std::string error;
};

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);
/// Timing columns are left empty when `timing` is false, which makes reruns byte-identical.
std::string experiment_csv(const std::vector<ExperimentRow>& rows, bool timing = true);

double mean_link_utilization(const SystemModel& model, const RouteAssignment& routes);
/// Mean over end systems of task and MAC operation load per unit time.
double mean_es_utilization(const SystemModel& model);

}  // namespace tsnsynth
