#pragma once

// Domain model for TSN configuration synthesis: network graph, applications
// (task DAGs with streams), global TESLA/Ethernet constants and the derived
// security applications.

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tsnsynth {

/// Time in integer microseconds.
using Micros = std::int64_t;
/// Exact rational, used for link speeds (bytes per microsecond) and utilizations.
using Rational = boost::rational<std::int64_t>;

using NodeId = std::int32_t;
using LinkId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a synthesis stage proves an instance cannot be configured.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string stage, std::string entity, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), entity_(std::move(entity)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string stage_;
  std::string entity_;
};

enum class NodeKind { EndSystem, Switch };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::EndSystem;
  Micros hash_time = 0;  // end systems only
  double x = 0.0;        // layout hint, used by the generator and renderer
  double y = 0.0;
};

struct Link {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  Rational speed{1};  // bytes per microsecond
};

/// Speed of an Ethernet link given in Mbit/s, as bytes per microsecond.
inline Rational speed_from_mbps(std::int64_t mbps) { return Rational(mbps, 8); }

/// ceil(bytes / speed) in microseconds.
Micros transmission_time(std::int64_t bytes, const Rational& speed);

class Network {
 public:
  NodeId add_node(Node node);
  LinkId add_link(NodeId src, NodeId dst, Rational speed);
  /// Adds both directions of a full-duplex link.
  void add_duplex(NodeId a, NodeId b, Rational speed);

  std::optional<NodeId> find_node(std::string_view id) const;
  NodeId node_id(std::string_view id) const;  // throws ModelError
  std::optional<LinkId> find_link(NodeId src, NodeId dst) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const Node& node(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)); }
  const Link& link(LinkId l) const { return links_.at(static_cast<std::size_t>(l)); }
  const std::vector<LinkId>& out_links(NodeId n) const { return out_.at(static_cast<std::size_t>(n)); }
  bool is_end_system(NodeId n) const { return node(n).kind == NodeKind::EndSystem; }
  std::size_t switch_count() const;
  std::string link_name(LinkId l) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  std::unordered_map<std::string, NodeId> by_id_;
};

enum class AppKind { Normal, Security };
enum class TaskRole { Normal, KeyRelease, KeyVerify };

struct Task {
  std::string id;
  int app = -1;
  NodeId es = kNoNode;
  Micros wcet = 0;
  Micros period = 0;
  TaskRole role = TaskRole::Normal;
  NodeId key_source = kNoNode;  // key verification tasks: ES whose key is verified
};

struct Stream {
  std::string id;
  int app = -1;
  int sender = -1;              // task index
  std::vector<int> receivers;   // task indices
  std::int64_t size = 0;        // payload bytes
  Micros period = 0;
  int rl = 1;
  bool secure = false;
  bool key_stream = false;
};

/// One redundant copy s^i of a stream; routed and scheduled independently.
struct SubStream {
  int stream = -1;
  int copy = 0;
  std::string id;
};

/// ES-internal data dependency (no network traffic, precedence only).
struct Dependency {
  int from = -1;
  int to = -1;
};

struct Application {
  std::string id;
  AppKind kind = AppKind::Normal;
  Micros period = 0;  // security applications: P_int once bound, 0 before
  std::vector<int> tasks;
  std::vector<int> streams;
  std::vector<Dependency> dependencies;
  NodeId key_source = kNoNode;  // security applications: the sending ES
};

struct GlobalConstants {
  std::int64_t header_overhead = 0;
  std::int64_t mtu = 1500;
  std::int64_t key_size = 16;
  std::int64_t mac_size = 16;
  Micros sync_precision = 0;  // carried as metadata, no constraint uses it
};

struct SystemModel {
  Network network;
  GlobalConstants constants;
  std::vector<Application> apps;
  std::vector<Task> tasks;
  std::vector<Stream> streams;
  std::vector<SubStream> substreams;
  Micros p_int = 0;  // 0 until bound

  std::optional<int> find_task(std::string_view id) const;
  std::optional<int> find_stream(std::string_view id) const;
  std::optional<int> find_app(std::string_view id) const;
  std::optional<int> find_substream(std::string_view id) const;

  /// Bytes on the wire: payload + header overhead (+ MAC for secure streams).
  std::int64_t wire_size(int stream) const;
  NodeId sender_es(int stream) const { return tasks.at(static_cast<std::size_t>(streams.at(static_cast<std::size_t>(stream)).sender)).es; }
  /// Sorted, de-duplicated receiver end systems of a stream.
  std::vector<NodeId> receiver_es(int stream) const;
  /// Index range of the sub-streams of a stream (copies are contiguous).
  std::vector<int> copies_of(int stream) const;
  bool has_security_apps() const;
  std::vector<int> normal_apps() const;
  std::vector<int> security_apps() const;
  /// Key verification task on `es` verifying keys of `source`, if any.
  std::optional<int> key_verify_task(NodeId source, NodeId es) const;
  /// Hyperperiod over all applications with a bound period.
  Micros hyperperiod() const;
  /// Distinct periods of all applications (bound only), ascending.
  std::vector<Micros> periods() const;
};

/// Rebuilds the explicit sub-stream list from the streams' redundancy levels.
void materialize_substreams(SystemModel& model);

/// lcm of the given periods; throws ModelError on an empty set or a nonpositive period.
Micros hyperperiod(std::span<const Micros> periods);

/// Longest chain of secure streams in an application DAG.
int communication_depth(const SystemModel& model, int app);

/// Adds one key authentication application per end system that sends secure
/// streams. Idempotent. The security applications keep period 0 until
/// bind_p_int is called.
SystemModel expand_security_model(SystemModel model);

/// Assigns the TESLA interval to every security application, its tasks and streams.
void bind_p_int(SystemModel& model, Micros p_int);

/// Returns a copy with all streams non-secure / all redundancy levels 1.
SystemModel without_security(SystemModel model);
SystemModel without_redundancy(SystemModel model);

struct Diagnostic {
  std::string code;
  std::string message;
};

/// All well-formedness violations; empty iff the model is well formed.
std::vector<Diagnostic> validate_model(const SystemModel& model);

}  // namespace tsnsynth
