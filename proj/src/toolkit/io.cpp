#include "tsnsynth/tesla.hpp"
#include "tsnsynth/toolkit.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tsnsynth {

using nlohmann::json;

ModelBuilder::ModelBuilder(GlobalConstants constants) { model_.constants = constants; }

NodeId ModelBuilder::end_system(const std::string& id, Micros hash_time, double x, double y) {
  return model_.network.add_node({id, NodeKind::EndSystem, hash_time, x, y});
}

NodeId ModelBuilder::switch_node(const std::string& id, double x, double y) {
  return model_.network.add_node({id, NodeKind::Switch, 0, x, y});
}

void ModelBuilder::duplex(const std::string& a, const std::string& b, Rational speed) {
  model_.network.add_duplex(model_.network.node_id(a), model_.network.node_id(b), speed);
}

void ModelBuilder::link(const std::string& src, const std::string& dst, Rational speed) {
  model_.network.add_link(model_.network.node_id(src), model_.network.node_id(dst), speed);
}

int ModelBuilder::application(const std::string& id, Micros period) {
  Application a;
  a.id = id;
  a.period = period;
  model_.apps.push_back(a);
  return static_cast<int>(model_.apps.size()) - 1;
}

int ModelBuilder::task_index(const std::string& id) const {
  auto t = model_.find_task(id);
  if (!t) throw ModelError("unknown task " + id);
  return *t;
}

int ModelBuilder::task(int app, const std::string& id, const std::string& es, Micros wcet) {
  Task t;
  t.id = id;
  t.app = app;
  t.es = model_.network.node_id(es);
  t.wcet = wcet;
  t.period = model_.apps.at(static_cast<std::size_t>(app)).period;
  const int idx = static_cast<int>(model_.tasks.size());
  model_.tasks.push_back(t);
  model_.apps[static_cast<std::size_t>(app)].tasks.push_back(idx);
  return idx;
}

int ModelBuilder::stream(int app, const std::string& id, const std::string& sender, const std::vector<std::string>& receivers,
                         std::int64_t size, int rl, bool secure) {
  Stream s;
  s.id = id;
  s.app = app;
  s.sender = task_index(sender);
  for (const auto& r : receivers) s.receivers.push_back(task_index(r));
  s.size = size;
  s.period = model_.apps.at(static_cast<std::size_t>(app)).period;
  s.rl = rl;
  s.secure = secure;
  const int idx = static_cast<int>(model_.streams.size());
  model_.streams.push_back(s);
  model_.apps[static_cast<std::size_t>(app)].streams.push_back(idx);
  return idx;
}

void ModelBuilder::dependency(int app, const std::string& from, const std::string& to) {
  model_.apps.at(static_cast<std::size_t>(app)).dependencies.push_back({task_index(from), task_index(to)});
}

SystemModel ModelBuilder::build() const {
  SystemModel m = model_;
  materialize_substreams(m);
  return m;
}

namespace {

std::string speed_text(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational parse_speed(const json& l) {
  if (l.contains("speed_mbps")) return speed_from_mbps(l.at("speed_mbps").get<std::int64_t>());
  const json& s = l.at("speed");
  if (s.is_number_integer()) return Rational(s.get<std::int64_t>());
  const std::string text = s.get<std::string>();
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ModelError("bad link speed '" + text + "'");
  }
}

}  // namespace

std::string model_to_json(const SystemModel& model) {
  const Network& net = model.network;
  json j;
  j["constants"] = {{"header_overhead", model.constants.header_overhead},
                    {"mtu", model.constants.mtu},
                    {"key_size", model.constants.key_size},
                    {"mac_size", model.constants.mac_size},
                    {"sync_precision", model.constants.sync_precision}};
  json nodes = json::array();
  for (const Node& n : net.nodes()) {
    json o = {{"id", n.id}, {"kind", n.kind == NodeKind::EndSystem ? "es" : "sw"}, {"x", n.x}, {"y", n.y}};
    if (n.kind == NodeKind::EndSystem) o["hash_time"] = n.hash_time;
    nodes.push_back(o);
  }
  j["nodes"] = nodes;
  json links = json::array();
  for (const Link& l : net.links())
    links.push_back({{"src", net.node(l.src).id}, {"dst", net.node(l.dst).id}, {"speed", speed_text(l.speed)}});
  j["links"] = links;
  json apps = json::array();
  for (const Application& a : model.apps) {
    if (a.kind != AppKind::Normal) continue;
    json o = {{"id", a.id}, {"period", a.period}};
    json tasks = json::array();
    for (int t : a.tasks) {
      const Task& task = model.tasks[static_cast<std::size_t>(t)];
      tasks.push_back({{"id", task.id}, {"es", net.node(task.es).id}, {"wcet", task.wcet}});
    }
    o["tasks"] = tasks;
    json streams = json::array();
    for (int s : a.streams) {
      const Stream& st = model.streams[static_cast<std::size_t>(s)];
      json recv = json::array();
      for (int r : st.receivers) recv.push_back(model.tasks[static_cast<std::size_t>(r)].id);
      streams.push_back({{"id", st.id},
                         {"sender", model.tasks[static_cast<std::size_t>(st.sender)].id},
                         {"receivers", recv},
                         {"size", st.size},
                         {"rl", st.rl},
                         {"secure", st.secure}});
    }
    o["streams"] = streams;
    json deps = json::array();
    for (const Dependency& d : a.dependencies)
      deps.push_back({model.tasks[static_cast<std::size_t>(d.from)].id, model.tasks[static_cast<std::size_t>(d.to)].id});
    o["dependencies"] = deps;
    apps.push_back(o);
  }
  j["applications"] = apps;
  return j.dump(2) + "\n";
}

SystemModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
  try {
    GlobalConstants c;
    if (j.contains("constants")) {
      const json& k = j["constants"];
      c.header_overhead = k.value("header_overhead", c.header_overhead);
      c.mtu = k.value("mtu", c.mtu);
      c.key_size = k.value("key_size", c.key_size);
      c.mac_size = k.value("mac_size", c.mac_size);
      c.sync_precision = k.value("sync_precision", c.sync_precision);
    }
    ModelBuilder b(c);
    for (const json& n : j.at("nodes")) {
      const std::string kind = n.value("kind", "es");
      if (kind == "es") b.end_system(n.at("id"), n.value("hash_time", Micros{0}), n.value("x", 0.0), n.value("y", 0.0));
      else if (kind == "sw") b.switch_node(n.at("id"), n.value("x", 0.0), n.value("y", 0.0));
      else throw ModelError("unknown node kind '" + kind + "'");
    }
    for (const json& l : j.at("links")) {
      if (l.value("duplex", false)) b.duplex(l.at("src"), l.at("dst"), parse_speed(l));
      else b.link(l.at("src"), l.at("dst"), parse_speed(l));
    }
    for (const json& a : j.at("applications")) {
      const int app = b.application(a.at("id"), a.at("period").get<Micros>());
      for (const json& t : a.at("tasks")) b.task(app, t.at("id"), t.at("es"), t.at("wcet").get<Micros>());
      for (const json& s : a.value("streams", json::array()))
        b.stream(app, s.at("id"), s.at("sender"), s.at("receivers").get<std::vector<std::string>>(), s.at("size").get<std::int64_t>(),
                 s.value("rl", 1), s.value("secure", false));
      for (const json& d : a.value("dependencies", json::array())) b.dependency(app, d.at(0), d.at(1));
    }
    return b.build();
  } catch (const json::exception& e) {
    throw ModelError(std::string("invalid model document: ") + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

SystemModel load_model(const std::string& path) { return model_from_json(read_text(path)); }
void save_model(const std::string& path, const SystemModel& model) { write_text(path, model_to_json(model)); }

std::string solution_to_json(const SystemModel& model, const Solution& sol) {
  const Network& net = model.network;
  json j;
  j["p_int"] = sol.p_int;
  j["routing_cost"] = sol.routing_cost;
  j["schedule_cost"] = sol.schedule_cost;
  j["optimal"] = sol.optimal;
  j["infeasible_apps"] = sol.infeasible_apps;
  json tasks = json::object();
  for (std::size_t t = 0; t < model.tasks.size(); ++t) tasks[model.tasks[t].id] = sol.schedule.task_offsets.at(t);
  j["tasks"] = tasks;
  json copies = json::array();
  for (std::size_t c = 0; c < model.substreams.size(); ++c) {
    const RouteTree tree = route_tree(model, sol.routes, static_cast<int>(c));
    const CopySchedule& cs = sol.schedule.copies.at(c);
    json o = {{"id", model.substreams[c].id}, {"scheduled", cs.scheduled}};
    json links = json::array();
    for (std::size_t i = 0; i < tree.links.size(); ++i) {
      json l = {{"link", net.link_name(tree.links[i])}};
      if (cs.scheduled && i < cs.link_offsets.size()) l["offset"] = cs.link_offsets[i];
      links.push_back(l);
    }
    o["links"] = links;
    if (model.streams[static_cast<std::size_t>(model.substreams[c].stream)].secure && cs.scheduled) {
      o["mac_gen"] = cs.mac_gen;
      o["mac_val"] = cs.mac_val;
      o["interval"] = cs.auth_interval;
    }
    copies.push_back(o);
  }
  j["copies"] = copies;
  return j.dump(2) + "\n";
}

Solution solution_from_json(const SystemModel& model, const std::string& text) {
  const Network& net = model.network;
  Solution sol;
  try {
    const json j = json::parse(text);
    sol.p_int = j.value("p_int", Micros{0});
    sol.routing_cost = j.value("routing_cost", std::int64_t{0});
    sol.schedule_cost = j.value("schedule_cost", std::int64_t{0});
    sol.optimal = j.value("optimal", false);
    sol.infeasible_apps = j.value("infeasible_apps", std::vector<std::string>{});
    sol.schedule = empty_schedule(model);
    sol.routes = empty_assignment(model);
    for (const auto& [id, off] : j.at("tasks").items()) {
      auto t = model.find_task(id);
      if (!t) throw ModelError("solution names unknown task " + id);
      sol.schedule.task_offsets[static_cast<std::size_t>(*t)] = off.get<Micros>();
    }
    for (const json& o : j.at("copies")) {
      auto c = model.find_substream(o.at("id").get<std::string>());
      if (!c) throw ModelError("solution names unknown stream copy " + o.at("id").get<std::string>());
      const auto sub = static_cast<std::size_t>(*c);
      auto& pred = sol.routes.pred[sub];
      pred[static_cast<std::size_t>(model.sender_es(model.substreams[sub].stream))] = model.sender_es(model.substreams[sub].stream);
      std::vector<std::pair<LinkId, Micros>> offsets;
      for (const json& l : o.at("links")) {
        const std::string name = l.at("link");
        const auto arrow = name.find("->");
        if (arrow == std::string::npos) throw ModelError("bad link name " + name);
        const NodeId a = net.node_id(name.substr(0, arrow)), b = net.node_id(name.substr(arrow + 2));
        auto lid = net.find_link(a, b);
        if (!lid) throw ModelError("no link " + name);
        pred[static_cast<std::size_t>(b)] = a;
        offsets.push_back({*lid, l.value("offset", kUnscheduled)});
      }
      CopySchedule& cs = sol.schedule.copies[sub];
      cs.scheduled = o.value("scheduled", false);
      if (!cs.scheduled) continue;
      // Offsets are stored in tree order; re-derive it from the rebuilt route.
      const RouteTree tree = route_tree(model, sol.routes, *c);
      cs.link_offsets.assign(tree.links.size(), kUnscheduled);
      for (std::size_t i = 0; i < tree.links.size(); ++i)
        for (auto [lid, off] : offsets)
          if (lid == tree.links[i]) cs.link_offsets[i] = off;
      cs.mac_gen = o.value("mac_gen", kUnscheduled);
      cs.mac_val = o.value("mac_val", std::vector<Micros>{});
      cs.auth_interval = o.value("interval", std::int64_t{0});
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("invalid solution document: ") + e.what());
  }
  return sol;
}

void apply_sa_config(const std::string& json_text, SAParams& p) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  if (!j.contains("sa")) return;
  const json& s = j["sa"];
  p.t_start = s.value("t_start", p.t_start);
  p.alpha = s.value("alpha", p.alpha);
  p.k = s.value("k", p.k);
  p.p_rmv = s.value("p_rmv", p.p_rmv);
  p.a = s.value("a", p.a);
  p.b = s.value("b", p.b);
  p.w = s.value("w", p.w);
  p.seed = s.value("seed", p.seed);
  if (s.contains("max_iterations")) p.max_iterations = s["max_iterations"].get<std::int64_t>();
  if (s.contains("time_limit_ms")) p.time_limit = std::chrono::milliseconds(s["time_limit_ms"].get<std::int64_t>());
  p.stop_at_first_feasible = s.value("stop_at_first_feasible", p.stop_at_first_feasible);
  if (s.contains("target_cost")) p.target_cost = s["target_cost"].get<double>();
  p.heuristic.backtrack_cap = s.value("backtrack_cap", p.heuristic.backtrack_cap);
  validate_params(p);
}

bool prepare_model(SystemModel& model) {
  model = expand_security_model(std::move(model));
  Micros p;
  try {
    p = choose_p_int(model);
  } catch (const InfeasibleError&) {
    return false;
  }
  if (model.has_security_apps()) bind_p_int(model, p);
  else model.p_int = p;
  return true;
}

}  // namespace tsnsynth
