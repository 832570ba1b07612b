#include "tsnsynth/verify.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace tsnsynth {

namespace {

struct Instance {
  Micros begin;
  Micros end;
  int owner;  // index into the owner table
};

struct Owner {
  std::string entity;
  std::string kind;  // task, mac, frame
};

class Checker {
 public:
  Checker(const SystemModel& m, const Solution& sol, Strictness strictness)
      : m_(m), net_(m.network), sol_(sol), strictness_(strictness) {}

  VerifyReport run() {
    if (!shape_ok()) return std::move(report_);
    h_ = horizon();
    check_routes();
    for (std::size_t sub = 0; sub < m_.substreams.size(); ++sub) build_tree(static_cast<int>(sub));
    check_missing();
    check_tasks();
    for (std::size_t sub = 0; sub < m_.substreams.size(); ++sub) check_copy(static_cast<int>(sub));
    check_dependencies();
    check_latency();
    check_overlaps();
    check_isolation();
    return std::move(report_);
  }

 private:
  struct Tree {
    std::vector<LinkId> links;
    std::vector<int> parent;
    std::vector<NodeId> receivers;
    bool valid = false;
  };

  void add(std::string c, std::vector<std::string> entities, std::string detail, Micros time = -1) {
    report_.violations.push_back({std::move(c), std::move(entities), std::move(detail), time});
  }

  bool shape_ok() {
    if (sol_.schedule.task_offsets.size() != m_.tasks.size() || sol_.schedule.copies.size() != m_.substreams.size() ||
        sol_.routes.pred.size() != m_.substreams.size()) {
      add("missing", {}, "solution does not match the model's task and stream counts");
      return false;
    }
    return true;
  }

  Micros horizon() const {
    Micros h = 1;
    for (const auto& t : m_.tasks) h = std::lcm(h, std::max<Micros>(t.period, 1));
    for (const auto& s : m_.streams) h = std::lcm(h, std::max<Micros>(s.period, 1));
    return h;
  }

  Micros wire_time(int stream, LinkId l) const {
    const Stream& s = m_.streams[static_cast<std::size_t>(stream)];
    const std::int64_t bytes = s.size + m_.constants.header_overhead + (s.secure ? m_.constants.mac_size : 0);
    const Rational t = Rational(bytes) / net_.link(l).speed;
    Micros whole = t.numerator() / t.denominator();
    if (whole * t.denominator() < t.numerator()) ++whole;
    return whole;
  }

  void check_routes() {
    const std::size_t n = net_.nodes().size();
    std::vector<std::map<LinkId, std::set<int>>> users(m_.streams.size());
    for (std::size_t sub = 0; sub < m_.substreams.size(); ++sub) {
      const std::string& id = m_.substreams[sub].id;
      const int stream = m_.substreams[sub].stream;
      const auto& pred = sol_.routes.pred[sub];
      if (pred.size() != n) {
        add("R3", {id}, "route has the wrong size");
        continue;
      }
      const NodeId sender = m_.tasks[static_cast<std::size_t>(m_.streams[static_cast<std::size_t>(stream)].sender)].es;
      std::set<NodeId> receivers;
      for (int t : m_.streams[static_cast<std::size_t>(stream)].receivers) receivers.insert(m_.tasks[static_cast<std::size_t>(t)].es);
      if (pred[static_cast<std::size_t>(sender)] != sender) add("R3", {id}, "sender is not the route root");
      std::vector<int> kids(n, 0);
      for (std::size_t v = 0; v < n; ++v) {
        const NodeId node = static_cast<NodeId>(v);
        const NodeId p = pred[v];
        if (net_.is_end_system(node) && node != sender) {
          if (receivers.count(node) && p == kNoNode) add("R3", {id}, "receiver " + net_.node(node).id + " unreached");
          if (!receivers.count(node) && p != kNoNode) add("R3", {id}, net_.node(node).id + " is not a receiver");
        }
        if (p == kNoNode || node == sender) continue;
        auto l = (p >= 0 && static_cast<std::size_t>(p) < n) ? net_.find_link(p, node) : std::nullopt;
        if (!l) {
          add("R3", {id}, "no link into " + net_.node(node).id);
          continue;
        }
        users[static_cast<std::size_t>(stream)][*l].insert(static_cast<int>(sub));
        ++kids[static_cast<std::size_t>(p)];
        if (net_.is_end_system(p) && p != sender) add("R4", {id}, net_.node(p).id + " forwards traffic");
        NodeId cur = node;
        std::size_t steps = 0;
        while (cur != sender && cur != kNoNode && steps <= n) {
          const NodeId q = pred[static_cast<std::size_t>(cur)];
          cur = (q == cur) ? kNoNode : q;
          ++steps;
        }
        if (steps > n) add("R1", {id}, "cycle through " + net_.node(node).id);
        else if (cur != sender) add("R2", {id}, net_.node(node).id + " is not connected to the sender");
      }
      for (std::size_t v = 0; v < n; ++v)
        if (!net_.is_end_system(static_cast<NodeId>(v)) && pred[v] != kNoNode && kids[v] == 0)
          add("R2", {id}, "loose end at " + net_.node(static_cast<NodeId>(v)).id);
    }
    std::vector<Rational> load(net_.links().size(), Rational(0));
    for (std::size_t s = 0; s < m_.streams.size(); ++s) {
      const Stream& st = m_.streams[s];
      const std::int64_t bytes = st.size + m_.constants.header_overhead + (st.secure ? m_.constants.mac_size : 0);
      for (const auto& [l, subs] : users[s]) {
        if (st.period > 0) load[static_cast<std::size_t>(l)] += Rational(bytes, st.period);
        if (subs.size() > 1) {
          std::vector<std::string> ids;
          for (int c : subs) ids.push_back(m_.substreams[static_cast<std::size_t>(c)].id);
          add("R6", ids, "copies share link " + net_.link_name(l));
        }
      }
    }
    for (std::size_t l = 0; l < load.size(); ++l)
      if (load[l] > net_.link(static_cast<LinkId>(l)).speed)
        add("R5", {net_.link_name(static_cast<LinkId>(l))}, "bandwidth exceeded");
  }

  void build_tree(int sub) {
    Tree& t = trees_.emplace_back();
    const auto& pred = sol_.routes.pred[static_cast<std::size_t>(sub)];
    if (pred.size() != net_.nodes().size()) return;
    const int stream = m_.substreams[static_cast<std::size_t>(sub)].stream;
    const NodeId root = m_.tasks[static_cast<std::size_t>(m_.streams[static_cast<std::size_t>(stream)].sender)].es;
    std::set<NodeId> recv;
    for (int r : m_.streams[static_cast<std::size_t>(stream)].receivers) recv.insert(m_.tasks[static_cast<std::size_t>(r)].es);
    t.receivers.assign(recv.begin(), recv.end());
    std::vector<std::vector<LinkId>> out(net_.nodes().size());
    for (std::size_t v = 0; v < pred.size(); ++v) {
      const NodeId p = pred[v];
      if (p == kNoNode || p == static_cast<NodeId>(v) || p < 0) continue;
      if (auto l = net_.find_link(p, static_cast<NodeId>(v))) out[static_cast<std::size_t>(p)].push_back(*l);
    }
    std::deque<std::pair<NodeId, int>> q{{root, -1}};
    std::set<NodeId> seen{root};
    while (!q.empty()) {
      auto [u, via] = q.front();
      q.pop_front();
      auto kids = out[static_cast<std::size_t>(u)];
      std::sort(kids.begin(), kids.end());
      for (LinkId l : kids) {
        const NodeId v = net_.link(l).dst;
        if (!seen.insert(v).second) continue;
        t.links.push_back(l);
        t.parent.push_back(via);
        q.push_back({v, static_cast<int>(t.links.size()) - 1});
      }
    }
    t.valid = std::all_of(t.receivers.begin(), t.receivers.end(), [&](NodeId r) { return seen.count(r) > 0; });
  }

  int link_into(const Tree& t, NodeId n) const {
    for (std::size_t i = 0; i < t.links.size(); ++i)
      if (net_.link(t.links[i]).dst == n) return static_cast<int>(i);
    return -1;
  }

  void check_missing() {
    for (std::size_t t = 0; t < m_.tasks.size(); ++t)
      if (sol_.schedule.task_offsets[t] == kUnscheduled) add("missing", {m_.tasks[t].id}, "task is not scheduled");
    for (std::size_t c = 0; c < m_.substreams.size(); ++c)
      if (!sol_.schedule.copies[c].scheduled) add("missing", {m_.substreams[c].id}, "stream copy is not scheduled");
  }

  void bounds(const std::string& who, Micros o, Micros len, Micros period) {
    if (o < 0 || o + len > period) add("bounds", {who}, "occupancy [" + std::to_string(o) + ", " + std::to_string(o + len) + ") leaves its period", o);
  }

  int owner(std::string entity, std::string kind) {
    owners_.push_back({std::move(entity), std::move(kind)});
    return static_cast<int>(owners_.size()) - 1;
  }

  void occupy(std::size_t resource, Micros o, Micros len, Micros period, int who) {
    if (o < 0 || len <= 0 || period <= 0) return;
    for (Micros k = 0; k < h_; k += period) occupancy_[resource].push_back({o + k, o + len + k, who});
  }

  void check_tasks() {
    for (std::size_t t = 0; t < m_.tasks.size(); ++t) {
      const Task& task = m_.tasks[t];
      const Micros o = sol_.schedule.task_offsets[t];
      if (o == kUnscheduled) continue;
      bounds(task.id, o, task.wcet, task.period);
      occupy(static_cast<std::size_t>(task.es), o, task.wcet, task.period, owner(task.id, "task"));
    }
  }

  Micros task_end(int t) const {
    const Micros o = sol_.schedule.task_offsets[static_cast<std::size_t>(t)];
    return o == kUnscheduled ? kUnscheduled : o + m_.tasks[static_cast<std::size_t>(t)].wcet;
  }

  void check_copy(int sub) {
    const CopySchedule& cs = sol_.schedule.copies[static_cast<std::size_t>(sub)];
    if (!cs.scheduled) return;
    const Tree& tree = trees_[static_cast<std::size_t>(sub)];
    const std::string& id = m_.substreams[static_cast<std::size_t>(sub)].id;
    const int stream = m_.substreams[static_cast<std::size_t>(sub)].stream;
    const Stream& st = m_.streams[static_cast<std::size_t>(stream)];
    if (!tree.valid || cs.link_offsets.size() != tree.links.size() ||
        (st.secure && cs.mac_val.size() != tree.receivers.size())) {
      add("missing", {id}, "schedule does not match the route");
      return;
    }
    const Micros T = st.period;
    const std::size_t n_nodes = net_.nodes().size();
    std::vector<Micros> len(tree.links.size());
    for (std::size_t i = 0; i < tree.links.size(); ++i) {
      len[i] = wire_time(stream, tree.links[i]);
      const Micros o = cs.link_offsets[i];
      bounds(id, o, len[i], T);
      occupy(n_nodes + static_cast<std::size_t>(tree.links[i]), o, len[i], T, owner(id, "frame"));
      if (tree.parent[i] >= 0) {
        const auto p = static_cast<std::size_t>(tree.parent[i]);
        if (cs.link_offsets[p] + len[p] > o)
          add("S7", {id}, "frame leaves " + net_.link_name(tree.links[i]) + " before it arrives", o);
        if (!net_.is_end_system(net_.link(tree.links[i]).src))
          windows_[static_cast<std::size_t>(tree.links[i])].push_back(
              {sub, cs.link_offsets[p], strictness_ == Strictness::Printed ? o : o + len[i], T});
      }
    }
    const Micros sender_end = task_end(st.sender);
    const NodeId root = m_.tasks[static_cast<std::size_t>(st.sender)].es;
    std::vector<std::size_t> first;
    for (std::size_t i = 0; i < tree.links.size(); ++i)
      if (tree.parent[i] < 0) first.push_back(i);

    if (st.secure) {
      const Micros gen_len = net_.node(root).hash_time;
      bounds(id, cs.mac_gen, gen_len, T);
      occupy(static_cast<std::size_t>(root), cs.mac_gen, gen_len, T, owner(id, "mac"));
      if (sender_end != kUnscheduled && sender_end > cs.mac_gen)
        add("T2", {st.id, m_.tasks[static_cast<std::size_t>(st.sender)].id}, "MAC generation starts before the sender ends");
      for (std::size_t i : first)
        if (cs.mac_gen + gen_len > cs.link_offsets[i]) add("S7", {id}, "frame sent before its MAC is generated");

      Micros arrival = 0;
      for (NodeId r : tree.receivers) {
        const int li = link_into(tree, r);
        if (li >= 0) arrival = std::max(arrival, cs.link_offsets[static_cast<std::size_t>(li)] + len[static_cast<std::size_t>(li)]);
      }
      const Micros P = m_.p_int;
      if (P <= 0 || cs.auth_interval < 1 || cs.auth_interval * P <= arrival) {
        add("S5", {id}, "authentication interval " + std::to_string(cs.auth_interval) + " does not follow arrival " + std::to_string(arrival), arrival);
      }
      for (std::size_t r = 0; r < tree.receivers.size(); ++r) {
        const NodeId es = tree.receivers[r];
        const Micros val_len = net_.node(es).hash_time;
        const Micros o = cs.mac_val[r];
        bounds(id, o, val_len, T);
        occupy(static_cast<std::size_t>(es), o, val_len, T, owner(id, "mac"));
        const int li = link_into(tree, es);
        if (li >= 0 && cs.link_offsets[static_cast<std::size_t>(li)] + len[static_cast<std::size_t>(li)] > o)
          add("S7", {id}, "MAC validated before arrival on " + net_.node(es).id, o);
        std::optional<int> kv;
        for (std::size_t t = 0; t < m_.tasks.size(); ++t)
          if (m_.tasks[t].role == TaskRole::KeyVerify && m_.tasks[t].key_source == root && m_.tasks[t].es == es) kv = static_cast<int>(t);
        const Micros kv_end = kv ? task_end(*kv) : kUnscheduled;
        if (kv_end == kUnscheduled) {
          add("S6", {id, m_.apps[static_cast<std::size_t>(st.app)].id}, "no scheduled key verification on " + net_.node(es).id);
        } else if (o < kv_end + cs.auth_interval * P) {
          add("S6", {id, m_.tasks[static_cast<std::size_t>(*kv)].id}, "MAC validated before the key is verified", o);
        }
      }
    } else if (sender_end != kUnscheduled) {
      for (std::size_t i : first)
        if (sender_end > cs.link_offsets[i]) add("T2", {st.id, m_.tasks[static_cast<std::size_t>(st.sender)].id}, "frame sent before the sender ends");
    }

    for (int rt : st.receivers) {
      const Micros start = sol_.schedule.task_offsets[static_cast<std::size_t>(rt)];
      if (start == kUnscheduled) continue;
      const NodeId es = m_.tasks[static_cast<std::size_t>(rt)].es;
      Micros ready = 0;
      if (st.secure) {
        auto it = std::lower_bound(tree.receivers.begin(), tree.receivers.end(), es);
        ready = cs.mac_val[static_cast<std::size_t>(it - tree.receivers.begin())] + net_.node(es).hash_time;
      } else {
        const int li = link_into(tree, es);
        if (li >= 0) ready = cs.link_offsets[static_cast<std::size_t>(li)] + len[static_cast<std::size_t>(li)];
      }
      if (ready > start) add("T3", {id, m_.tasks[static_cast<std::size_t>(rt)].id}, "receiver starts before the frame is available", start);
    }
  }

  void check_dependencies() {
    for (const Application& a : m_.apps)
      for (const Dependency& d : a.dependencies) {
        const Micros end = task_end(d.from);
        const Micros start = sol_.schedule.task_offsets[static_cast<std::size_t>(d.to)];
        if (end != kUnscheduled && start != kUnscheduled && end > start)
          add("T2", {m_.tasks[static_cast<std::size_t>(d.from)].id, m_.tasks[static_cast<std::size_t>(d.to)].id}, "local dependency violated", start);
      }
  }

  void check_latency() {
    for (std::size_t a = 0; a < m_.apps.size(); ++a) {
      const Application& app = m_.apps[a];
      Micros lo = std::numeric_limits<Micros>::max(), hi = 0;
      bool complete = !app.tasks.empty();
      for (int t : app.tasks) {
        const Micros o = sol_.schedule.task_offsets[static_cast<std::size_t>(t)];
        if (o == kUnscheduled) complete = false;
        else {
          lo = std::min(lo, o);
          hi = std::max(hi, task_end(t));
        }
      }
      if (complete && hi - lo > app.period) add("S1", {app.id}, "latency exceeds the period");
    }
  }

  void check_overlaps() {
    const std::size_t n_nodes = net_.nodes().size();
    std::set<std::pair<int, int>> reported;
    for (auto& [res, inst] : occupancy_) {
      std::sort(inst.begin(), inst.end(), [](const Instance& a, const Instance& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.owner < b.owner;
      });
      std::vector<Instance> active;
      for (const Instance& x : inst) {
        active.erase(std::remove_if(active.begin(), active.end(), [&](const Instance& a) { return a.end <= x.begin; }), active.end());
        for (const Instance& a : active) {
          if (a.owner == x.owner) continue;
          const auto key = std::minmax(a.owner, x.owner);
          if (!reported.insert(key).second) continue;
          const Owner& p = owners_[static_cast<std::size_t>(a.owner)];
          const Owner& q = owners_[static_cast<std::size_t>(x.owner)];
          std::string c = "S8";
          if (res < n_nodes) {
            if (p.kind == "task" && q.kind == "task") c = "T4";
            else if (p.kind == "task" || q.kind == "task") c = "T5";
          }
          const std::string where = res < n_nodes ? net_.node(static_cast<NodeId>(res)).id
                                                  : net_.link_name(static_cast<LinkId>(res - n_nodes));
          add(c, {p.entity, q.entity}, "overlap on " + where, x.begin);
        }
        active.push_back(x);
      }
    }
  }

  void check_isolation() {
    for (auto& [link, wins] : windows_) {
      std::vector<Instance> inst;
      for (const Window& w : wins)
        for (Micros k = 0; k < h_; k += w.period) inst.push_back({w.begin + k, w.end + k, w.sub});
      std::sort(inst.begin(), inst.end(), [](const Instance& a, const Instance& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.owner < b.owner;
      });
      std::set<std::pair<int, int>> reported;
      std::vector<Instance> active;
      for (const Instance& x : inst) {
        active.erase(std::remove_if(active.begin(), active.end(), [&](const Instance& a) { return a.end <= x.begin; }), active.end());
        for (const Instance& a : active) {
          if (a.owner == x.owner || !reported.insert(std::minmax(a.owner, x.owner)).second) continue;
          add("S9", {m_.substreams[static_cast<std::size_t>(a.owner)].id, m_.substreams[static_cast<std::size_t>(x.owner)].id},
              "frames interleave in the queue of " + net_.link_name(static_cast<LinkId>(link)), x.begin);
        }
        active.push_back(x);
      }
    }
  }

  struct Window {
    int sub;
    Micros begin;
    Micros end;
    Micros period;
  };

  const SystemModel& m_;
  const Network& net_;
  const Solution& sol_;
  Strictness strictness_;
  Micros h_ = 1;
  VerifyReport report_;
  std::vector<Tree> trees_;
  std::vector<Owner> owners_;
  std::map<std::size_t, std::vector<Instance>> occupancy_;
  std::map<std::size_t, std::vector<Window>> windows_;
};

}  // namespace

std::size_t VerifyReport::count(std::string_view constraint) const {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [&](const Violation& v) { return v.constraint == constraint; }));
}

std::vector<std::string> VerifyReport::applications(const SystemModel& model) const {
  std::set<std::string> out;
  for (const Violation& v : violations)
    for (const std::string& e : v.entities) {
      if (auto a = model.find_app(e)) out.insert(model.apps[static_cast<std::size_t>(*a)].id);
      if (auto t = model.find_task(e)) out.insert(model.apps[static_cast<std::size_t>(model.tasks[static_cast<std::size_t>(*t)].app)].id);
      if (auto s = model.find_stream(e)) out.insert(model.apps[static_cast<std::size_t>(model.streams[static_cast<std::size_t>(*s)].app)].id);
      if (auto c = model.find_substream(e))
        out.insert(model.apps[static_cast<std::size_t>(model.streams[static_cast<std::size_t>(model.substreams[static_cast<std::size_t>(*c)].stream)].app)].id);
    }
  return {out.begin(), out.end()};
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "violations " << violations.size() << "\n";
  for (const Violation& v : violations) {
    os << v.constraint;
    for (const auto& e : v.entities) os << ' ' << e;
    if (v.time >= 0) os << " @" << v.time;
    os << ": " << v.detail << "\n";
  }
  return os.str();
}

VerifyReport verify_solution(const SystemModel& model, const Solution& solution, Strictness strictness) {
  return Checker(model, solution, strictness).run();
}

}  // namespace tsnsynth
