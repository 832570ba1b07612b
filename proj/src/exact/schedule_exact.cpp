#include "tsnsynth/exact.hpp"
#include "tsnsynth/heuristic.hpp"
#include "tsnsynth/tesla.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace tsnsynth {

namespace {

using Clock = std::chrono::steady_clock;

Micros floor_div(Micros a, Micros b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

Micros mod(Micros a, Micros m) { return ((a % m) + m) % m; }

struct Occ {
  int var;
  Micros len;
  Micros period;
  int resource;
  bool task;
  int app;
  std::string entity;
};

struct Window {
  int prev;
  int var;
  Micros period;
  int sub;
};

struct SecureCopy {
  int sub;
  Micros period;
  std::vector<std::pair<int, Micros>> arrivals;  // link block var into each receiver, its length
  struct Val {
    int var;
    int kv;  // kv task var
    Micros kv_wcet;
  };
  std::vector<Val> vals;
};

struct CopyLayout {
  RouteTree tree;
  std::vector<BlockSpec> blocks;
  int base = 0;  // var of block 0
};

class ExactScheduler {
 public:
  ExactScheduler(const SystemModel& m, const RouteAssignment& routes, Micros p_int, const ExactBudget& budget)
      : m_(m), routes_(routes), p_(p_int), budget_(budget) {}

  ExactSolution solve() {
    build();
    start_ = Clock::now();
    precheck();
    auto root = solve_difference_lp(lp_);
    if (!root) throw InfeasibleError("schedule", blame_precedence(), "precedence and deadline constraints are unsatisfiable");
    root_bound_ = root->value;
    if (budget_.warm_start) warm_start();
    phi_.assign(secure_.size(), 0);
    dfs();

    ExactSolution out;
    out.nodes = nodes_;
    if (!incumbent_) {
      if (!exhausted_) throw InfeasibleError("schedule", first_conflict_, "no schedule avoids the " + conflict_class_ + " conflicts of " + first_conflict_);
      out.schedule = empty_schedule(m_);
      out.lower_bound = root_bound_;
      return out;
    }
    out.found = true;
    out.optimal = !exhausted_;
    out.objective = best_;
    out.lower_bound = exhausted_ ? root_bound_ : best_;
    out.schedule = to_schedule(*incumbent_, incumbent_phi_);
    return out;
  }

 private:
  int new_var() { return vars_++; }

  void arc(int from, int to, Micros len) { lp_.arcs.push_back({from, to, len}); }

  void bound(int var, Micros len, Micros period) {
    arc(0, var, 0);
    arc(var, 0, -(period - len));
  }

  void build() {
    vars_ = 1;  // 0 is the time origin
    task_var_.resize(m_.tasks.size());
    for (std::size_t t = 0; t < m_.tasks.size(); ++t) task_var_[t] = new_var();
    copies_.resize(m_.substreams.size());
    for (std::size_t c = 0; c < m_.substreams.size(); ++c) {
      CopyLayout& cl = copies_[c];
      cl.tree = route_tree(m_, routes_, static_cast<int>(c));
      cl.blocks = block_layout(m_, cl.tree, static_cast<int>(c));
      cl.base = vars_;
      vars_ += static_cast<int>(cl.blocks.size());
    }
    app_start_.resize(m_.apps.size());
    app_end_.resize(m_.apps.size());
    for (std::size_t a = 0; a < m_.apps.size(); ++a) {
      app_start_[a] = new_var();
      app_end_[a] = new_var();
    }
    lp_.vertices = vars_;
    lp_.anchor = 0;
    lp_.weight.assign(static_cast<std::size_t>(vars_), 0);

    const int n_nodes = static_cast<int>(m_.network.nodes().size());
    for (std::size_t t = 0; t < m_.tasks.size(); ++t) {
      const Task& task = m_.tasks[t];
      bound(task_var_[t], task.wcet, task.period);
      occ_.push_back({task_var_[t], task.wcet, task.period, task.es, true, task.app, task.id});
    }
    for (std::size_t a = 0; a < m_.apps.size(); ++a) {
      const Application& app = m_.apps[a];
      if (app.tasks.empty()) continue;
      lp_.weight[static_cast<std::size_t>(app_start_[a])] = -1;
      lp_.weight[static_cast<std::size_t>(app_end_[a])] = 1;
      for (int t : app.tasks) {
        arc(app_start_[a], task_var_[static_cast<std::size_t>(t)], 0);
        arc(task_var_[static_cast<std::size_t>(t)], app_end_[a], m_.tasks[static_cast<std::size_t>(t)].wcet);
      }
      arc(app_end_[a], app_start_[a], -app.period);
      for (const Dependency& d : app.dependencies)
        arc(task_var_[static_cast<std::size_t>(d.from)], task_var_[static_cast<std::size_t>(d.to)], m_.tasks[static_cast<std::size_t>(d.from)].wcet);
    }

    for (std::size_t c = 0; c < m_.substreams.size(); ++c) {
      const CopyLayout& cl = copies_[c];
      const int stream = m_.substreams[c].stream;
      const Stream& st = m_.streams[static_cast<std::size_t>(stream)];
      const int sender = task_var_[static_cast<std::size_t>(st.sender)];
      const Micros sender_wcet = m_.tasks[static_cast<std::size_t>(st.sender)].wcet;
      for (std::size_t b = 0; b < cl.blocks.size(); ++b) {
        const BlockSpec& bs = cl.blocks[b];
        const int v = cl.base + static_cast<int>(b);
        bound(v, bs.length, st.period);
        if (bs.prev < 0 && bs.role != BlockRole::MacVal) arc(sender, v, sender_wcet);
        if (bs.prev >= 0) arc(cl.base + bs.prev, v, cl.blocks[static_cast<std::size_t>(bs.prev)].length);
        if (bs.role == BlockRole::Link) {
          occ_.push_back({v, bs.length, st.period, n_nodes + bs.link, false, st.app, m_.substreams[c].id});
          if (bs.prev >= 0 && cl.blocks[static_cast<std::size_t>(bs.prev)].role == BlockRole::Link)
            windows_[bs.link].push_back({cl.base + bs.prev, v, st.period, static_cast<int>(c)});
        } else {
          occ_.push_back({v, bs.length, st.period, bs.es, false, st.app, m_.substreams[c].id});
        }
      }
      // Receivers consume the frame after arrival, or after MAC validation.
      for (int r : st.receivers) {
        const NodeId es = m_.tasks[static_cast<std::size_t>(r)].es;
        int from = -1;
        for (std::size_t b = 0; b < cl.blocks.size(); ++b) {
          const BlockSpec& bs = cl.blocks[b];
          if (st.secure ? (bs.role == BlockRole::MacVal && bs.es == es)
                        : (bs.role == BlockRole::Link && m_.network.link(bs.link).dst == es))
            from = static_cast<int>(b);
        }
        if (from >= 0) arc(cl.base + from, task_var_[static_cast<std::size_t>(r)], cl.blocks[static_cast<std::size_t>(from)].length);
      }
      if (st.secure) {
        SecureCopy sc;
        sc.sub = static_cast<int>(c);
        sc.period = st.period;
        for (std::size_t b = 0; b < cl.blocks.size(); ++b) {
          const BlockSpec& bs = cl.blocks[b];
          if (bs.role != BlockRole::MacVal) continue;
          if (bs.prev >= 0) sc.arrivals.push_back({cl.base + bs.prev, cl.blocks[static_cast<std::size_t>(bs.prev)].length});
          auto kv = m_.key_verify_task(cl.tree.root, bs.es);
          if (!kv) throw InfeasibleError("schedule", m_.apps[static_cast<std::size_t>(st.app)].id, "no key verification task for " + st.id);
          sc.vals.push_back({cl.base + static_cast<int>(b), task_var_[static_cast<std::size_t>(*kv)], m_.tasks[static_cast<std::size_t>(*kv)].wcet});
        }
        secure_.push_back(std::move(sc));
      }
    }

    std::stable_sort(occ_.begin(), occ_.end(), [](const Occ& a, const Occ& b) { return a.resource < b.resource; });
    for (std::size_t i = 0; i < occ_.size(); ++i)
      for (std::size_t j = i + 1; j < occ_.size() && occ_[j].resource == occ_[i].resource; ++j) pairs_.push_back({i, j});
  }

  static std::string pair_class(const Occ& a, const Occ& b) {
    if (a.task && b.task) return "T4";
    if (a.task || b.task) return "T5";
    return "S8";
  }

  void precheck() {
    for (auto [i, j] : pairs_) {
      const Occ& a = occ_[i];
      const Occ& b = occ_[j];
      if (a.len + b.len > std::gcd(a.period, b.period))
        throw InfeasibleError("schedule", m_.apps[static_cast<std::size_t>(std::max(a.app, b.app))].id,
                              pair_class(a, b) + " capacity: " + a.entity + " and " + b.entity + " cannot share a resource");
    }
  }

  // First application whose own precedence system is unsatisfiable.
  std::string blame_precedence() const {
    for (std::size_t a = 0; a < m_.apps.size(); ++a) {
      std::vector<char> mine(static_cast<std::size_t>(vars_), 0);
      mine[0] = 1;
      mine[static_cast<std::size_t>(app_start_[a])] = mine[static_cast<std::size_t>(app_end_[a])] = 1;
      for (int t : m_.apps[a].tasks) mine[static_cast<std::size_t>(task_var_[static_cast<std::size_t>(t)])] = 1;
      for (int s : m_.apps[a].streams)
        for (int c : m_.copies_of(s))
          for (std::size_t b = 0; b < copies_[static_cast<std::size_t>(c)].blocks.size(); ++b)
            mine[static_cast<std::size_t>(copies_[static_cast<std::size_t>(c)].base) + b] = 1;
      std::vector<DiffArc> arcs;
      for (const DiffArc& d : lp_.arcs)
        if (mine[static_cast<std::size_t>(d.from)] && mine[static_cast<std::size_t>(d.to)]) arcs.push_back(d);
      if (!feasible_potentials(vars_, 0, arcs)) return m_.apps[a].id;
    }
    return m_.apps.empty() ? std::string() : m_.apps.front().id;
  }

  bool budget_left() {
    if (nodes_ >= budget_.node_cap) return false;
    if ((nodes_ & 63) == 0 && Clock::now() - start_ > budget_.time) timed_out_ = true;
    return !timed_out_;
  }

  struct Branch {
    std::vector<DiffArc> arcs;
    int secure = -1;
    std::int64_t phi = 0;
    Micros distance = 0;
  };

  static bool disjoint(Micros xu, Micros lu, Micros tu, Micros xv, Micros lv, Micros tv) {
    const Micros g = std::gcd(tu, tv);
    const Micros r = mod(xv - xu, g);
    return r >= lu && r <= g - lv;
  }

  std::vector<Branch> pair_branches(const Occ& u, const Occ& v, const std::vector<std::int64_t>& x) const {
    const Micros g = std::gcd(u.period, v.period);
    const Micros lo = -(u.period - u.len), hi = v.period - v.len;
    const Micros delta = x[static_cast<std::size_t>(v.var)] - x[static_cast<std::size_t>(u.var)];
    std::vector<Branch> out;
    for (Micros k = floor_div(lo - u.len, g) - 1; k <= floor_div(hi, g) + 1; ++k) {
      const Micros a = k * g + u.len, b = (k + 1) * g - v.len;
      if (std::max(a, lo) > std::min(b, hi)) continue;
      Branch br;
      br.arcs = {{u.var, v.var, a}, {v.var, u.var, -b}};
      br.distance = delta < a ? a - delta : (delta > b ? delta - b : 0);
      out.push_back(std::move(br));
    }
    return out;
  }

  std::vector<Branch> window_branches(const Window& w1, const Window& w2, const std::vector<std::int64_t>& x) const {
    const Micros g = std::gcd(w1.period, w2.period);
    const Micros gap = x[static_cast<std::size_t>(w1.var)] - x[static_cast<std::size_t>(w2.prev)];
    const Micros k0 = -floor_div(-gap, g);  // ceil(gap / g)
    std::vector<Branch> out;
    for (Micros k = -(w2.period / g) - 1; k <= w1.period / g + 1; ++k) {
      Branch br;
      // w2 shifted by k*g lies after w1 and ends before w1 recurs.
      br.arcs = {{w1.var, w2.prev, -k * g}, {w2.var, w1.prev, k * g - g}};
      br.distance = std::abs(k - k0);
      out.push_back(std::move(br));
    }
    return out;
  }

  bool window_ok(const Window& w1, const Window& w2, const std::vector<std::int64_t>& x) const {
    const Micros g = std::gcd(w1.period, w2.period);
    const Micros p1 = x[static_cast<std::size_t>(w1.prev)], o1 = x[static_cast<std::size_t>(w1.var)];
    const Micros p2 = x[static_cast<std::size_t>(w2.prev)], o2 = x[static_cast<std::size_t>(w2.var)];
    const Micros k = -floor_div(p2 - o1, g);  // smallest k with p2 + k g >= o1
    return o2 + k * g <= p1 + g;
  }

  Micros arrival(const SecureCopy& sc, const std::vector<std::int64_t>& x) const {
    Micros a = 0;
    for (auto [v, len] : sc.arrivals) a = std::max(a, x[static_cast<std::size_t>(v)] + len);
    return a;
  }

  bool phi_ok(const SecureCopy& sc, std::int64_t phi, const std::vector<std::int64_t>& x) const {
    if (phi < 1 || arrival(sc, x) > phi * p_ - 1) return false;
    for (const auto& val : sc.vals)
      if (x[static_cast<std::size_t>(val.var)] < x[static_cast<std::size_t>(val.kv)] + val.kv_wcet + phi * p_) return false;
    return true;
  }

  std::vector<Branch> phi_branches(std::size_t s, const std::vector<std::int64_t>& x) const {
    const SecureCopy& sc = secure_[s];
    const std::int64_t want = auth_interval(arrival(sc, x), p_);
    std::vector<Branch> out;
    for (std::int64_t phi = 1; phi * p_ < sc.period; ++phi) {
      Branch br;
      br.secure = static_cast<int>(s);
      br.phi = phi;
      for (auto [v, len] : sc.arrivals) br.arcs.push_back({v, 0, -(phi * p_ - 1 - len)});
      for (const auto& val : sc.vals) br.arcs.push_back({val.kv, val.var, phi * p_ + val.kv_wcet});
      br.distance = phi >= want ? 2 * (phi - want) : 2 * (want - phi) - 1;
      out.push_back(std::move(br));
    }
    return out;
  }

  // Branches for the earliest violated disjunction, or nothing if x is a schedule.
  std::vector<Branch> violated(const std::vector<std::int64_t>& x, std::string* cls, std::string* app) const {
    Micros best_t = kNever;
    std::vector<Branch> out;
    for (auto [i, j] : pairs_) {
      const Occ& u = occ_[i];
      const Occ& v = occ_[j];
      const Micros t = std::min(x[static_cast<std::size_t>(u.var)], x[static_cast<std::size_t>(v.var)]);
      if (t >= best_t || disjoint(x[static_cast<std::size_t>(u.var)], u.len, u.period, x[static_cast<std::size_t>(v.var)], v.len, v.period))
        continue;
      best_t = t;
      out = pair_branches(u, v, x);
      *cls = pair_class(u, v);
      *app = m_.apps[static_cast<std::size_t>(std::max(u.app, v.app))].id;
    }
    if (!out.empty()) return out;
    for (const auto& [link, ws] : windows_)
      for (std::size_t i = 0; i < ws.size(); ++i)
        for (std::size_t j = i + 1; j < ws.size(); ++j) {
          const Window& a = ws[i];
          const Window& b = ws[j];
          if (a.sub == b.sub || (window_ok(a, b, x) && window_ok(b, a, x))) continue;
          const Micros t = std::min(x[static_cast<std::size_t>(a.prev)], x[static_cast<std::size_t>(b.prev)]);
          if (t >= best_t) continue;
          best_t = t;
          // Either a's window precedes b's or the other way round (modulo the period).
          const bool a_first = x[static_cast<std::size_t>(a.prev)] <= x[static_cast<std::size_t>(b.prev)];
          out = a_first ? window_branches(a, b, x) : window_branches(b, a, x);
          *cls = "S9";
          *app = m_.apps[static_cast<std::size_t>(m_.streams[static_cast<std::size_t>(m_.substreams[static_cast<std::size_t>(b.sub)].stream)].app)].id;
        }
    if (!out.empty()) return out;
    for (std::size_t s = 0; s < secure_.size(); ++s) {
      if (phi_[s] != 0) continue;
      if (phi_ok(secure_[s], auth_interval(arrival(secure_[s], x), p_), x)) continue;
      *cls = "S6";
      *app = m_.apps[static_cast<std::size_t>(m_.streams[static_cast<std::size_t>(m_.substreams[static_cast<std::size_t>(secure_[s].sub)].stream)].app)].id;
      return phi_branches(s, x);
    }
    return out;
  }

  std::vector<std::int64_t> phis_for(const std::vector<std::int64_t>& x) const {
    std::vector<std::int64_t> out(secure_.size());
    for (std::size_t s = 0; s < secure_.size(); ++s)
      out[s] = phi_[s] != 0 ? phi_[s] : auth_interval(arrival(secure_[s], x), p_);
    return out;
  }

  void dfs() {
    if (!budget_left()) {
      exhausted_ = true;
      return;
    }
    ++nodes_;
    auto lp = solve_difference_lp(lp_);
    if (!lp || (incumbent_ && lp->value >= best_)) return;
    std::string cls, app;
    auto branches = violated(lp->x, &cls, &app);
    if (first_conflict_.empty() && !app.empty()) {
      first_conflict_ = app;
      conflict_class_ = cls;
    }
    if (branches.empty()) {
      best_ = lp->value;
      incumbent_ = lp->x;
      incumbent_phi_ = phis_for(lp->x);
      return;
    }
    std::stable_sort(branches.begin(), branches.end(), [](const Branch& a, const Branch& b) { return a.distance < b.distance; });
    for (const Branch& br : branches) {
      const std::size_t mark = lp_.arcs.size();
      lp_.arcs.insert(lp_.arcs.end(), br.arcs.begin(), br.arcs.end());
      if (br.secure >= 0) phi_[static_cast<std::size_t>(br.secure)] = br.phi;
      dfs();
      if (br.secure >= 0) phi_[static_cast<std::size_t>(br.secure)] = 0;
      lp_.arcs.resize(mark);
      if (exhausted_) return;
    }
  }

  // Adopts the list scheduler's solution as the first incumbent when it
  // satisfies every constraint modelled here.
  void warm_start() {
    if (m_.has_security_apps() && p_ <= 0) return;
    AsapScheduler asap(m_, routes_);
    asap.schedule(asap.graph().initial_order(m_));
    if (!asap.infeasible_apps().empty()) return;
    asap.optimize_latency();
    const Schedule s = asap.to_schedule();
    std::vector<std::int64_t> x(static_cast<std::size_t>(vars_), 0);
    for (std::size_t t = 0; t < m_.tasks.size(); ++t) x[static_cast<std::size_t>(task_var_[t])] = s.task_offsets[t];
    std::vector<std::int64_t> phi(secure_.size());
    for (std::size_t c = 0; c < m_.substreams.size(); ++c) {
      const CopyLayout& cl = copies_[c];
      const CopySchedule& cs = s.copies[c];
      if (!cs.scheduled || cs.link_offsets.size() != cl.tree.links.size()) return;
      for (std::size_t b = 0; b < cl.blocks.size(); ++b) {
        const BlockSpec& bs = cl.blocks[b];
        Micros o = bs.role == BlockRole::MacGen ? cs.mac_gen
                   : bs.role == BlockRole::Link ? cs.link_offsets[static_cast<std::size_t>(bs.tree_index)]
                                                : cs.mac_val[static_cast<std::size_t>(bs.tree_index)];
        x[static_cast<std::size_t>(cl.base) + b] = o;
      }
    }
    for (std::size_t s2 = 0; s2 < secure_.size(); ++s2) phi[s2] = s.copies[static_cast<std::size_t>(secure_[s2].sub)].auth_interval;
    std::int64_t value = 0;
    for (std::size_t a = 0; a < m_.apps.size(); ++a) {
      auto lat = app_latency(m_, s, static_cast<int>(a));
      if (!lat) return;
      if (m_.apps[a].tasks.empty()) continue;
      Micros first = kNever, last = 0;
      for (int t : m_.apps[a].tasks) {
        first = std::min(first, s.task_offsets[static_cast<std::size_t>(t)]);
        last = std::max(last, s.task_offsets[static_cast<std::size_t>(t)] + m_.tasks[static_cast<std::size_t>(t)].wcet);
      }
      x[static_cast<std::size_t>(app_start_[a])] = first;
      x[static_cast<std::size_t>(app_end_[a])] = last;
      value += *lat;
    }
    for (const DiffArc& d : lp_.arcs)
      if (x[static_cast<std::size_t>(d.to)] - x[static_cast<std::size_t>(d.from)] < d.length) return;
    for (auto [i, j] : pairs_)
      if (!disjoint(x[static_cast<std::size_t>(occ_[i].var)], occ_[i].len, occ_[i].period, x[static_cast<std::size_t>(occ_[j].var)], occ_[j].len,
                    occ_[j].period))
        return;
    for (const auto& [link, ws] : windows_)
      for (std::size_t i = 0; i < ws.size(); ++i)
        for (std::size_t j = i + 1; j < ws.size(); ++j)
          if (ws[i].sub != ws[j].sub && !(window_ok(ws[i], ws[j], x) && window_ok(ws[j], ws[i], x))) return;
    for (std::size_t s2 = 0; s2 < secure_.size(); ++s2)
      if (!phi_ok(secure_[s2], phi[s2], x)) return;
    best_ = value;
    incumbent_ = x;
    incumbent_phi_ = phi;
  }

  Schedule to_schedule(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& phi) const {
    Schedule s = empty_schedule(m_);
    for (std::size_t t = 0; t < m_.tasks.size(); ++t) s.task_offsets[t] = x[static_cast<std::size_t>(task_var_[t])];
    for (std::size_t c = 0; c < m_.substreams.size(); ++c) {
      const CopyLayout& cl = copies_[c];
      CopySchedule& cs = s.copies[c];
      cs.scheduled = true;
      cs.link_offsets.assign(cl.tree.links.size(), 0);
      cs.mac_val.assign(m_.streams[static_cast<std::size_t>(m_.substreams[c].stream)].secure ? cl.tree.receivers.size() : 0, 0);
      for (std::size_t b = 0; b < cl.blocks.size(); ++b) {
        const BlockSpec& bs = cl.blocks[b];
        const Micros o = x[static_cast<std::size_t>(cl.base) + b];
        if (bs.role == BlockRole::MacGen) cs.mac_gen = o;
        else if (bs.role == BlockRole::Link) cs.link_offsets[static_cast<std::size_t>(bs.tree_index)] = o;
        else cs.mac_val[static_cast<std::size_t>(bs.tree_index)] = o;
      }
    }
    for (std::size_t s2 = 0; s2 < secure_.size(); ++s2) s.copies[static_cast<std::size_t>(secure_[s2].sub)].auth_interval = phi[s2];
    return s;
  }

  const SystemModel& m_;
  const RouteAssignment& routes_;
  Micros p_;
  ExactBudget budget_;

  int vars_ = 0;
  DifferenceLp lp_;
  std::vector<int> task_var_;
  std::vector<int> app_start_, app_end_;
  std::vector<CopyLayout> copies_;
  std::vector<Occ> occ_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::map<LinkId, std::vector<Window>> windows_;
  std::vector<SecureCopy> secure_;
  std::vector<std::int64_t> phi_;

  Clock::time_point start_;
  std::int64_t nodes_ = 0;
  bool timed_out_ = false;
  bool exhausted_ = false;
  std::int64_t root_bound_ = 0;
  std::int64_t best_ = 0;
  std::optional<std::vector<std::int64_t>> incumbent_;
  std::vector<std::int64_t> incumbent_phi_;
  std::string first_conflict_, conflict_class_;
};

}  // namespace

ExactSolution solve_schedule_exact(const SystemModel& model, const RouteAssignment& routes, Micros p_int,
                                   const ExactBudget& budget) {
  return ExactScheduler(model, routes, p_int, budget).solve();
}

}  // namespace tsnsynth
