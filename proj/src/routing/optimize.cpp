#include "tsnsynth/routing.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <set>

namespace tsnsynth {

namespace {

using Clock = std::chrono::steady_clock;

// Shortest switch-only path a -> b (a == b gives the single node), ties by node id.
std::vector<NodeId> fabric_path(const Network& net, NodeId a, NodeId b) {
  std::vector<NodeId> from(net.nodes().size(), kNoNode);
  std::deque<NodeId> q{a};
  from[static_cast<std::size_t>(a)] = a;
  while (!q.empty() && from[static_cast<std::size_t>(b)] == kNoNode) {
    const NodeId u = q.front();
    q.pop_front();
    std::vector<NodeId> next;
    for (LinkId l : net.out_links(u)) next.push_back(net.link(l).dst);
    std::sort(next.begin(), next.end(), [&](NodeId x, NodeId y) { return net.node(x).id < net.node(y).id; });
    for (NodeId v : next) {
      if (net.is_end_system(v) || from[static_cast<std::size_t>(v)] != kNoNode) continue;
      from[static_cast<std::size_t>(v)] = u;
      q.push_back(v);
    }
  }
  if (from[static_cast<std::size_t>(b)] == kNoNode) return {};
  std::vector<NodeId> out{b};
  while (out.back() != a) out.push_back(from[static_cast<std::size_t>(out.back())]);
  std::reverse(out.begin(), out.end());
  return out;
}

// k shortest paths plus, for every (first hop, last hop) pair, the shortest
// path through both. The extra paths give redundant copies distinct ports.
std::vector<Path> candidate_paths(const Network& net, NodeId src, NodeId dst, int k) {
  std::vector<Path> out = k_shortest_paths(net, src, dst, k);
  std::set<std::vector<NodeId>> seen;
  for (const Path& p : out) seen.insert(p.nodes);
  for (LinkId first : net.out_links(src)) {
    const NodeId a = net.link(first).dst;
    if (a == dst) continue;
    if (net.is_end_system(a)) continue;
    for (LinkId back : net.out_links(dst)) {
      const NodeId b = net.link(back).dst;
      const auto in = net.find_link(b, dst);
      if (net.is_end_system(b) || !in) continue;
      const auto mid = fabric_path(net, a, b);
      if (mid.empty()) continue;
      Path p;
      p.nodes.push_back(src);
      p.nodes.insert(p.nodes.end(), mid.begin(), mid.end());
      p.nodes.push_back(dst);
      for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) p.links.push_back(*net.find_link(p.nodes[i], p.nodes[i + 1]));
      p.weight = static_cast<std::int64_t>(p.links.size());
      if (seen.insert(p.nodes).second) out.push_back(std::move(p));
    }
  }
  std::stable_sort(out.begin(), out.end(), [&](const Path& x, const Path& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    return std::lexicographical_compare(x.nodes.begin(), x.nodes.end(), y.nodes.begin(), y.nodes.end(),
                                        [&](NodeId u, NodeId v) { return net.node(u).id < net.node(v).id; });
  });
  return out;
}

struct StreamSolution {
  std::vector<std::vector<NodeId>> pred;  // per copy
  std::int64_t cost = 0;
};

class StreamSearch {
 public:
  StreamSearch(const SystemModel& model, int stream, const RouteOptions& opts, Clock::time_point deadline,
               std::int64_t& nodes)
      : model_(model), net_(model.network), opts_(opts), deadline_(deadline), nodes_(nodes) {
    const Stream& st = model.streams[static_cast<std::size_t>(stream)];
    sender_ = model.sender_es(stream);
    receivers_ = model.receiver_es(stream);
    copies_ = st.rl;
    const bool exhaustive = net_.nodes().size() <= opts.exhaustive_nodes;
    for (NodeId r : receivers_) {
      candidates_.push_back(exhaustive ? all_simple_paths(net_, sender_, r) : candidate_paths(net_, sender_, r, opts.k));
      std::int64_t shortest = candidates_.back().empty() ? 0 : static_cast<std::int64_t>(candidates_.back().front().links.size());
      min_hops_ = std::max(min_hops_, shortest);
    }
    pred_.assign(static_cast<std::size_t>(copies_), std::vector<NodeId>(net_.nodes().size(), kNoNode));
    first_choice_.assign(static_cast<std::size_t>(copies_), 0);
    link_users_.assign(net_.links().size(), 0);
  }

  /// Greedy incumbent; its paths join the candidate sets so the search can reproduce it.
  std::optional<StreamSolution> greedy() {
    const auto trees = grow_copy_trees(net_, sender_, receivers_, copies_, opts_.mode == RoutingMode::Strict);
    if (!trees) return std::nullopt;
    StreamSolution sol;
    RouteAssignment tmp;
    tmp.pred.assign(static_cast<std::size_t>(copies_), std::vector<NodeId>(net_.nodes().size(), kNoNode));
    std::vector<int> used(net_.links().size(), 0);
    for (int c = 0; c < copies_; ++c) {
      std::vector<const Path*> paths;
      for (const Path& p : (*trees)[static_cast<std::size_t>(c)]) paths.push_back(&p);
      merge_paths(tmp, c, paths);
      const auto& pred = tmp.pred[static_cast<std::size_t>(c)];
      for (std::size_t v = 0; v < pred.size(); ++v) {
        if (pred[v] == kNoNode || pred[v] == static_cast<NodeId>(v)) continue;
        const LinkId l = *net_.find_link(pred[v], static_cast<NodeId>(v));
        sol.cost += used[static_cast<std::size_t>(l)]++ > 0 ? 101 : 1;
      }
    }
    sol.pred = tmp.pred;
    for (const auto& copy : *trees)
      for (std::size_t r = 0; r < receivers_.size(); ++r) {
        auto& cand = candidates_[r];
        if (std::none_of(cand.begin(), cand.end(), [&](const Path& x) { return x.nodes == copy[r].nodes; }))
          cand.push_back(copy[r]);
      }
    return sol;
  }

  bool has_candidates() const {
    return std::none_of(candidates_.begin(), candidates_.end(), [](const auto& c) { return c.empty(); });
  }

  /// Best solution with cost below `bound`; collects up to `cap` solutions when collecting.
  void run(std::int64_t bound, bool collect, std::size_t cap) {
    bound_ = bound;
    collect_ = collect;
    cap_ = cap;
    for (auto& p : pred_) std::fill(p.begin(), p.end(), kNoNode);
    dfs(0, 0, 0);
  }

  const std::vector<StreamSolution>& solutions() const { return solutions_; }
  bool truncated() const { return truncated_; }

 private:
  std::int64_t remaining_bound(int copy, std::size_t recv) const {
    std::int64_t lb = static_cast<std::int64_t>(receivers_.size() - recv);
    const std::int64_t fresh = std::max<std::int64_t>(min_hops_, static_cast<std::int64_t>(receivers_.size()));
    return lb + fresh * (copies_ - copy - 1);
  }

  void dfs(int copy, std::size_t recv, std::int64_t cost) {
    if (truncated_) return;
    if (++nodes_ > opts_.node_cap || ((nodes_ & 1023) == 0 && Clock::now() > deadline_)) {
      truncated_ = true;
      return;
    }
    if (copy == copies_) {
      if (collect_) {
        if (cost <= bound_) {
          solutions_.push_back({pred_, cost});
          if (solutions_.size() >= cap_) truncated_ = true;
        }
      } else if (cost < bound_) {
        bound_ = cost;
        solutions_.assign(1, {pred_, cost});
      }
      return;
    }
    if (recv == receivers_.size()) {
      dfs(copy + 1, 0, cost);
      return;
    }
    const std::int64_t limit = collect_ ? bound_ : bound_ - 1;
    if (cost + remaining_bound(copy, recv) > limit) return;

    auto& pred = pred_[static_cast<std::size_t>(copy)];
    // Copies are interchangeable: order them by their first receiver's path.
    std::size_t start = 0;
    if (recv == 0 && copy > 0)
      start = first_choice_[static_cast<std::size_t>(copy) - 1] + (opts_.mode == RoutingMode::Strict ? 1 : 0);
    for (std::size_t ci = start; ci < candidates_[recv].size(); ++ci) {
      const Path& path = candidates_[recv][ci];
      if (recv == 0) first_choice_[static_cast<std::size_t>(copy)] = ci;
      // Links this path adds to the copy's tree.
      std::vector<std::size_t> added_nodes;
      std::vector<LinkId> added_links;
      bool clash = false;
      std::int64_t overlap = 0;
      for (std::size_t j = path.nodes.size() - 1; j > 0; --j) {
        const NodeId n = path.nodes[j];
        if (pred[static_cast<std::size_t>(n)] != kNoNode) break;
        const LinkId l = path.links[j - 1];
        if (link_users_[static_cast<std::size_t>(l)] > 0) {
          if (opts_.mode == RoutingMode::Strict) {
            clash = true;
            break;
          }
          ++overlap;
        }
        added_nodes.push_back(static_cast<std::size_t>(n));
        added_links.push_back(l);
      }
      if (clash) continue;
      const bool root_new = pred[static_cast<std::size_t>(sender_)] == kNoNode;
      pred[static_cast<std::size_t>(sender_)] = sender_;
      for (std::size_t i = 0; i < added_nodes.size(); ++i) {
        pred[added_nodes[i]] = net_.link(added_links[i]).src;
        ++link_users_[static_cast<std::size_t>(added_links[i])];
      }
      const std::int64_t step = static_cast<std::int64_t>(added_links.size()) + 100 * overlap;
      dfs(copy, recv + 1, cost + step);
      for (std::size_t i = 0; i < added_nodes.size(); ++i) {
        pred[added_nodes[i]] = kNoNode;
        --link_users_[static_cast<std::size_t>(added_links[i])];
      }
      if (root_new) pred[static_cast<std::size_t>(sender_)] = kNoNode;
      if (truncated_) return;
    }
  }

  const SystemModel& model_;
  const Network& net_;
  const RouteOptions& opts_;
  Clock::time_point deadline_;
  std::int64_t& nodes_;
  NodeId sender_ = kNoNode;
  std::vector<NodeId> receivers_;
  int copies_ = 1;
  std::vector<std::vector<Path>> candidates_;
  std::int64_t min_hops_ = 0;
  std::vector<std::vector<NodeId>> pred_;
  std::vector<std::size_t> first_choice_;
  std::vector<int> link_users_;
  std::int64_t bound_ = 0;
  bool collect_ = false;
  std::size_t cap_ = 0;
  bool truncated_ = false;
  std::vector<StreamSolution> solutions_;
};

void install(const SystemModel& model, RouteAssignment& assign, int stream, const StreamSolution& sol) {
  const auto copies = model.copies_of(stream);
  for (std::size_t c = 0; c < copies.size(); ++c) assign.pred[static_cast<std::size_t>(copies[c])] = sol.pred[c];
}

bool bandwidth_ok(const SystemModel& model, const RouteAssignment& assign) {
  for (const auto& u : bandwidth_utilization(model, assign))
    if (u > 1) return false;
  return true;
}

}  // namespace

RouteResult optimize_routes_exact(const SystemModel& model, const RouteOptions& opts) {
  const auto deadline = Clock::now() + opts.budget;
  std::int64_t nodes = 0;
  RouteResult result;
  result.assign = empty_assignment(model);
  constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max() / 4;

  std::vector<StreamSolution> best(model.streams.size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const std::string& sid = model.streams[s].id;
    // Fair share of what is left, so one hard stream cannot starve the rest.
    const auto now = Clock::now();
    const auto share = now >= deadline ? Clock::duration::zero()
                                       : (deadline - now) / static_cast<long>(model.streams.size() - s);
    std::int64_t stream_nodes = 0;
    StreamSearch search(model, static_cast<int>(s), opts, now + share, stream_nodes);
    if (!search.has_candidates()) throw InfeasibleError("routing", sid, "stream " + sid + " has an unreachable receiver");
    const auto incumbent = search.greedy();
    search.run(incumbent ? incumbent->cost + 1 : kUnbounded, false, 1);
    if (search.solutions().empty() && incumbent) {
      // Nothing beat the incumbent. It is optimal unless the search was cut short.
      if (search.truncated()) result.optimal = false;
      nodes += stream_nodes;
      best[s] = *incumbent;
      install(model, result.assign, static_cast<int>(s), best[s]);
      continue;
    }
    if (search.solutions().empty()) {
      if (search.truncated()) throw InfeasibleError("routing", sid, "budget exhausted before routing stream " + sid);
      throw InfeasibleError("routing", sid, "stream " + sid + " has no admissible disjoint routing");
    }
    nodes += stream_nodes;
    if (search.truncated()) result.optimal = false;
    best[s] = search.solutions().front();
    install(model, result.assign, static_cast<int>(s), best[s]);
  }

  if (!bandwidth_ok(model, result.assign)) {
    // Bandwidth couples the streams: search over near-optimal per-stream alternatives.
    result.optimal = false;
    std::vector<std::vector<StreamSolution>> options(model.streams.size());
    for (std::size_t s = 0; s < model.streams.size(); ++s) {
      StreamSearch search(model, static_cast<int>(s), opts, Clock::time_point::max(), nodes);
      search.run(best[s].cost + 4, true, 64);
      options[s] = search.solutions();
      std::stable_sort(options[s].begin(), options[s].end(),
                       [](const StreamSolution& a, const StreamSolution& b) { return a.cost < b.cost; });
    }
    RouteAssignment work = empty_assignment(model);
    bool found = false;
    auto dfs = [&](auto&& self, std::size_t s) -> void {
      if (found) return;
      if (s == options.size()) {
        if (bandwidth_ok(model, work)) {
          found = true;
          result.assign = work;
        }
        return;
      }
      for (const auto& sol : options[s]) {
        install(model, work, static_cast<int>(s), sol);
        if (!bandwidth_ok(model, work)) continue;
        self(self, s + 1);
        if (found) return;
      }
      for (int c : model.copies_of(static_cast<int>(s)))
        std::fill(work.pred[static_cast<std::size_t>(c)].begin(), work.pred[static_cast<std::size_t>(c)].end(), kNoNode);
    };
    dfs(dfs, 0);
    if (!found) throw InfeasibleError("routing", "", "no routing respects link bandwidth");
  }
  result.cost = routing_cost(model, result.assign, opts.mode);
  return result;
}

}  // namespace tsnsynth
