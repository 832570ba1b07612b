#include "tsnsynth/verify.hpp"

#include <algorithm>
#include <set>

namespace tsnsynth {

namespace {

// Links of a copy's route and whether the route reaches all receivers.
struct CopyRoute {
  std::set<LinkId> links;
  bool complete = false;
};

CopyRoute copy_route(const SystemModel& model, const RouteAssignment& routes, int sub) {
  const Network& net = model.network;
  const int stream = model.substreams[static_cast<std::size_t>(sub)].stream;
  const NodeId sender = model.sender_es(stream);
  const auto& pred = routes.pred[static_cast<std::size_t>(sub)];
  CopyRoute out;
  out.complete = true;
  for (NodeId r : model.receiver_es(stream)) {
    NodeId cur = r;
    std::size_t steps = 0;
    while (cur != sender && steps++ <= pred.size()) {
      const NodeId p = pred[static_cast<std::size_t>(cur)];
      auto l = p == kNoNode ? std::nullopt : net.find_link(p, cur);
      if (!l) {
        out.complete = false;
        break;
      }
      out.links.insert(*l);
      cur = p;
    }
    if (cur != sender) out.complete = false;
  }
  return out;
}

}  // namespace

std::vector<bool> delivered_under_failures(const SystemModel& model, const RouteAssignment& routes,
                                           const std::vector<LinkId>& failed) {
  std::vector<bool> out(model.streams.size(), false);
  for (std::size_t s = 0; s < model.streams.size(); ++s)
    for (int sub : model.copies_of(static_cast<int>(s))) {
      const CopyRoute r = copy_route(model, routes, sub);
      if (r.complete && std::none_of(failed.begin(), failed.end(), [&](LinkId l) { return r.links.count(l) > 0; }))
        out[s] = true;
    }
  return out;
}

std::vector<std::string> fault_tolerance_violations(const SystemModel& model, const RouteAssignment& routes) {
  std::vector<std::string> out;
  const auto n_links = static_cast<int>(model.network.links().size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const int failures = model.streams[s].rl - 1;
    std::vector<CopyRoute> copies;
    for (int sub : model.copies_of(static_cast<int>(s))) copies.push_back(copy_route(model, routes, sub));
    // Enumerate every combination of `failures` distinct directed links.
    std::vector<LinkId> pick(static_cast<std::size_t>(failures));
    bool cut = false;
    auto survives = [&] {
      return std::any_of(copies.begin(), copies.end(), [&](const CopyRoute& c) {
        return c.complete && std::none_of(pick.begin(), pick.end(), [&](LinkId l) { return c.links.count(l) > 0; });
      });
    };
    auto rec = [&](auto&& self, int depth, LinkId from) -> void {
      if (cut) return;
      if (depth == failures) {
        if (!survives()) cut = true;
        return;
      }
      for (LinkId l = from; l < n_links; ++l) {
        pick[static_cast<std::size_t>(depth)] = l;
        self(self, depth + 1, l + 1);
        if (cut) return;
      }
    };
    rec(rec, 0, 0);
    if (cut) out.push_back(model.streams[s].id);
  }
  return out;
}

}  // namespace tsnsynth
