#include "tsnsynth/heuristic.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace tsnsynth {

PrecedenceGraph build_precedence_graph(const SystemModel& model) {
  PrecedenceGraph g;
  g.task_node.assign(model.tasks.size(), -1);
  g.copy_node.assign(model.substreams.size(), -1);
  for (std::size_t t = 0; t < model.tasks.size(); ++t) {
    g.task_node[t] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({PrecNode::Kind::Task, static_cast<int>(t), model.tasks[t].app, {}, {}});
  }
  for (std::size_t c = 0; c < model.substreams.size(); ++c) {
    const Stream& st = model.streams[static_cast<std::size_t>(model.substreams[c].stream)];
    g.copy_node[c] = static_cast<int>(g.nodes.size());
    g.nodes.push_back({PrecNode::Kind::Copy, static_cast<int>(c), st.app, {}, {}});
  }
  auto edge = [&](int u, int v) {
    g.nodes[static_cast<std::size_t>(u)].succs.push_back(v);
    g.nodes[static_cast<std::size_t>(v)].preds.push_back(u);
  };
  for (std::size_t c = 0; c < model.substreams.size(); ++c) {
    const Stream& st = model.streams[static_cast<std::size_t>(model.substreams[c].stream)];
    edge(g.task_node[static_cast<std::size_t>(st.sender)], g.copy_node[c]);
    for (int r : st.receivers) edge(g.copy_node[c], g.task_node[static_cast<std::size_t>(r)]);
  }
  for (const Application& a : model.apps)
    for (const Dependency& d : a.dependencies)
      edge(g.task_node[static_cast<std::size_t>(d.from)], g.task_node[static_cast<std::size_t>(d.to)]);

  g.app_order.resize(model.apps.size());
  std::vector<int> indeg(g.nodes.size(), 0);
  for (const auto& n : g.nodes)
    for (int s : n.succs) ++indeg[static_cast<std::size_t>(s)];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t n = 0; n < g.nodes.size(); ++n)
    if (indeg[n] == 0) ready.push(static_cast<int>(n));
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    g.app_order[static_cast<std::size_t>(g.nodes[static_cast<std::size_t>(u)].app)].push_back(u);
    for (int v : g.nodes[static_cast<std::size_t>(u)].succs)
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  return g;
}

std::vector<int> PrecedenceGraph::order(const SystemModel& model, const std::vector<int>& normal_sequence) const {
  std::vector<int> out;
  for (int a : model.security_apps()) out.insert(out.end(), app_order[static_cast<std::size_t>(a)].begin(), app_order[static_cast<std::size_t>(a)].end());
  for (int a : normal_sequence) out.insert(out.end(), app_order[static_cast<std::size_t>(a)].begin(), app_order[static_cast<std::size_t>(a)].end());
  return out;
}

std::vector<int> PrecedenceGraph::initial_order(const SystemModel& model) const {
  return order(model, model.normal_apps());
}

}  // namespace tsnsynth
