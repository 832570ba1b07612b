#include "tsnsynth/toolkit.hpp"

#include <sstream>
#include <stdexcept>

namespace tsnsynth {

std::vector<IntervalSet> frame_windows(const SystemModel& model, const Solution& sol) {
  const Micros h = model.hyperperiod();
  std::vector<IntervalSet> out(model.network.links().size());
  for (std::size_t c = 0; c < model.substreams.size(); ++c) {
    const CopySchedule& cs = sol.schedule.copies.at(c);
    if (!cs.scheduled) continue;
    const int stream = model.substreams[c].stream;
    const Micros period = model.streams[static_cast<std::size_t>(stream)].period;
    const RouteTree tree = route_tree(model, sol.routes, static_cast<int>(c));
    for (std::size_t i = 0; i < tree.links.size(); ++i) {
      const Micros len = link_duration(model, stream, tree.links[i]);
      for (Micros k = 0; k < h; k += period)
        out[static_cast<std::size_t>(tree.links[i])].add(cs.link_offsets[i] + k, cs.link_offsets[i] + k + len);
    }
  }
  return out;
}

std::vector<GateControlList> export_gcl(const SystemModel& model, const Solution& sol) {
  if (!sol.feasible() || !unplaced_apps(model, sol.schedule).empty())
    throw std::invalid_argument("gate control lists need a feasible schedule");
  const Micros h = model.hyperperiod();
  const auto windows = frame_windows(model, sol);
  std::vector<GateControlList> out;
  for (std::size_t l = 0; l < windows.size(); ++l) {
    GateControlList g;
    g.link = static_cast<LinkId>(l);
    g.port = model.network.link_name(g.link);
    g.cycle = h;
    // IntervalSet keeps runs merged, so back-to-back frames share one window.
    for (const Interval& iv : windows[l].intervals()) {
      g.events.push_back({iv.begin, true});
      g.events.push_back({iv.end, false});
    }
    out.push_back(std::move(g));
  }
  return out;
}

IntervalSet gate_windows(const GateControlList& gcl) {
  IntervalSet out;
  std::optional<Micros> open;
  for (const GateEvent& e : gcl.events) {
    if (e.open) open = e.time;
    else if (open) {
      out.add(*open, e.time);
      open.reset();
    }
  }
  if (open) out.add(*open, gcl.cycle);
  return out;
}

std::string gcl_to_text(const std::vector<GateControlList>& gcls) {
  std::ostringstream os;
  for (const GateControlList& g : gcls) {
    os << g.port << " cycle " << g.cycle << "\n";
    for (const GateEvent& e : g.events) os << "  " << e.time << (e.open ? " open" : " close") << "\n";
  }
  return os.str();
}

}  // namespace tsnsynth
