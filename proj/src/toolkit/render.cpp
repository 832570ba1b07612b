#include "tsnsynth/toolkit.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace tsnsynth {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

const char* color(int app) { return kPalette[static_cast<std::size_t>(app) % (sizeof kPalette / sizeof *kPalette)]; }

std::string gantt(const SystemModel& m, const Solution& sol) {
  const Network& net = m.network;
  const Micros h = m.periods().empty() ? 1 : m.hyperperiod();
  const double left = 140, width = 1000, row = 22, top = 30;
  std::vector<std::string> labels;
  for (const Node& n : net.nodes())
    if (n.kind == NodeKind::EndSystem) labels.push_back(n.id);
  const std::size_t es_rows = labels.size();
  for (std::size_t l = 0; l < net.links().size(); ++l) labels.push_back(net.link_name(static_cast<LinkId>(l)));
  std::vector<int> es_row(net.nodes().size(), -1);
  {
    int r = 0;
    for (std::size_t i = 0; i < net.nodes().size(); ++i)
      if (net.is_end_system(static_cast<NodeId>(i))) es_row[i] = r++;
  }
  const double height = top + row * static_cast<double>(labels.size()) + 30;
  auto x_of = [&](Micros t) { return left + width * static_cast<double>(t) / static_cast<double>(h); };

  std::set<std::string> bad(sol.infeasible_apps.begin(), sol.infeasible_apps.end());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(left + width + 20) << "\" height=\"" << num(height)
     << "\" font-family=\"monospace\" font-size=\"11\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double y = top + row * static_cast<double>(r);
    os << "<text x=\"4\" y=\"" << num(y + 15) << "\">" << escape(labels[r]) << "</text>\n";
    os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y + row) << "\" x2=\"" << num(left + width) << "\" y2=\"" << num(y + row)
       << "\" stroke=\"#ddd\"/>\n";
  }
  const double axis = top + row * static_cast<double>(labels.size());
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(axis) << "\" x2=\"" << num(left + width) << "\" y2=\"" << num(axis)
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 10; ++k) {
    const Micros t = h * k / 10;
    os << "<text x=\"" << num(x_of(t)) << "\" y=\"" << num(axis + 14) << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  if (m.has_security_apps() && sol.p_int > 0)
    for (Micros t = sol.p_int; t < h; t += sol.p_int)
      os << "<line class=\"interval\" x1=\"" << num(x_of(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x_of(t)) << "\" y2=\""
         << num(axis) << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";

  auto block = [&](int row_index, Micros o, Micros len, Micros period, int app, const std::string& label) {
    if (o < 0 || period <= 0) return;
    const double y = top + row * row_index + 3;
    const bool flagged = bad.count(m.apps[static_cast<std::size_t>(app)].id) > 0;
    for (Micros k = 0; k < h; k += period)
      os << "<rect x=\"" << num(x_of(o + k)) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(0.5, x_of(o + k + len) - x_of(o + k)))
         << "\" height=\"" << num(row - 6) << "\" fill=\"" << color(app) << "\"" << (flagged ? " stroke=\"red\" stroke-width=\"2\"" : "")
         << "><title>" << escape(label) << "</title></rect>\n";
  };
  for (std::size_t t = 0; t < m.tasks.size() && t < sol.schedule.task_offsets.size(); ++t) {
    const Task& task = m.tasks[t];
    block(es_row[static_cast<std::size_t>(task.es)], sol.schedule.task_offsets.at(t), task.wcet, task.period, task.app, task.id);
  }
  for (std::size_t c = 0; c < m.substreams.size() && c < sol.schedule.copies.size() && c < sol.routes.pred.size(); ++c) {
    const CopySchedule& cs = sol.schedule.copies.at(c);
    if (!cs.scheduled) continue;
    const int stream = m.substreams[c].stream;
    const Stream& st = m.streams[static_cast<std::size_t>(stream)];
    const RouteTree tree = route_tree(m, sol.routes, static_cast<int>(c));
    for (std::size_t i = 0; i < tree.links.size() && i < cs.link_offsets.size(); ++i)
      block(static_cast<int>(es_rows) + tree.links[i], cs.link_offsets[i], link_duration(m, stream, tree.links[i]), st.period, st.app,
            m.substreams[c].id);
    if (st.secure) {
      block(es_row[static_cast<std::size_t>(tree.root)], cs.mac_gen, net.node(tree.root).hash_time, st.period, st.app,
            "mac " + m.substreams[c].id);
      for (std::size_t r = 0; r < tree.receivers.size() && r < cs.mac_val.size(); ++r)
        block(es_row[static_cast<std::size_t>(tree.receivers[r])], cs.mac_val[r], net.node(tree.receivers[r]).hash_time, st.period, st.app,
              "verify " + m.substreams[c].id);
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string routes_view(const SystemModel& m, const Solution& sol) {
  const Network& net = m.network;
  const std::size_t n = net.nodes().size();
  std::vector<std::pair<double, double>> pos(n);
  bool placed = false;
  for (const Node& node : net.nodes()) placed = placed || node.x != 0 || node.y != 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (placed) {
      pos[i] = {40 + net.nodes()[i].x * 8, 40 + net.nodes()[i].y * 8};
    } else {
      const double a = 2 * M_PI * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
      pos[i] = {440 + 380 * std::cos(a), 440 + 380 * std::sin(a)};
    }
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"880\" font-family=\"monospace\" font-size=\"11\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const Link& l : net.links()) {
    if (l.src > l.dst && net.find_link(l.dst, l.src)) continue;
    os << "<line x1=\"" << num(pos[static_cast<std::size_t>(l.src)].first) << "\" y1=\"" << num(pos[static_cast<std::size_t>(l.src)].second)
       << "\" x2=\"" << num(pos[static_cast<std::size_t>(l.dst)].first) << "\" y2=\"" << num(pos[static_cast<std::size_t>(l.dst)].second)
       << "\" stroke=\"#ccc\" stroke-width=\"3\"/>\n";
  }
  for (std::size_t c = 0; c < m.substreams.size() && c < sol.routes.pred.size(); ++c) {
    const RouteTree tree = route_tree(m, sol.routes, static_cast<int>(c));
    const double shift = 3.0 * (m.substreams[c].copy + 1) - 4.5;
    os << "<g class=\"route\" stroke=\"" << color(static_cast<int>(m.substreams[c].stream)) << "\" stroke-width=\"1.5\"><title>"
       << escape(m.substreams[c].id) << "</title>\n";
    for (LinkId l : tree.links) {
      const Link& k = net.link(l);
      os << "<line x1=\"" << num(pos[static_cast<std::size_t>(k.src)].first + shift) << "\" y1=\""
         << num(pos[static_cast<std::size_t>(k.src)].second + shift) << "\" x2=\"" << num(pos[static_cast<std::size_t>(k.dst)].first + shift)
         << "\" y2=\"" << num(pos[static_cast<std::size_t>(k.dst)].second + shift) << "\"/>\n";
    }
    os << "</g>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = pos[i];
    if (net.is_end_system(static_cast<NodeId>(i)))
      os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"9\" fill=\"#eef\" stroke=\"black\"/>\n";
    else
      os << "<rect x=\"" << num(x - 10) << "\" y=\"" << num(y - 10) << "\" width=\"20\" height=\"20\" fill=\"#efe\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x + 12) << "\" y=\"" << num(y - 12) << "\">" << escape(net.nodes()[i].id) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string render_svg(const SystemModel& model, const Solution& solution, RenderTarget target) {
  return target == RenderTarget::Gantt ? gantt(model, solution) : routes_view(model, solution);
}

}  // namespace tsnsynth
