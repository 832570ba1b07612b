#include "tsnsynth/model.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tsnsynth {

SystemModel expand_security_model(SystemModel model) {
  std::set<NodeId> expanded;
  for (const auto& a : model.apps)
    if (a.kind == AppKind::Security) expanded.insert(a.key_source);

  // Sender ES -> (receiver ESs, max redundancy level) over its secure streams.
  std::map<NodeId, std::pair<std::set<NodeId>, int>> senders;
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const Stream& st = model.streams[s];
    if (!st.secure || st.key_stream) continue;
    const NodeId e = model.sender_es(static_cast<int>(s));
    auto& entry = senders[e];
    for (NodeId r : model.receiver_es(static_cast<int>(s))) entry.first.insert(r);
    entry.second = std::max(entry.second, st.rl);
  }

  const Network& net = model.network;
  for (const auto& [e, info] : senders) {
    if (expanded.count(e)) continue;
    const Node& sender = net.node(e);
    if (sender.hash_time <= 0) throw ModelError("end system " + sender.id + " sends secure streams but has no hash time");
    const int app = static_cast<int>(model.apps.size());
    Application sec;
    sec.id = "sec_" + sender.id;
    sec.kind = AppKind::Security;
    sec.key_source = e;

    Task release;
    release.id = "kr_" + sender.id;
    release.app = app;
    release.es = e;
    release.wcet = (sender.hash_time + 1) / 2;
    release.role = TaskRole::KeyRelease;
    const int release_idx = static_cast<int>(model.tasks.size());
    model.tasks.push_back(release);
    sec.tasks.push_back(release_idx);

    Stream key;
    key.id = "k_" + sender.id;
    key.app = app;
    key.sender = release_idx;
    key.size = model.constants.key_size;
    key.rl = info.second;
    key.key_stream = true;

    for (NodeId r : info.first) {
      const Node& rn = net.node(r);
      if (rn.hash_time <= 0) throw ModelError("end system " + rn.id + " receives secure streams but has no hash time");
      Task verify;
      verify.id = "kv_" + sender.id + "_" + rn.id;
      verify.app = app;
      verify.es = r;
      verify.wcet = rn.hash_time;
      verify.role = TaskRole::KeyVerify;
      verify.key_source = e;
      const int idx = static_cast<int>(model.tasks.size());
      model.tasks.push_back(verify);
      sec.tasks.push_back(idx);
      key.receivers.push_back(idx);
    }
    sec.streams.push_back(static_cast<int>(model.streams.size()));
    model.streams.push_back(key);
    model.apps.push_back(sec);
  }
  if (model.p_int > 0) bind_p_int(model, model.p_int);
  materialize_substreams(model);
  return model;
}

void bind_p_int(SystemModel& model, Micros p_int) {
  if (p_int <= 0) throw ModelError("P_int must be positive");
  model.p_int = p_int;
  for (auto& a : model.apps) {
    if (a.kind != AppKind::Security) continue;
    a.period = p_int;
    for (int t : a.tasks) model.tasks[static_cast<std::size_t>(t)].period = p_int;
    for (int s : a.streams) model.streams[static_cast<std::size_t>(s)].period = p_int;
  }
}

}  // namespace tsnsynth
