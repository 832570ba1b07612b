#include "fixtures.hpp"

#include <stdexcept>

namespace fixtures {

using namespace tsnsynth;

SystemModel motivational(bool security, bool redundancy) {
  GlobalConstants c;
  c.key_size = 16;
  c.mac_size = 16;
  ModelBuilder b(c);
  b.end_system("ES1", 10, 0, 0);
  b.end_system("ES2", 10, 0, 60);
  b.end_system("ES3", 10, 90, 0);
  b.end_system("ES4", 10, 90, 60);
  b.switch_node("SW1", 45, 10);
  b.switch_node("SW2", 45, 50);
  const Rational speed = speed_from_mbps(10);
  b.duplex("ES1", "SW1", speed);
  b.duplex("ES2", "SW1", speed);
  b.duplex("ES2", "SW2", speed);
  b.duplex("ES3", "SW1", speed);
  b.duplex("ES3", "SW2", speed);
  b.duplex("ES4", "SW1", speed);
  b.duplex("ES4", "SW2", speed);
  b.duplex("SW1", "SW2", speed);
  const int app = b.application("app", 1000);
  b.task(app, "t1", "ES1", 100);
  b.task(app, "t2", "ES2", 100);
  b.task(app, "t3", "ES3", 100);
  b.task(app, "t4", "ES4", 100);
  b.stream(app, "s1", "t1", {"t3"}, 50, 1, security);
  b.stream(app, "s2", "t2", {"t3", "t4"}, 50, redundancy ? 2 : 1, security);
  return b.build();
}

SystemModel prepared(SystemModel m) {
  if (!prepare_model(m)) throw std::runtime_error("no key disclosure interval fits");
  return m;
}

ModelBuilder line(Rational speed, Micros hash_time) {
  ModelBuilder b;
  b.end_system("A", hash_time);
  b.end_system("B", hash_time);
  b.switch_node("S");
  b.duplex("A", "S", speed);
  b.duplex("S", "B", speed);
  return b;
}

}  // namespace fixtures
