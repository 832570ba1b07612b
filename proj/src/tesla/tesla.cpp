#include "tsnsynth/tesla.hpp"

#include <algorithm>
#include <numeric>

namespace tsnsynth {

namespace {
Micros gcd_of(std::span<const AppTiming> apps) {
  Micros g = 0;
  for (const auto& a : apps) g = std::gcd(g, a.period);
  return g;
}
}  // namespace

bool p_int_admissible(Micros p, std::span<const AppTiming> apps, Micros hyperperiod) {
  if (p <= 0 || hyperperiod % p != 0) return false;
  for (const auto& a : apps)
    if (p * (a.depth + 1) > a.period) return false;
  const Micros g = gcd_of(apps);
  if (g > 0 && p % g != 0 && g % p != 0) return false;
  return true;
}

Micros optimize_p_int(std::span<const AppTiming> apps, Micros hyperperiod) {
  if (hyperperiod <= 0) throw ModelError("hyperperiod must be positive");
  std::vector<Micros> divisors;
  for (Micros d = 1; d * d <= hyperperiod; ++d) {
    if (hyperperiod % d != 0) continue;
    divisors.push_back(d);
    if (d != hyperperiod / d) divisors.push_back(hyperperiod / d);
  }
  std::sort(divisors.rbegin(), divisors.rend());
  for (Micros p : divisors)
    if (p_int_admissible(p, apps, hyperperiod)) return p;

  auto tightest = std::min_element(apps.begin(), apps.end(), [](const AppTiming& a, const AppTiming& b) {
    return a.period / (a.depth + 1) < b.period / (b.depth + 1);
  });
  const std::string who = tightest == apps.end() ? std::string() : tightest->id;
  throw InfeasibleError("tesla", who, "no key disclosure interval fits application " + who);
}

std::vector<AppTiming> app_timings(const SystemModel& model) {
  std::vector<AppTiming> out;
  for (int a : model.normal_apps()) {
    const Application& app = model.apps[static_cast<std::size_t>(a)];
    out.push_back({app.id, app.period, communication_depth(model, a)});
  }
  return out;
}

Micros choose_p_int(const SystemModel& model) {
  auto timings = app_timings(model);
  std::vector<Micros> periods;
  for (const auto& t : timings) periods.push_back(t.period);
  const Micros h = hyperperiod(periods);
  if (!model.has_security_apps()) return h;
  return optimize_p_int(timings, h);
}

}  // namespace tsnsynth
