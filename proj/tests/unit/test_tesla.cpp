#include "fixtures.hpp"

#include "tsnsynth/rng.hpp"
#include "tsnsynth/tesla.hpp"

#include <doctest.h>

#include <numeric>

using namespace tsnsynth;

namespace {

// Largest p dividing h such that every app fits depth+1 intervals into its
// period and p is harmonic with the gcd of all periods. Scans every candidate.
Micros brute_p_int(const std::vector<AppTiming>& apps) {
  Micros h = 1, g = 0;
  for (const auto& a : apps) h = std::lcm(h, a.period), g = std::gcd(g, a.period);
  for (Micros p = h; p >= 1; --p) {
    if (h % p) continue;
    bool ok = p % g == 0 || g % p == 0;
    for (const auto& a : apps) ok = ok && p * (a.depth + 1) <= a.period;
    if (ok) return p;
  }
  return 0;
}

}  // namespace

TEST_CASE("motivational example interval is 500") {
  SystemModel m = expand_security_model(fixtures::motivational());
  const auto t = app_timings(m);
  REQUIRE(t.size() == 1);
  CHECK(t[0].depth == 1);
  CHECK(choose_p_int(m) == 500);
}

TEST_CASE("without security applications the interval is the hyperperiod") {
  SystemModel m = expand_security_model(fixtures::motivational(false));
  CHECK(choose_p_int(m) == 1000);
}

TEST_CASE("interval optimization matches exhaustive search") {
  Rng rng(42);
  const std::vector<Micros> periods{100, 150, 200, 250, 300, 400, 500, 600, 1000};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<AppTiming> apps;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i)
      apps.push_back({"a" + std::to_string(i), periods[static_cast<std::size_t>(rng.uniform_int(0, 8))], static_cast<int>(rng.uniform_int(0, 3))});
    Micros h = 1;
    for (const auto& a : apps) h = std::lcm(h, a.period);
    const Micros want = brute_p_int(apps);
    REQUIRE(want > 0);
    const Micros got = optimize_p_int(apps, h);
    CHECK(got == want);
    CHECK(p_int_admissible(got, apps, h));
  }
}

TEST_CASE("an application too short for its chain is named") {
  std::vector<AppTiming> apps{{"roomy", 1000, 0}, {"tight", 2, 3}};
  try {
    optimize_p_int(apps, 1000);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.stage() == "tesla");
    CHECK(e.entity() == "tight");
  }
}

TEST_CASE("authentication interval arithmetic") {
  CHECK(auth_interval(0, 500) == 1);
  CHECK(auth_interval(499, 500) == 1);
  CHECK(auth_interval(500, 500) == 2);
  CHECK(earliest_auth_time(1, 500, 30) == 530);
}
