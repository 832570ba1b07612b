#pragma once

// TESLA key-disclosure interval selection and interval arithmetic.

#include "tsnsynth/model.hpp"

#include <span>
#include <string>

namespace tsnsynth {

struct AppTiming {
  std::string id;
  Micros period = 0;
  int depth = 0;  // communication depth
};

/// True iff p satisfies the fit, hyperperiod-divisor and gcd-harmonic conditions.
bool p_int_admissible(Micros p, std::span<const AppTiming> apps, Micros hyperperiod);

/// Largest admissible P_int. Throws InfeasibleError naming the tightest application.
Micros optimize_p_int(std::span<const AppTiming> apps, Micros hyperperiod);

/// Timing summary of all normal applications of a model.
std::vector<AppTiming> app_timings(const SystemModel& model);

/// Interval length for a model: the optimum when security applications exist,
/// otherwise the hyperperiod of the normal applications.
Micros choose_p_int(const SystemModel& model);

/// Earliest interval in which a frame that arrived by `arrival_end` can be authenticated.
inline std::int64_t auth_interval(Micros arrival_end, Micros p_int) { return arrival_end / p_int + 1; }

/// Earliest consumption time of an authenticated frame.
inline Micros earliest_auth_time(std::int64_t phi, Micros p_int, Micros key_verify_end) {
  return phi * p_int + key_verify_end;
}

}  // namespace tsnsynth
