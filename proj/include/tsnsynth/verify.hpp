#pragma once

// Independent solution checker. Expands every task and frame instance over the
// hyperperiod and checks each constraint family directly.

#include "tsnsynth/model.hpp"
#include "tsnsynth/routing.hpp"
#include "tsnsynth/solution.hpp"

#include <string>
#include <vector>

namespace tsnsynth {

enum class Strictness {
  Printed,  // isolation windows [previous-hop offset, offset)
  Queue     // isolation windows [previous-hop offset, offset + transmission)
};

struct Violation {
  std::string constraint;  // R1..R6, S1, S5, S6, S7, S8, S9, T1..T5, bounds, missing
  std::vector<std::string> entities;
  std::string detail;
  Micros time = -1;
};

struct VerifyReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(std::string_view constraint) const;
  /// Applications owning an entity named in some violation, sorted.
  std::vector<std::string> applications(const SystemModel& model) const;
  std::string to_text() const;
};

VerifyReport verify_solution(const SystemModel& model, const Solution& solution,
                             Strictness strictness = Strictness::Printed);

/// Per stream: true iff some copy avoids every failed link and still reaches all receivers.
std::vector<bool> delivered_under_failures(const SystemModel& model, const RouteAssignment& routes,
                                           const std::vector<LinkId>& failed);

/// Streams (ids) for which some set of rl-1 failed links cuts every copy.
std::vector<std::string> fault_tolerance_violations(const SystemModel& model, const RouteAssignment& routes);

}  // namespace tsnsynth
