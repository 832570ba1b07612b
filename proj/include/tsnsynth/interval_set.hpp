#pragma once

// Ordered sets of disjoint half-open integer intervals and periodic resource
// timelines folded onto a period class.

#include "tsnsynth/model.hpp"

#include <map>
#include <optional>
#include <vector>

namespace tsnsynth {

struct Interval {
  Micros begin = 0;
  Micros end = 0;  // exclusive

  bool operator==(const Interval&) const = default;
};

class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(Micros begin, Micros end) { add(begin, end); }

  void add(Micros begin, Micros end);
  void subtract(Micros begin, Micros end);
  IntervalSet intersect(const IntervalSet& other) const;

  bool contains(Micros x) const;
  /// The maximal interval containing x.
  std::optional<Interval> run_containing(Micros x) const;
  std::optional<Micros> first_at_or_after(Micros x) const;
  std::optional<Micros> last_at_or_before(Micros x) const;

  const std::vector<Interval>& intervals() const noexcept { return iv_; }
  bool empty() const noexcept { return iv_.empty(); }
  Micros measure() const;

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> iv_;  // sorted, disjoint, non-adjacent
};

/// Adds the occupancy of [offset, offset+length) repeating every `period`,
/// as seen by an observer repeating every `target_period`, to `busy` (a subset of [0, target_period)).
void fold_occupancy(IntervalSet& busy, Micros offset, Micros length, Micros period, Micros target_period);

struct Occupancy {
  Micros offset = 0;
  Micros length = 0;
  Micros period = 0;
  std::int64_t owner = 0;
};

/// Occupancies of one resource with cached free sets per period class.
class ResourceTimeline {
 public:
  void add(const Occupancy& occ);
  void remove_owner(std::int64_t owner);
  /// Points of [0, period) not covered by any occupancy folded onto `period`.
  const IntervalSet& free(Micros period) const;
  const std::vector<Occupancy>& occupancies() const noexcept { return occ_; }

 private:
  std::vector<Occupancy> occ_;
  mutable std::map<Micros, IntervalSet> cache_;
};

}  // namespace tsnsynth
