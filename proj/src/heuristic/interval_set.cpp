#include "tsnsynth/interval_set.hpp"

#include <algorithm>
#include <numeric>

namespace tsnsynth {

void IntervalSet::add(Micros begin, Micros end) {
  if (begin >= end) return;
  std::vector<Interval> out;
  out.reserve(iv_.size() + 1);
  std::size_t i = 0;
  while (i < iv_.size() && iv_[i].end < begin) out.push_back(iv_[i++]);
  Interval merged{begin, end};
  while (i < iv_.size() && iv_[i].begin <= merged.end) {
    merged.begin = std::min(merged.begin, iv_[i].begin);
    merged.end = std::max(merged.end, iv_[i].end);
    ++i;
  }
  out.push_back(merged);
  while (i < iv_.size()) out.push_back(iv_[i++]);
  iv_ = std::move(out);
}

void IntervalSet::subtract(Micros begin, Micros end) {
  if (begin >= end) return;
  std::vector<Interval> out;
  out.reserve(iv_.size() + 1);
  for (const Interval& x : iv_) {
    if (x.end <= begin || x.begin >= end) {
      out.push_back(x);
      continue;
    }
    if (x.begin < begin) out.push_back({x.begin, begin});
    if (x.end > end) out.push_back({end, x.end});
  }
  iv_ = std::move(out);
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  IntervalSet out;
  std::size_t i = 0, j = 0;
  while (i < iv_.size() && j < other.iv_.size()) {
    const Micros b = std::max(iv_[i].begin, other.iv_[j].begin);
    const Micros e = std::min(iv_[i].end, other.iv_[j].end);
    if (b < e) out.iv_.push_back({b, e});
    if (iv_[i].end < other.iv_[j].end) ++i;
    else ++j;
  }
  return out;
}

std::optional<Interval> IntervalSet::run_containing(Micros x) const {
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x, [](Micros v, const Interval& iv) { return v < iv.begin; });
  if (it == iv_.begin()) return std::nullopt;
  --it;
  if (x < it->end) return *it;
  return std::nullopt;
}

bool IntervalSet::contains(Micros x) const { return run_containing(x).has_value(); }

std::optional<Micros> IntervalSet::first_at_or_after(Micros x) const {
  for (const Interval& iv : iv_) {
    if (iv.end <= x) continue;
    return std::max(x, iv.begin);
  }
  return std::nullopt;
}

std::optional<Micros> IntervalSet::last_at_or_before(Micros x) const {
  for (auto it = iv_.rbegin(); it != iv_.rend(); ++it) {
    if (it->begin > x) continue;
    return std::min(x, it->end - 1);
  }
  return std::nullopt;
}

Micros IntervalSet::measure() const {
  Micros m = 0;
  for (const Interval& iv : iv_) m += iv.end - iv.begin;
  return m;
}

void fold_occupancy(IntervalSet& busy, Micros offset, Micros length, Micros period, Micros target_period) {
  if (length <= 0) return;
  const Micros g = std::gcd(period, target_period);
  if (length >= g) {
    busy.add(0, target_period);
    return;
  }
  const Micros base = ((offset % g) + g) % g;
  for (Micros start = base; start < target_period; start += g) {
    const Micros end = start + length;
    if (end <= target_period) {
      busy.add(start, end);
    } else {
      busy.add(start, target_period);
      busy.add(0, end - target_period);
    }
  }
}

void ResourceTimeline::add(const Occupancy& occ) {
  occ_.push_back(occ);
  cache_.clear();
}

void ResourceTimeline::remove_owner(std::int64_t owner) {
  auto it = std::remove_if(occ_.begin(), occ_.end(), [owner](const Occupancy& o) { return o.owner == owner; });
  if (it == occ_.end()) return;
  occ_.erase(it, occ_.end());
  cache_.clear();
}

const IntervalSet& ResourceTimeline::free(Micros period) const {
  auto it = cache_.find(period);
  if (it != cache_.end()) return it->second;
  IntervalSet busy;
  for (const Occupancy& o : occ_) fold_occupancy(busy, o.offset, o.length, o.period, period);
  IntervalSet free(0, period);
  for (const Interval& b : busy.intervals()) free.subtract(b.begin, b.end);
  return cache_.emplace(period, std::move(free)).first->second;
}

}  // namespace tsnsynth
