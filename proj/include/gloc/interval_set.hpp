#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace gloc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Integration region in the reflected coordinate t = |y - x| >= 0.
///
/// Intervals coming from the same side of the receiver are disjoint. The
/// positive side and the reflected negative side may overlap in t, since each
/// contributes its own integral; they are kept as separate entries.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> items) : items_(std::move(items)) { normalize(); }

  const std::vector<Interval>& intervals() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  double total_length() const {
    double total = 0.0;
    for (const auto& iv : items_) total += iv.length();
    return total;
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  void normalize() {
    std::erase_if(items_, [](const Interval& iv) { return !(iv.hi > iv.lo); });
    std::sort(items_.begin(), items_.end(), [](const Interval& a, const Interval& b) {
      return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
  }

  std::vector<Interval> items_;
};

namespace interval_ops {

/// Removes the open interval (cut.lo, cut.hi) from a list of disjoint line intervals.
inline std::vector<Interval> subtract(const std::vector<Interval>& pieces, Interval cut) {
  std::vector<Interval> out;
  out.reserve(pieces.size() + 1);
  for (const auto& p : pieces) {
    if (p.hi <= cut.lo || p.lo >= cut.hi) {
      out.push_back(p);
      continue;
    }
    if (p.lo < cut.lo) out.push_back({p.lo, cut.lo});
    if (p.hi > cut.hi) out.push_back({cut.hi, p.hi});
  }
  return out;
}

/// Folds signed offsets t into distances |t|: positive parts are kept, negative
/// parts are mirrored onto t >= 0.
inline IntervalSet reflect(const std::vector<Interval>& pieces) {
  std::vector<Interval> out;
  for (const auto& p : pieces) {
    if (p.hi > 0.0) out.push_back({std::max(p.lo, 0.0), p.hi});
    if (p.lo < 0.0) out.push_back({std::max(-p.hi, 0.0), -p.lo});
  }
  return IntervalSet(std::move(out));
}

}  // namespace interval_ops

}  // namespace gloc
