#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace dat {

/// Milliseconds since the Unix epoch (UTC) or a millisecond duration.
using Millis = std::int64_t;

inline constexpr Millis kSecond = 1000;
inline constexpr Millis kMinute = 60 * kSecond;
inline constexpr Millis kHour = 60 * kMinute;
inline constexpr Millis kDay = 24 * kHour;

/// Half-open time interval [start, end).
struct Interval {
  Millis start = 0;
  Millis end = 0;

  constexpr Millis length() const { return end > start ? end - start : 0; }
  constexpr bool empty() const { return end <= start; }
  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

constexpr Interval intersect(const Interval& a, const Interval& b) {
  return {std::max(a.start, b.start), std::min(a.end, b.end)};
}

constexpr Millis overlap_length(const Interval& a, const Interval& b) {
  return intersect(a, b).length();
}

constexpr bool overlaps(const Interval& a, const Interval& b) {
  return overlap_length(a, b) > 0;
}

/// Sorts and coalesces overlapping or touching intervals; drops empty ones.
inline std::vector<Interval> normalize(std::vector<Interval> v) {
  std::erase_if(v, [](const Interval& i) { return i.empty(); });
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<Interval> out;
  for (const auto& i : v) {
    if (!out.empty() && i.start <= out.back().end) {
      out.back().end = std::max(out.back().end, i.end);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

inline Millis total_length(const std::vector<Interval>& v) {
  Millis sum = 0;
  for (const auto& i : v) sum += i.length();
  return sum;
}

/// a minus b, both normalized. Result is normalized.
inline std::vector<Interval> subtract(const std::vector<Interval>& a,
                                      const std::vector<Interval>& b) {
  std::vector<Interval> out;
  std::size_t j = 0;
  for (auto cur : a) {
    while (j < b.size() && b[j].end <= cur.start) ++j;
    std::size_t k = j;
    while (k < b.size() && b[k].start < cur.end) {
      if (b[k].start > cur.start) out.push_back({cur.start, b[k].start});
      cur.start = std::max(cur.start, b[k].end);
      if (cur.empty()) break;
      ++k;
    }
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

/// Total overlap of a normalized interval set with a window.
inline Millis clipped_length(const std::vector<Interval>& v, const Interval& window) {
  Millis sum = 0;
  for (const auto& i : v) sum += overlap_length(i, window);
  return sum;
}

/// Floor division for day bucketing of possibly negative timestamps.
constexpr Millis floor_div(Millis a, Millis b) {
  Millis q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace dat
