#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "dat/event_log.hpp"
#include "dat/pipeline.hpp"

namespace dat {

namespace detail {

// Splits an interval at UTC midnights and adds each piece to its day.
inline void add_by_day(std::map<Millis, Millis>& days, Interval i) {
  while (!i.empty()) {
    const Millis day = floor_div(i.start, kDay);
    const Millis cut = std::min(i.end, (day + 1) * kDay);
    days[day] += cut - i.start;
    i.start = cut;
  }
}

inline std::string fmt_interval(const Interval& i) {
  return "[" + std::to_string(i.start) + "," + std::to_string(i.end) + ")";
}

}  // namespace detail

/// Structural DAT invariants: totals match their intervals, per-user
/// disjointness, the coding-time bound per user-day and the 24 h ceiling.
/// Works on any DAT result set, including ones produced elsewhere.
inline std::vector<Violation> check_dat_invariants(const SessionSet& sessions, const std::vector<DiffDat>& dats) {
  std::vector<Violation> out;

  for (const auto& d : dats) {
    if (d.author_precise < 0 || d.anchor_extra < 0)
      out.push_back({"anchor_ge_precise", d.diff_id + ": negative precise or anchor duration"});
    Millis precise = 0, anchor = 0;
    std::map<std::string, Millis> review;
    for (const auto& c : d.intervals) {
      if (c.source == Source::precise && c.user == d.author) precise += c.span.length();
      if (c.source == Source::anchor) anchor += c.span.length();
      if (c.source == Source::review) review[c.user] += c.span.length();
    }
    if (precise != d.author_precise || anchor != d.anchor_extra || review != d.reviewer_precise)
      out.push_back({"dat_totals", d.diff_id + ": durations do not match contributing intervals"});
  }

  struct Owned {
    Interval span;
    const std::string* diff;
  };
  std::map<std::string, std::vector<Owned>> by_user;
  for (const auto& d : dats)
    for (const auto& c : d.intervals) by_user[c.user].push_back({c.span, &d.diff_id});
  for (auto& [user, v] : by_user) {
    std::sort(v.begin(), v.end(), [](const Owned& a, const Owned& b) { return a.span.start < b.span.start; });
    Millis reach = INT64_MIN;
    const Owned* reach_of = nullptr;
    for (const auto& o : v) {
      if (reach_of && o.span.start < reach) {
        out.push_back({"dat_non_overlap", "user " + user + ": " + *reach_of->diff + " " +
                                              detail::fmt_interval(reach_of->span) + " overlaps " + *o.diff +
                                              " " + detail::fmt_interval(o.span)});
      }
      if (o.span.end > reach) {
        reach = o.span.end;
        reach_of = &o;
      }
    }
  }

  std::map<std::string, std::map<Millis, Millis>> coding_by_day, dat_coding_by_day, dat_all_by_day;
  for (const auto& s : sessions.sessions)
    if (is_coding(s.tool_class)) detail::add_by_day(coding_by_day[s.user], s.span());
  for (const auto& d : dats) {
    for (const auto& c : d.intervals) {
      detail::add_by_day(dat_all_by_day[c.user], c.span);
      if (c.source != Source::review) detail::add_by_day(dat_coding_by_day[c.user], c.span);
    }
  }
  for (const auto& [user, days] : dat_coding_by_day) {
    for (const auto& [day, total] : days) {
      const Millis bound = coding_by_day[user][day];
      if (total > bound)
        out.push_back({"dat_le_tsd", "user " + user + " day " + std::to_string(day) + ": DAT " +
                                         std::to_string(total) + " ms exceeds coding time " +
                                         std::to_string(bound) + " ms"});
    }
  }
  for (const auto& [user, days] : dat_all_by_day)
    for (const auto& [day, total] : days)
      if (total > kDay)
        out.push_back({"dat_day_24h", "user " + user + " day " + std::to_string(day) + ": DAT " +
                                          std::to_string(total) + " ms exceeds 24 h"});
  return out;
}

/// Per user: ide session time = precise slices in diffs + non-diff commit time
/// + trailing unattributed time.
inline std::vector<Violation> check_ide_conservation(const PipelineResult& r) {
  std::map<std::string, Millis> ide, accounted;
  for (const auto& s : r.sessions.sessions)
    if (s.tool_class == ToolClass::ide) ide[s.user] += s.duration();
  for (const auto& d : r.dats)
    for (const auto& c : d.intervals)
      if (c.source == Source::precise) accounted[c.user] += c.span.length();
  for (const auto& [user, t] : r.non_diff_commit_time) accounted[user] += t;
  for (const auto& s : r.attribution.unattributed) accounted[s.user] += s.span.length();

  std::vector<Violation> out;
  for (const auto& [user, t] : ide)
    if (accounted[user] != t)
      out.push_back({"ide_conservation", "user " + user + ": ide time " + std::to_string(t) +
                                             " ms but " + std::to_string(accounted[user]) + " ms accounted"});
  return out;
}

}  // namespace dat
