#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dat/precise_matcher.hpp"
#include "dat/sessionizer.hpp"
#include "dat/stats.hpp"

namespace dat {

/// Time Spent by Diff: coding time in a window over diffs landed in it.
struct TsdRecord {
  std::string user;
  Interval window;
  Millis total_coding_time = 0;
  std::int64_t diffs_published = 0;
  std::optional<double> tsd;  // absent when no diff landed
};

inline std::vector<TsdRecord> compute_tsd(const SessionSet& sessions, const std::vector<DiffMeta>& diffs,
                                          Interval window) {
  if (window.empty()) throw Error("tsd window must be non-empty");
  std::map<std::string, TsdRecord> by_user;
  auto rec = [&](const std::string& user) -> TsdRecord& {
    auto [it, inserted] = by_user.try_emplace(user);
    if (inserted) {
      it->second.user = user;
      it->second.window = window;
    }
    return it->second;
  };
  for (const auto& s : sessions.sessions)
    if (is_coding(s.tool_class)) rec(s.user).total_coding_time += overlap_length(s.span(), window);
  for (const auto& d : diffs)
    if (d.landed_ts && *d.landed_ts >= window.start && *d.landed_ts < window.end)
      ++rec(d.author).diffs_published;

  std::vector<TsdRecord> out;
  for (auto& [_, r] : by_user) {
    if (r.diffs_published > 0)
      r.tsd = static_cast<double>(r.total_coding_time) / static_cast<double>(r.diffs_published);
    out.push_back(std::move(r));
  }
  return out;
}

/// Code Gestation Time: wall clock from first authored activity to landing.
struct CgtRecord {
  std::string diff_id;
  Millis coding_start = 0;
  Millis landed = 0;
  Millis cgt = 0;
};

struct CgtResult {
  std::vector<CgtRecord> records;
  std::vector<std::string> notes;  // skipped diffs
};

inline CgtResult compute_cgt(const std::vector<DiffDat>& dats, const std::vector<DiffMeta>& diffs) {
  std::map<std::string, const DiffMeta*> meta;
  for (const auto& d : diffs) meta.emplace(d.diff_id, &d);
  CgtResult out;
  for (const auto& dat : dats) {
    std::optional<Millis> start;
    for (const auto& c : dat.intervals) {
      if (c.source == Source::review || c.user != dat.author) continue;
      if (!start || c.span.start < *start) start = c.span.start;
    }
    auto it = meta.find(dat.diff_id);
    if (it == meta.end() || !it->second->landed_ts) {
      out.notes.push_back(dat.diff_id + ": no landed_ts");
      continue;
    }
    if (!start) {
      out.notes.push_back(dat.diff_id + ": no authored intervals");
      continue;
    }
    const Millis landed = *it->second->landed_ts;
    if (landed < *start) {
      out.notes.push_back(dat.diff_id + ": landed before coding start");
      continue;
    }
    out.records.push_back({dat.diff_id, *start, landed, landed - *start});
  }
  return out;
}

using EligibilityFn = std::function<bool(const DiffMeta&)>;

/// Fraction of eligible diffs with nonzero Anchor-DAT.
inline double coverage(const std::vector<DiffDat>& dats, const std::vector<DiffMeta>& diffs,
                       const EligibilityFn& eligible = {}) {
  std::map<std::string, Millis> dat_of;
  for (const auto& d : dats) dat_of[d.diff_id] = d.anchor_dat();
  std::size_t n = 0, covered = 0;
  for (const auto& d : diffs) {
    if (eligible && !eligible(d)) continue;
    ++n;
    if (auto it = dat_of.find(d.diff_id); it != dat_of.end() && it->second > 0) ++covered;
  }
  if (n == 0) throw StatsError("coverage needs at least one eligible diff");
  return static_cast<double>(covered) / static_cast<double>(n);
}

/// Calendar bucketing: fixed width aligned to an origin timestamp.
struct Bucketing {
  Millis width = kDay;
  Millis origin = 0;

  static Bucketing day() { return {kDay, 0}; }
  /// ISO weeks; 1970-01-05 was a Monday.
  static Bucketing week() { return {7 * kDay, 4 * kDay}; }
  Millis bucket_of(Millis t) const { return origin + floor_div(t - origin, width) * width; }
};

struct TrendPoint {
  Millis bucket_start = 0;
  std::size_t n = 0;
  std::optional<double> winsorized_mean;  // absent for empty buckets
};

/// Winsorized mean of Anchor-DAT per landing bucket over covered diffs. Every
/// bucket between the first and last populated one is emitted.
inline std::vector<TrendPoint> trendline(const std::vector<DiffDat>& dats, const std::vector<DiffMeta>& diffs,
                                         const Bucketing& bucketing, double p = 0.99) {
  if (bucketing.width <= 0) throw Error("bucket width must be positive");
  std::map<std::string, const DiffMeta*> meta;
  for (const auto& d : diffs) meta.emplace(d.diff_id, &d);
  std::map<Millis, std::vector<double>> buckets;
  for (const auto& dat : dats) {
    auto it = meta.find(dat.diff_id);
    if (it == meta.end() || !it->second->landed_ts || dat.anchor_dat() <= 0) continue;
    buckets[bucketing.bucket_of(*it->second->landed_ts)].push_back(static_cast<double>(dat.anchor_dat()));
  }
  std::vector<TrendPoint> out;
  if (buckets.empty()) return out;
  for (Millis b = buckets.begin()->first; b <= buckets.rbegin()->first; b += bucketing.width) {
    TrendPoint pt{b, 0, std::nullopt};
    if (auto it = buckets.find(b); it != buckets.end()) {
      pt.n = it->second.size();
      pt.winsorized_mean = winsorized_mean(it->second, p);
    }
    out.push_back(pt);
  }
  return out;
}

struct AggregateReport {
  double percentile = 0.99;
  std::size_t n = 0;
  std::optional<double> winsorized_mean_anchor;
  std::optional<double> winsorized_mean_precise;
  double coverage = 0.0;
  std::vector<TrendPoint> trend;
};

inline AggregateReport aggregate(const std::vector<DiffDat>& dats, const std::vector<DiffMeta>& diffs,
                                 double p, const Bucketing& bucketing) {
  AggregateReport r;
  r.percentile = p;
  std::vector<double> anchor, precise;
  for (const auto& d : dats) {
    if (d.anchor_dat() > 0) anchor.push_back(static_cast<double>(d.anchor_dat()));
    if (d.author_precise > 0) precise.push_back(static_cast<double>(d.author_precise));
  }
  r.n = anchor.size();
  if (!anchor.empty()) r.winsorized_mean_anchor = winsorized_mean(anchor, p);
  if (!precise.empty()) r.winsorized_mean_precise = winsorized_mean(precise, p);
  r.coverage = diffs.empty() ? 0.0 : coverage(dats, diffs);
  r.trend = trendline(dats, diffs, bucketing, p);
  return r;
}

}  // namespace dat
