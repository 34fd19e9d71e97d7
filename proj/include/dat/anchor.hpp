#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "dat/precise_matcher.hpp"
#include "dat/sessionizer.hpp"

namespace dat {

struct AnchorConfig {
  Millis max_gap = 30 * kMinute;    // idle time allowed between chain links
  Millis max_total = 2 * kHour;     // anchor time added per diff at most

  void validate() const {
    if (max_gap < 0 || max_total < 0) throw Error("anchor config: limits must be nonnegative");
  }
};

/// Adds Anchor-DAT: coding-related sessions immediately preceding the first
/// precise slice of each commit join that commit's diff.
///
/// The backward walk stops at the first session that is attributed, is not
/// coding-related, leaves a gap above max_gap, or would push the diff's anchor
/// time past max_total. Later anchor points claim first, so a contested chain
/// goes to the chronologically next precise match.
inline std::vector<DiffDat> extend_with_anchors(std::vector<DiffDat> dats, const SessionSet& sessions,
                                                const AnchorConfig& cfg = {}) {
  cfg.validate();

  std::map<std::string, std::vector<std::size_t>> timeline;
  for (std::size_t i = 0; i < sessions.sessions.size(); ++i)
    timeline[sessions.sessions[i].user].push_back(i);

  std::map<std::string, std::vector<Interval>> claimed_by_user;
  for (const auto& d : dats)
    for (const auto& c : d.intervals) claimed_by_user[c.user].push_back(c.span);
  std::vector<bool> claimed(sessions.sessions.size(), false);
  for (auto& [user, spans] : claimed_by_user) {
    spans = normalize(std::move(spans));
    auto tl = timeline.find(user);
    if (tl == timeline.end()) continue;
    for (std::size_t idx : tl->second) {
      const Interval s = sessions.sessions[idx].span();
      auto it = std::lower_bound(spans.begin(), spans.end(), s,
                                 [](const Interval& a, const Interval& b) { return a.end <= b.start; });
      claimed[idx] = it != spans.end() && overlaps(*it, s);
    }
  }

  struct AnchorPoint {
    Millis start;
    std::size_t dat;
    std::string commit;
  };
  std::map<std::string, std::vector<AnchorPoint>> points;
  for (std::size_t d = 0; d < dats.size(); ++d) {
    std::map<std::string, const Contribution*> first;
    for (const auto& c : dats[d].intervals) {
      if (c.source != Source::precise || c.user != dats[d].author) continue;
      auto [it, inserted] = first.emplace(c.commit_id, &c);
      if (!inserted && c.span.start < it->second->span.start) it->second = &c;
    }
    for (const auto& [commit, c] : first)
      points[dats[d].author].push_back({c->span.start, d, commit});
  }

  for (auto& [user, pts] : points) {
    std::sort(pts.begin(), pts.end(), [](const AnchorPoint& a, const AnchorPoint& b) {
      return std::tie(b.start, b.dat, b.commit) < std::tie(a.start, a.dat, a.commit);
    });
    const auto& tl = timeline[user];
    for (const auto& p : pts) {
      // Session whose span contains the anchor point.
      auto pos = std::upper_bound(tl.begin(), tl.end(), p.start, [&](Millis t, std::size_t idx) {
        return t < sessions.sessions[idx].start;
      });
      if (pos == tl.begin()) continue;
      --pos;
      // A point inside a session means its left part belongs to an earlier commit.
      if (sessions.sessions[*pos].start != p.start) continue;

      DiffDat& dat = dats[p.dat];
      Millis boundary = p.start;
      while (pos != tl.begin()) {
        --pos;
        const Session& cand = sessions.sessions[*pos];
        if (claimed[*pos] || cand.tool_class != ToolClass::coding_related) break;
        if (boundary - cand.end > cfg.max_gap) break;
        if (dat.anchor_extra + cand.duration() > cfg.max_total) break;
        claimed[*pos] = true;
        dat.anchor_extra += cand.duration();
        dat.intervals.push_back({user, cand.tool, cand.workspace, cand.span(), Source::anchor, p.commit});
        boundary = cand.start;
      }
    }
  }

  for (auto& dat : dats)
    std::stable_sort(dat.intervals.begin(), dat.intervals.end(), detail::contribution_less);
  return dats;
}

}  // namespace dat
