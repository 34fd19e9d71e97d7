#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dat/sessionizer.hpp"
#include "dat/types.hpp"

namespace dat {

/// A piece of an ide session, split at commit timestamps.
struct AttributedSlice {
  std::size_t session = 0;  // index into SessionSet::sessions
  std::string user;
  std::string tool;
  std::string workspace;
  Interval span;
  friend bool operator==(const AttributedSlice&, const AttributedSlice&) = default;
};

struct CommitAttribution {
  std::map<std::string, std::vector<AttributedSlice>> by_commit;
  /// Trailing ide time after the last commit-creation event of a workspace.
  std::vector<AttributedSlice> unattributed;
  /// Amend result id -> the commit it rewrote.
  std::map<std::string, std::string> amended_from;
};

enum class Source { precise, review, anchor };

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::precise: return "precise";
    case Source::review: return "review";
    case Source::anchor: return "anchor";
  }
  return "precise";
}

struct Contribution {
  std::string user;
  std::string tool;
  std::string workspace;
  Interval span;
  Source source = Source::precise;
  std::string commit_id;  // empty for review time

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct DiffDat {
  std::string diff_id;
  std::string author;
  Millis author_precise = 0;
  std::map<std::string, Millis> reviewer_precise;
  /// Precise time on the diff's commits by users other than the author.
  std::map<std::string, Millis> contributor_precise;
  Millis anchor_extra = 0;
  std::vector<Contribution> intervals;

  Millis anchor_dat() const { return author_precise + anchor_extra; }
  friend bool operator==(const DiffDat&, const DiffDat&) = default;
};

struct Assembly {
  std::vector<DiffDat> dats;  // ordered by diff id
  std::map<std::string, Millis> non_diff_commit_time;  // per user
  std::vector<std::string> notes;
};

/// Drops every checkout, automatic or manual, keeping commit and amend events
/// in order.
inline std::vector<VcsEvent> filter_vcs_events(const std::vector<VcsEvent>& events) {
  std::vector<VcsEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [](const VcsEvent& e) { return e.creates_commit(); });
  return out;
}

/// Tracks the checked-out commit per (user, workspace) to learn which commit
/// each amend rewrote. Expects time-sorted events, checkouts included.
inline std::map<std::string, std::string> amend_lineage(const std::vector<VcsEvent>& events) {
  std::map<std::pair<std::string, std::string>, std::string> head;
  std::map<std::string, std::string> lineage;
  for (const auto& e : events) {
    auto key = std::pair{e.user, e.workspace};
    if (e.op == VcsOp::amend) {
      auto it = head.find(key);
      if (it != head.end() && it->second != e.commit_id) lineage.emplace(e.commit_id, it->second);
    }
    head[key] = e.commit_id;
  }
  return lineage;
}

/// 1-left-shift: each ide session piece ending in (t_prev, t_cur] belongs to the
/// creation event at t_cur of the same user and workspace. Sessions straddling a
/// commit are cut there; pieces after the last event stay unattributed.
inline CommitAttribution match_commits_to_sessions(const SessionSet& sessions,
                                                   const std::vector<VcsEvent>& creation_events) {
  using Scope = std::pair<std::string, std::string>;
  std::map<Scope, std::vector<const VcsEvent*>> events_by_scope;
  for (const auto& e : creation_events)
    if (e.creates_commit()) events_by_scope[{e.user, e.workspace}].push_back(&e);
  for (auto& [_, evs] : events_by_scope)
    std::stable_sort(evs.begin(), evs.end(),
                     [](const VcsEvent* a, const VcsEvent* b) { return a->ts < b->ts; });

  CommitAttribution attr;
  for (std::size_t idx = 0; idx < sessions.sessions.size(); ++idx) {
    const Session& s = sessions.sessions[idx];
    if (s.tool_class != ToolClass::ide) continue;
    auto make = [&](Millis a, Millis b) {
      return AttributedSlice{idx, s.user, s.tool, s.workspace, {a, b}};
    };
    auto scope = events_by_scope.find({s.user, s.workspace});
    if (scope == events_by_scope.end()) {
      attr.unattributed.push_back(make(s.start, s.end));
      continue;
    }
    const auto& evs = scope->second;
    auto first_at_or_after = [&](Millis t) {
      return std::lower_bound(evs.begin(), evs.end(), t,
                              [](const VcsEvent* e, Millis v) { return e->ts < v; });
    };
    Millis piece_start = s.start;
    while (piece_start < s.end) {
      // The first event strictly after piece_start closes the piece, unless the
      // session ends first.
      auto it = std::upper_bound(evs.begin(), evs.end(), piece_start,
                                 [](Millis v, const VcsEvent* e) { return v < e->ts; });
      Millis piece_end = (it != evs.end() && (*it)->ts < s.end) ? (*it)->ts : s.end;
      auto owner = first_at_or_after(piece_end);
      if (owner == evs.end()) attr.unattributed.push_back(make(piece_start, piece_end));
      else attr.by_commit[(*owner)->commit_id].push_back(make(piece_start, piece_end));
      piece_start = piece_end;
    }
  }
  return attr;
}

namespace detail {

inline const DiffMeta* resolve_diff(const std::string& commit,
                                    const std::map<std::string, const DiffMeta*>& owner,
                                    const std::map<std::string, std::string>& lineage) {
  std::set<std::string> seen;
  std::string cur = commit;
  while (seen.insert(cur).second) {
    if (auto it = owner.find(cur); it != owner.end()) return it->second;
    auto up = lineage.find(cur);
    if (up == lineage.end()) break;
    cur = up->second;
  }
  return nullptr;
}

inline bool contribution_less(const Contribution& a, const Contribution& b) {
  return std::tie(a.span.start, a.span.end, a.user) < std::tie(b.span.start, b.span.end, b.user);
}

}  // namespace detail

/// Groups commit attributions into per-diff DAT and adds reviewer time.
///
/// Commits outside every diff are dropped; amends follow their lineage to the
/// diff of the commit they rewrote. Review intervals are made exclusive per
/// reviewer and clipped to exclude that reviewer's sessions in non-review tools.
inline Assembly assemble_diff_dat(const CommitAttribution& attr, const std::vector<DiffMeta>& diffs,
                                  const std::vector<ReviewEvent>& reviews,
                                  const SessionSet& sessions) {
  Assembly out;
  std::map<std::string, const DiffMeta*> owner;
  std::map<std::string, std::size_t> slot;
  std::vector<const DiffMeta*> ordered;
  for (const auto& d : diffs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const DiffMeta* a, const DiffMeta* b) { return a->diff_id < b->diff_id; });
  for (const DiffMeta* d : ordered) {
    slot.emplace(d->diff_id, out.dats.size());
    DiffDat dat;
    dat.diff_id = d->diff_id;
    dat.author = d->author;
    out.dats.push_back(std::move(dat));
    for (const auto& c : d->commit_ids) owner.emplace(c, d);
  }

  for (const auto& [commit, slices] : attr.by_commit) {
    const DiffMeta* d = detail::resolve_diff(commit, owner, attr.amended_from);
    if (!d) {
      for (const auto& s : slices) out.non_diff_commit_time[s.user] += s.span.length();
      continue;
    }
    DiffDat& dat = out.dats[slot.at(d->diff_id)];
    for (const auto& s : slices) {
      if (s.user == dat.author) dat.author_precise += s.span.length();
      else dat.contributor_precise[s.user] += s.span.length();
      dat.intervals.push_back({s.user, s.tool, s.workspace, s.span, Source::precise, commit});
    }
  }

  std::map<std::string, std::vector<detail::FocusCandidate>> review_by_user;
  for (const auto& r : reviews) {
    auto it = slot.find(r.diff_id);
    if (it == slot.end()) {
      out.notes.push_back("review by " + r.user + " references unknown diff " + r.diff_id);
      continue;
    }
    if (out.dats[it->second].author == r.user) continue;
    review_by_user[r.user].push_back({r.start, r.end, r.diff_id, "", ToolClass::review});
  }
  for (auto& [user, cands] : review_by_user) {
    std::vector<Interval> busy;
    for (const auto& s : sessions.sessions)
      if (s.user == user && s.tool_class != ToolClass::review) busy.push_back(s.span());
    busy = normalize(std::move(busy));
    for (const auto& piece : detail::focus_sweep(user, cands)) {
      for (const auto& kept : subtract({piece.span()}, busy)) {
        DiffDat& dat = out.dats[slot.at(piece.tool)];
        dat.reviewer_precise[user] += kept.length();
        dat.intervals.push_back({user, "review", "", kept, Source::review, ""});
      }
    }
  }

  for (auto& dat : out.dats)
    std::stable_sort(dat.intervals.begin(), dat.intervals.end(), detail::contribution_less);
  return out;
}

}  // namespace dat
