#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dat/types.hpp"

namespace dat {

struct Session {
  std::string user;
  std::string tool;
  std::string workspace{kDefaultWorkspace};
  Millis start = 0;
  Millis end = 0;
  ToolClass tool_class = ToolClass::non_coding;

  Interval span() const { return {start, end}; }
  Millis duration() const { return end - start; }
  friend bool operator==(const Session&, const Session&) = default;
};

/// Sessions sorted by (user, start); per user they never overlap.
struct SessionSet {
  std::vector<Session> sessions;

  friend bool operator==(const SessionSet&, const SessionSet&) = default;

  std::vector<std::size_t> indices_of(const std::string& user) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sessions.size(); ++i)
      if (sessions[i].user == user) out.push_back(i);
    return out;
  }
};

struct SessionConfig {
  Millis merge_gap = 30 * kSecond;
  Millis idle_threshold = 300 * kSecond;

  void validate() const {
    if (merge_gap <= 0 || idle_threshold <= 0)
      throw Error("session config: merge_gap and idle_threshold must be positive");
    if (merge_gap >= idle_threshold)
      throw Error("session config: merge_gap must be below idle_threshold");
  }
};

namespace detail {

struct FocusCandidate {
  Millis start;
  Millis end;
  std::string tool;
  std::string workspace;
  ToolClass cls;
};

// Later start holds focus; on equal starts the shorter interval does, so the
// longer one resumes afterwards. Remaining ties break on names, which keeps the
// result independent of input order.
struct FocusPriority {
  bool operator()(const FocusCandidate* a, const FocusCandidate* b) const {
    return std::tie(b->start, a->end, b->tool, b->workspace) <
           std::tie(a->start, b->end, a->tool, a->workspace);
  }
};

inline std::vector<Session> focus_sweep(const std::string& user,
                                        std::vector<FocusCandidate>& cands) {
  struct Edge {
    Millis at;
    bool opening;
    const FocusCandidate* c;
  };
  std::vector<Edge> edges;
  edges.reserve(cands.size() * 2);
  for (const auto& c : cands) {
    edges.push_back({c.start, true, &c});
    edges.push_back({c.end, false, &c});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.at, a.opening) < std::tie(b.at, b.opening);
  });

  std::multiset<const FocusCandidate*, FocusPriority> active;
  std::vector<Session> out;
  Millis cursor = 0;
  for (std::size_t i = 0; i < edges.size();) {
    const Millis at = edges[i].at;
    if (!active.empty() && at > cursor) {
      const FocusCandidate* top = *active.begin();
      if (!out.empty() && out.back().end == cursor && out.back().tool == top->tool &&
          out.back().workspace == top->workspace) {
        out.back().end = at;
      } else {
        out.push_back({user, top->tool, top->workspace, cursor, at, top->cls});
      }
    }
    for (; i < edges.size() && edges[i].at == at; ++i) {
      if (edges[i].opening) {
        active.insert(edges[i].c);
      } else {
        auto range = active.equal_range(edges[i].c);
        for (auto it = range.first; it != range.second; ++it) {
          if (*it == edges[i].c) {
            active.erase(it);
            break;
          }
        }
      }
    }
    cursor = at;
  }
  return out;
}

inline void close_gaps(std::vector<Session>& seq, Millis merge_gap) {
  std::vector<Session> out;
  for (auto& s : seq) {
    if (!out.empty()) {
      auto& prev = out.back();
      if (prev.tool == s.tool && prev.workspace == s.workspace && s.start - prev.end <= merge_gap) {
        prev.end = std::max(prev.end, s.end);
        continue;
      }
    }
    out.push_back(std::move(s));
  }
  seq = std::move(out);
}

}  // namespace detail

/// Builds per-user sessions from a flat list of activity intervals.
///
/// Cross-tool overlaps resolve to the most recently started interval (a focus
/// switch); when that interval ends, focus returns to whatever is still open.
/// Afterwards, consecutive sessions of the same tool and workspace separated by
/// at most merge_gap are joined. Since merge_gap < idle_threshold, any gap over
/// the idle threshold always separates sessions.
inline SessionSet build_sessions(const std::vector<ActivityEvent>& activities,
                                 const ToolCatalog& catalog, const SessionConfig& cfg = {}) {
  cfg.validate();
  std::map<std::string, std::vector<detail::FocusCandidate>> by_user;
  for (const auto& a : activities)
    by_user[a.user].push_back({a.start, a.end, a.tool, a.workspace, catalog.classify(a.tool)});

  SessionSet set;
  for (auto& [user, cands] : by_user) {
    auto seq = detail::focus_sweep(user, cands);
    detail::close_gaps(seq, cfg.merge_gap);
    for (auto& s : seq) set.sessions.push_back(std::move(s));
  }
  return set;
}

inline SessionSet build_sessions(const EventLog& log, const SessionConfig& cfg = {}) {
  return build_sessions(log.activities, log.catalog, cfg);
}

/// Re-expresses sessions as activity events, e.g. to re-sessionize output.
inline std::vector<ActivityEvent> as_activities(const SessionSet& set) {
  std::vector<ActivityEvent> out;
  for (const auto& s : set.sessions) out.push_back({s.user, s.tool, s.workspace, s.start, s.end});
  return out;
}

}  // namespace dat
