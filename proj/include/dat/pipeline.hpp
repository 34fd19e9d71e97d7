#pragma once

#include <map>
#include <string>
#include <vector>

#include "dat/anchor.hpp"
#include "dat/precise_matcher.hpp"
#include "dat/sessionizer.hpp"
#include "dat/types.hpp"

namespace dat {

struct PipelineConfig {
  SessionConfig session;
  AnchorConfig anchor;
};

struct PipelineResult {
  SessionSet sessions;
  CommitAttribution attribution;
  std::vector<DiffDat> dats;  // with anchors applied
  std::map<std::string, Millis> non_diff_commit_time;
  std::vector<std::string> notes;

  const DiffDat* find(const std::string& diff_id) const {
    for (const auto& d : dats)
      if (d.diff_id == diff_id) return &d;
    return nullptr;
  }
};

/// Sessions -> checkout filtering -> commit matching -> diff assembly -> anchors.
inline PipelineResult compute_dat(const EventLog& log, const PipelineConfig& cfg = {}) {
  PipelineResult r;
  r.sessions = build_sessions(log, cfg.session);
  r.attribution = match_commits_to_sessions(r.sessions, filter_vcs_events(log.vcs_events));
  r.attribution.amended_from = amend_lineage(log.vcs_events);
  Assembly a = assemble_diff_dat(r.attribution, log.diffs, log.reviews, r.sessions);
  r.dats = extend_with_anchors(std::move(a.dats), r.sessions, cfg.anchor);
  r.non_diff_commit_time = std::move(a.non_diff_commit_time);
  r.notes = std::move(a.notes);
  return r;
}

}  // namespace dat
