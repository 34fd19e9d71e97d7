#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace dat;
using testing_util::fig2;

namespace {

EventLog one_commit_log(const std::string& pre_tool, ToolClass pre_class, Millis pre_start, Millis pre_end) {
  EventLog log;
  log.catalog.add("vscode", ToolClass::ide);
  log.catalog.add(pre_tool, pre_class);
  log.activities.push_back({"alice", pre_tool, "www", pre_start, pre_end});
  log.activities.push_back({"alice", "vscode", "www", 10 * kHour, 11 * kHour});
  log.vcs_events.push_back({"alice", "www", VcsOp::commit, "CH1", 11 * kHour, false});
  log.diffs.push_back({"D123", "alice", {"CH1"}, 1, 10, false, {}, {}});
  return log;
}

}  // namespace

TEST(Anchor, TerminalBeforeFirstMatchJoins) {
  auto r = compute_dat(testing_util::load("anchor.jsonl"));
  const DiffDat* d = r.find("D123");
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->author_precise, (1200 + 600) * kSecond);
  EXPECT_EQ(d->anchor_extra, 300 * kSecond);
  EXPECT_EQ(d->anchor_dat(), 2100 * kSecond);
  ASSERT_EQ(d->intervals.front().source, Source::anchor);
  EXPECT_EQ(d->intervals.front().span, (Interval{fig2(0), fig2(300)}));
  EXPECT_EQ(d->intervals.front().commit_id, "CH1");
  // The chrome session ahead of CH2's work stops that chain.
  for (const auto& c : d->intervals) EXPECT_NE(c.tool, "chrome");
}

TEST(Anchor, NonCodingNeverJoins) {
  auto r = compute_dat(one_commit_log("chrome", ToolClass::non_coding, 10 * kHour - 10 * kMinute, 10 * kHour));
  EXPECT_EQ(r.find("D123")->anchor_extra, 0);
}

TEST(Anchor, GapRule) {
  // Backward scan oracle: joins exactly when the gap is within max_gap.
  for (Millis gap_min : {0, 5, 29, 30, 31, 180}) {
    const Millis end = 10 * kHour - gap_min * kMinute;
    auto r = compute_dat(one_commit_log("terminal", ToolClass::coding_related, end - 10 * kMinute, end));
    const bool joins = gap_min * kMinute <= AnchorConfig{}.max_gap;
    EXPECT_EQ(r.find("D123")->anchor_extra, joins ? 10 * kMinute : 0) << gap_min << " min";
  }
}

TEST(Anchor, TotalCapStopsTheChain) {
  EventLog log;
  log.catalog.add("vscode", ToolClass::ide);
  log.catalog.add("terminal", ToolClass::coding_related);
  log.catalog.add("shell", ToolClass::coding_related);
  // Alternating tools keep three separate 50 min sessions back to back.
  log.activities.push_back({"alice", "terminal", "www", 0, 50 * kMinute});
  log.activities.push_back({"alice", "shell", "www", 50 * kMinute, 100 * kMinute});
  log.activities.push_back({"alice", "terminal", "www", 100 * kMinute, 150 * kMinute});
  log.activities.push_back({"alice", "vscode", "www", 150 * kMinute, 160 * kMinute});
  log.vcs_events.push_back({"alice", "www", VcsOp::commit, "CH1", 160 * kMinute, false});
  log.diffs.push_back({"D1", "alice", {"CH1"}, 1, 10, false, {}, {}});
  auto r = compute_dat(log);
  EXPECT_EQ(r.find("D1")->anchor_extra, 100 * kMinute);

  PipelineConfig wide;
  wide.anchor.max_total = 3 * kHour;
  EXPECT_EQ(compute_dat(log, wide).find("D1")->anchor_extra, 150 * kMinute);
}

TEST(Anchor, SessionBetweenMatchesGoesToTheNext) {
  // terminal sits between the precise work of D1 and D2.
  EventLog log;
  log.catalog.add("vscode", ToolClass::ide);
  log.catalog.add("terminal", ToolClass::coding_related);
  log.activities.push_back({"alice", "vscode", "www", 0, 10 * kMinute});
  log.activities.push_back({"alice", "terminal", "www", 11 * kMinute, 20 * kMinute});
  log.activities.push_back({"alice", "vscode", "www", 21 * kMinute, 30 * kMinute});
  log.vcs_events.push_back({"alice", "www", VcsOp::commit, "c1", 10 * kMinute, false});
  log.vcs_events.push_back({"alice", "www", VcsOp::commit, "c2", 30 * kMinute, false});
  log.diffs.push_back({"D1", "alice", {"c1"}, 1, 1, false, {}, {}});
  log.diffs.push_back({"D2", "alice", {"c2"}, 1, 1, false, {}, {}});
  auto r = compute_dat(log);
  EXPECT_EQ(r.find("D1")->anchor_extra, 0);
  EXPECT_EQ(r.find("D2")->anchor_extra, 9 * kMinute);
}

TEST(Anchor, AttributedOrSplitSessionsAreNotReused) {
  // The ide session straddles c1; its right half starts c2's precise time, so
  // c2 has no anchor point at a session start.
  EventLog log;
  log.catalog.add("vscode", ToolClass::ide);
  log.catalog.add("terminal", ToolClass::coding_related);
  log.activities.push_back({"alice", "terminal", "www", 0, 5 * kMinute});
  log.activities.push_back({"alice", "vscode", "www", 6 * kMinute, 30 * kMinute});
  log.vcs_events.push_back({"alice", "www", VcsOp::commit, "c1", 10 * kMinute, false});
  log.vcs_events.push_back({"alice", "www", VcsOp::commit, "c2", 30 * kMinute, false});
  log.diffs.push_back({"D1", "alice", {"c1"}, 1, 1, false, {}, {}});
  log.diffs.push_back({"D2", "alice", {"c2"}, 1, 1, false, {}, {}});
  auto r = compute_dat(log);
  EXPECT_EQ(r.find("D1")->anchor_extra, 5 * kMinute);
  EXPECT_EQ(r.find("D2")->anchor_extra, 0);
}

TEST(Anchor, NeverBelowPrecise) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    SimConfig cfg;
    cfg.seed = rng();
    cfg.n_developers = 2;
    cfg.n_diffs_per_dev = 5;
    cfg.untracked_tool_fraction = 0.3;
    auto w = generate_workload(cfg);
    for (const auto& d : compute_dat(w.log).dats) {
      EXPECT_GE(d.anchor_dat(), d.author_precise);
      EXPECT_LE(d.anchor_extra, AnchorConfig{}.max_total);
    }
  }
}
