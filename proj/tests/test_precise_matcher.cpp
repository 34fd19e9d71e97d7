#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace dat;
using testing_util::fig2;

namespace {

VcsEvent ev(VcsOp op, std::string commit, Millis ts, bool automatic = false) {
  return {"alice", "www", op, std::move(commit), ts, automatic};
}

std::vector<Interval> spans(const std::vector<AttributedSlice>& v) {
  std::vector<Interval> out;
  for (const auto& s : v) out.push_back(s.span);
  return out;
}

}  // namespace

TEST(FilterVcs, AutoCheckoutDropped) {
  EXPECT_TRUE(filter_vcs_events({ev(VcsOp::checkout, "CH0", 0, true)}).empty());
}

TEST(FilterVcs, ManualCheckoutDropped) {
  auto out = filter_vcs_events({ev(VcsOp::checkout, "CH7", 0), ev(VcsOp::commit, "CH8", 10)});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].commit_id, "CH8");
}

TEST(FilterVcs, AmendIsACreationEvent) {
  auto out = filter_vcs_events({ev(VcsOp::commit, "CH1", 0), ev(VcsOp::amend, "CH1'", 10)});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[1].op, VcsOp::amend);
}

TEST(Matcher, Fig2Attribution) {
  auto log = testing_util::load("fig2.jsonl");
  auto r = compute_dat(log);
  const auto& by = r.attribution.by_commit;
  ASSERT_EQ(by.size(), 3u);
  EXPECT_EQ(spans(by.at("CH1")), (std::vector<Interval>{{fig2(60), fig2(1260)}}));
  EXPECT_EQ(spans(by.at("CH2")),
            (std::vector<Interval>{{fig2(1320), fig2(2220)}, {fig2(2820), fig2(3420)}}));
  EXPECT_EQ(spans(by.at("CH8")),
            (std::vector<Interval>{{fig2(3480), fig2(4080)}, {fig2(4140), fig2(5340)}}));
  EXPECT_FALSE(by.count("CH0"));
  EXPECT_FALSE(by.count("CH7"));
  EXPECT_EQ(spans(r.attribution.unattributed), (std::vector<Interval>{{fig2(5400), fig2(6000)}}));

  // s3 (chrome) is in no commit.
  for (const auto& [c, slices] : by)
    for (const auto& s : slices) EXPECT_NE(s.tool, "chrome");

  // Hand-summed session lengths.
  ASSERT_NE(r.find("D123"), nullptr);
  EXPECT_EQ(r.find("D123")->author_precise, (1200 + 900 + 600) * kSecond);
  EXPECT_EQ(r.find("D987")->author_precise, (600 + 1200) * kSecond);
  EXPECT_EQ(r.find("D123")->anchor_dat(), r.find("D123")->author_precise);
}

TEST(Matcher, SessionStraddlingCommitIsSplit) {
  SessionSet s;
  s.sessions.push_back({"alice", "vscode", "www", 0, 100, ToolClass::ide});
  auto attr = match_commits_to_sessions(s, {ev(VcsOp::commit, "A", 40), ev(VcsOp::commit, "B", 100)});
  EXPECT_EQ(spans(attr.by_commit.at("A")), (std::vector<Interval>{{0, 40}}));
  EXPECT_EQ(spans(attr.by_commit.at("B")), (std::vector<Interval>{{40, 100}}));
  EXPECT_TRUE(attr.unattributed.empty());
}

TEST(Matcher, OtherWorkspaceDoesNotClaim) {
  SessionSet s;
  s.sessions.push_back({"alice", "vscode", "other", 0, 100, ToolClass::ide});
  auto attr = match_commits_to_sessions(s, {ev(VcsOp::commit, "A", 200)});
  EXPECT_TRUE(attr.by_commit.empty());
  EXPECT_EQ(attr.unattributed.size(), 1u);
}

TEST(Matcher, MatchesPerSecondOracle) {
  std::mt19937_64 rng(5);
  ToolCatalog cat;
  cat.add("vscode", ToolClass::ide);
  cat.add("idea", ToolClass::ide);
  cat.add("chrome", ToolClass::non_coding);
  const std::vector<std::string> tools{"vscode", "idea", "chrome"};
  for (int round = 0; round < 200; ++round) {
    std::vector<ActivityEvent> acts;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 10); i < n; ++i) {
      Millis a = static_cast<Millis>(rng() % 1500) * kSecond;
      acts.push_back({rng() % 3 == 0 ? "bob" : "alice", tools[rng() % 3], rng() % 2 ? "w1" : "w2", a,
                      a + static_cast<Millis>(1 + rng() % 200) * kSecond});
    }
    std::vector<VcsEvent> vcs;
    std::vector<oracle::Creation> ref;
    std::set<Millis> used;
    for (int i = 0, n = static_cast<int>(rng() % 6); i < n; ++i) {
      Millis ts = static_cast<Millis>(rng() % 1800) * kSecond;
      if (!used.insert(ts).second) continue;
      std::string user = rng() % 3 == 0 ? "bob" : "alice", ws = rng() % 2 ? "w1" : "w2";
      std::string id = "c" + std::to_string(i);
      vcs.push_back({user, ws, rng() % 4 == 0 ? VcsOp::checkout : VcsOp::commit, id, ts, false});
      if (vcs.back().op != VcsOp::checkout) ref.push_back({user, ws, id, ts});
    }
    auto sessions = build_sessions(acts, cat, SessionConfig{10 * kSecond, 300 * kSecond});
    std::vector<oracle::Seg> ide;
    for (const auto& s : sessions.sessions)
      if (s.tool_class == ToolClass::ide) ide.push_back({s.user, s.tool, s.workspace, s.start, s.end});

    auto attr = match_commits_to_sessions(sessions, filter_vcs_events(vcs));
    auto want = oracle::attribute_by_second(ide, ref);
    std::map<std::string, Millis> got;
    for (const auto& [c, slices] : attr.by_commit)
      for (const auto& s : slices) got[c] += s.span.length();
    Millis un = 0;
    for (const auto& s : attr.unattributed) un += s.span.length();
    EXPECT_EQ(got, want.by_commit) << "round " << round;
    EXPECT_EQ(un, want.unattributed) << "round " << round;

    // Every ide millisecond lands in exactly one slice.
    Millis ide_total = 0;
    for (const auto& s : ide) ide_total += s.end - s.start;
    Millis sliced = un;
    for (const auto& [c, t] : got) sliced += t;
    EXPECT_EQ(sliced, ide_total);
  }
}

TEST(Assembly, CommitsSumIntoTheirDiff) {
  SessionSet s;
  s.sessions.push_back({"alice", "vscode", "www", 0, 600 * kSecond, ToolClass::ide});
  s.sessions.push_back({"alice", "vscode", "www", 700 * kSecond, 1600 * kSecond, ToolClass::ide});
  s.sessions.push_back({"alice", "vscode", "www", 1700 * kSecond, 2000 * kSecond, ToolClass::ide});
  auto attr = match_commits_to_sessions(s, {ev(VcsOp::commit, "CH1", 600 * kSecond),
                                            ev(VcsOp::commit, "CH2", 1600 * kSecond),
                                            ev(VcsOp::commit, "CH9", 2000 * kSecond)});
  std::vector<DiffMeta> diffs{{"D123", "alice", {"CH1", "CH2"}, 2, 10, false, {}, {}}};
  auto a = assemble_diff_dat(attr, diffs, {}, s);
  ASSERT_EQ(a.dats.size(), 1u);
  EXPECT_EQ(a.dats[0].author_precise, 1500 * kSecond);
  // CH9 belongs to no diff: it shows up nowhere but the per-user leftover.
  EXPECT_EQ(a.non_diff_commit_time.at("alice"), 300 * kSecond);
  for (const auto& c : a.dats[0].intervals) EXPECT_NE(c.commit_id, "CH9");
}

TEST(Assembly, ReviewMapsToReviewer) {
  std::vector<DiffMeta> diffs{{"D123", "alice", {"CH1"}, 1, 10, false, {}, {}}};
  std::vector<ReviewEvent> reviews{{"u2", "D123", 0, 3600 * kSecond}};
  auto a = assemble_diff_dat({}, diffs, reviews, {});
  EXPECT_EQ(a.dats[0].reviewer_precise.at("u2"), 3600 * kSecond);
  EXPECT_EQ(a.dats[0].author_precise, 0);
  ASSERT_EQ(a.dats[0].intervals.size(), 1u);
  EXPECT_EQ(a.dats[0].intervals[0].source, Source::review);
}

TEST(Assembly, OverlappingReviewsStayExclusive) {
  std::vector<DiffMeta> diffs{{"D1", "alice", {"c1"}, 1, 1, false, {}, {}},
                              {"D2", "alice", {"c2"}, 1, 1, false, {}, {}}};
  std::vector<ReviewEvent> reviews{{"u2", "D1", 0, 100}, {"u2", "D2", 50, 150}, {"u3", "D1", 0, 10}};
  SessionSet s;
  s.sessions.push_back({"u2", "vscode", "w", 140, 150, ToolClass::ide});
  auto a = assemble_diff_dat({}, diffs, reviews, s);
  EXPECT_EQ(a.dats[0].reviewer_precise.at("u2"), 50);
  EXPECT_EQ(a.dats[1].reviewer_precise.at("u2"), 90);
  EXPECT_EQ(a.dats[0].reviewer_precise.at("u3"), 10);
}

TEST(Assembly, UnknownReviewTargetIsNoted) {
  auto a = assemble_diff_dat({}, {}, {{"u2", "D404", 0, 10}}, {});
  EXPECT_TRUE(a.dats.empty());
  ASSERT_EQ(a.notes.size(), 1u);
  EXPECT_NE(a.notes[0].find("D404"), std::string::npos);
}

TEST(Assembly, AmendFollowsCheckedOutCommit) {
  // c1 is committed, the user amends it into c1b; only c1b is listed in no diff.
  std::vector<VcsEvent> vcs{ev(VcsOp::commit, "c1", 100), ev(VcsOp::checkout, "c1", 150),
                            ev(VcsOp::amend, "c1b", 300)};
  SessionSet s;
  s.sessions.push_back({"alice", "vscode", "www", 0, 100, ToolClass::ide});
  s.sessions.push_back({"alice", "vscode", "www", 200, 300, ToolClass::ide});
  auto attr = match_commits_to_sessions(s, filter_vcs_events(vcs));
  attr.amended_from = amend_lineage(vcs);
  EXPECT_EQ(attr.amended_from.at("c1b"), "c1");
  std::vector<DiffMeta> diffs{{"D1", "alice", {"c1"}, 1, 1, false, {}, {}}};
  auto a = assemble_diff_dat(attr, diffs, {}, s);
  EXPECT_EQ(a.dats[0].author_precise, 200);
}

TEST(Assembly, OtherUsersCommitsCountAsContributors) {
  SessionSet s;
  s.sessions.push_back({"alice", "vscode", "www", 0, 100, ToolClass::ide});
  s.sessions.push_back({"bob", "vscode", "www", 0, 40, ToolClass::ide});
  auto attr = match_commits_to_sessions(
      s, {ev(VcsOp::commit, "c1", 100), VcsEvent{"bob", "www", VcsOp::commit, "c2", 40, false}});
  std::vector<DiffMeta> diffs{{"D1", "alice", {"c1", "c2"}, 1, 1, false, {}, {}}};
  auto a = assemble_diff_dat(attr, diffs, {}, s);
  EXPECT_EQ(a.dats[0].author_precise, 100);
  EXPECT_EQ(a.dats[0].contributor_precise.at("bob"), 40);
}
