#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace dat;

namespace {

SimConfig small(std::uint64_t seed) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_developers = 3;
  cfg.n_diffs_per_dev = 8;
  return cfg;
}

}  // namespace

TEST(Simulator, SameSeedSameBytes) {
  auto a = generate_workload(small(42)), b = generate_workload(small(42));
  EXPECT_EQ(serialize_event_log(a.log), serialize_event_log(b.log));
  EXPECT_EQ(serialize_ground_truth(a.truth, {}), serialize_ground_truth(b.truth, {}));
  EXPECT_NE(serialize_event_log(generate_workload(small(43)).log), serialize_event_log(a.log));
}

TEST(Simulator, InfeasibleConfigs) {
  auto cfg = small(1);
  cfg.n_diffs_per_dev = 1;
  cfg.interleave_probability = 0.3;
  EXPECT_THROW(generate_workload(cfg), Error);
  cfg.interleave_probability = 0.0;
  EXPECT_NO_THROW(generate_workload(cfg));
  cfg.untracked_tool_fraction = 1.5;
  EXPECT_THROW(generate_workload(cfg), Error);
}

TEST(Simulator, EmittedLogIsValidAndParsesBack) {
  auto w = generate_workload(small(7));
  EXPECT_TRUE(validate_event_log(w.log).ok());
  auto again = parse_event_log(serialize_event_log(w.log));
  EXPECT_EQ(serialize_event_log(again), serialize_event_log(w.log));
  EXPECT_EQ(w.log.diffs.size(), 24u);
  EXPECT_EQ(w.truth.diffs.size(), 24u);
}

TEST(Simulator, TruthIsConsistent) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    auto w = generate_workload(small(seed));
    std::map<std::string, std::vector<Interval>> by_user;
    for (const auto& g : w.truth.diffs) {
      Millis sum = 0;
      for (const auto& i : g.intervals) sum += i.length();
      EXPECT_EQ(sum, g.true_duration);
      by_user[g.author].insert(by_user[g.author].end(), g.intervals.begin(), g.intervals.end());
    }
    // Labels never overlap within a user.
    for (auto& [u, v] : by_user) {
      std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(v[i - 1].end, v[i].start) << u;
    }
  }
}

TEST(Simulator, NoUntrackedMeansAllIde) {
  auto cfg = small(8);
  cfg.untracked_tool_fraction = 0.0;
  auto w = generate_workload(cfg);
  auto sessions = build_sessions(w.log);
  for (const auto& g : w.truth.diffs)
    for (const auto& i : g.intervals) {
      bool inside_ide = false;
      for (const auto& s : sessions.sessions)
        if (s.user == g.author && s.tool_class == ToolClass::ide && s.start <= i.start && i.end <= s.end)
          inside_ide = true;
      EXPECT_TRUE(inside_ide) << g.diff_id;
    }
}

TEST(Simulator, EffectInjectionLowersTestMeans) {
  SimConfig cfg;
  cfg.seed = 12;
  cfg.n_developers = 20;
  cfg.n_diffs_per_dev = 50;
  cfg.effect.test_fraction = 0.5;
  cfg.effect.factor = 0.86;
  auto w = generate_workload(cfg);
  double c = 0, t = 0;
  std::size_t nc = 0, nt = 0;
  for (const auto& g : w.truth.diffs) {
    ASSERT_TRUE(g.group.has_value());
    if (*g.group == Group::test) t += static_cast<double>(g.true_duration), ++nt;
    else c += static_cast<double>(g.true_duration), ++nc;
  }
  EXPECT_EQ(nt, 500u);
  EXPECT_EQ(nc, 500u);
  EXPECT_NEAR(1.0 - (t / nt) / (c / nc), 0.14, 0.04);
}

TEST(Simulator, LocTracksTrueDuration) {
  SimConfig cfg = small(3);
  cfg.n_developers = 8;
  auto w = generate_workload(cfg);
  std::map<std::string, std::int64_t> loc;
  for (const auto& d : w.log.diffs) loc[d.diff_id] = d.loc;
  std::vector<double> x, y;
  for (const auto& g : w.truth.diffs) x.push_back(g.true_duration), y.push_back(loc[g.diff_id]);
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx), syy += (y[i] - my) * (y[i] - my);
  EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.5);
}

TEST(Simulator, NoiseFreePreciseEqualsTruth) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = small(seed);
    cfg.untracked_tool_fraction = 0.0;
    auto w = generate_workload(cfg);
    auto r = compute_dat(w.log);
    for (const auto& g : w.truth.diffs) EXPECT_EQ(r.find(g.diff_id)->author_precise, g.true_duration) << g.diff_id;
  }
}

TEST(Simulator, UntrackedShareWidensPreciseShortfall) {
  double last_ratio = 2.0;
  for (double f : {0.0, 0.1, 0.2, 0.4}) {
    SimConfig cfg = small(5);
    cfg.n_developers = 6;
    cfg.untracked_tool_fraction = f;
    auto w = generate_workload(cfg);
    auto r = compute_dat(w.log);
    double precise = 0, anchor = 0, truth = 0;
    for (const auto& g : w.truth.diffs) {
      precise += r.find(g.diff_id)->author_precise;
      anchor += r.find(g.diff_id)->anchor_dat();
      truth += g.true_duration;
    }
    EXPECT_LT(precise / truth, last_ratio) << f;
    EXPECT_GE(anchor, precise);
    if (f > 0) EXPECT_GT(anchor / truth, precise / truth + 0.5 * f) << f;
    last_ratio = precise / truth;
  }
}

TEST(Accuracy, PerfectAndBoundary) {
  GroundTruth gt;
  gt.diffs.push_back({"D1", "a", 1000, {}, {}, {}, 1});
  gt.diffs.push_back({"D2", "a", 2000, {}, {}, {}, 1});
  gt.diffs.push_back({"D3", "a", 0, {}, {}, {}, 1});
  std::vector<DiffDat> dats(3);
  dats[0].diff_id = "D1", dats[0].author_precise = 1000;
  dats[1].diff_id = "D2", dats[1].author_precise = 2000;
  dats[2].diff_id = "D3";
  auto r = score_accuracy(dats, gt);
  EXPECT_EQ(r.mean_relative_error, 0.0);
  EXPECT_EQ(r.within_5pct, 1.0);
  EXPECT_EQ(r.n_zero_truth, 1u);
  EXPECT_EQ(r.n_scored, 2u);

  dats[1].author_precise = 2100;  // exactly 5% high
  r = score_accuracy(dats, gt);
  EXPECT_EQ(r.n_within_5pct, 2u);
  dats[1].author_precise = 2101;
  r = score_accuracy(dats, gt);
  EXPECT_EQ(r.n_within_5pct, 1u);
  EXPECT_EQ(r.worst.front().diff_id, "D2");

  dats.pop_back();
  EXPECT_THROW(score_accuracy(dats, gt), Error);
}
