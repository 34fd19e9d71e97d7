#include <gtest/gtest.h>

#include <random>

#include "dat/experiment.hpp"
#include "oracles.hpp"

using namespace dat;

namespace {

DiffSample sample(std::string id, std::vector<PlatformApp> targets, std::int64_t loc, double hours,
                  bool shared = false) {
  DiffMeta d{std::move(id), "alice", {"c"}, 1, loc, shared, std::move(targets), {}};
  return {d, hours * kHour};
}

// Baselines for tercile 2: android/app1 = 4 h, ios/app1 = 6 h.
std::vector<DiffSample> hand_unshared() {
  return {sample("A1", {{"android", "app1"}}, 10, 1), sample("A2", {{"android", "app1"}}, 20, 4),
          sample("A3", {{"android", "app1"}}, 30, 9), sample("I1", {{"ios", "app1"}}, 10, 2),
          sample("I2", {{"ios", "app1"}}, 20, 6),     sample("I3", {{"ios", "app1"}}, 30, 12)};
}

}  // namespace

TEST(Groups, Assignment) {
  std::set<std::string> migrated{"m1", "m2"}, relevant{"m1", "m2", "u1", "u2"};
  auto g = assign_groups({{"D1", {"m1"}}, {"D2", {"u1"}}, {"D3", {"m1", "u1"}}, {"D4", {"other"}},
                          {"D5", {"m2", "other"}}},
                         migrated, relevant);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0].group, Group::control);
  EXPECT_EQ(g[1].group, Group::test);
  EXPECT_EQ(g[2].group, Group::mixed);
  EXPECT_EQ(g[3].diff_id, "D5");
  EXPECT_EQ(g[3].group, Group::control);
}

TEST(Stratified, MixedDiffsAreDiscarded) {
  std::vector<Observation> obs{{"a", Group::control, 1, 10}, {"b", Group::control, 1, 12},
                               {"c", Group::test, 1, 8},     {"d", Group::test, 1, 9},
                               {"e", Group::mixed, 1, 1000}};
  auto rows = stratified_test(obs, {1});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].stratum, "variable");
  EXPECT_EQ(rows[1].n_control + rows[1].n_test, 4u);
}

TEST(Stratified, EqualGroupsGiveUnitP) {
  std::vector<Observation> obs;
  for (std::int64_t files : {1, 2, 3, 4})
    for (double x : {3.0, 5.0, 9.0}) {
      obs.push_back({"c", Group::control, files, x * files});
      obs.push_back({"t", Group::test, files, x * files});
    }
  for (const auto& r : stratified_test(obs)) {
    ASSERT_TRUE(r.welch.has_value()) << r.stratum;
    EXPECT_EQ(r.welch->p, 1.0) << r.stratum;
    EXPECT_EQ(r.pct_saved, 0.0);
  }
}

TEST(Stratified, InjectedStratumEffectIsRecovered) {
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> x(std::log(3600.0), 0.3);
  std::vector<Observation> obs;
  for (int i = 0; i < 400; ++i) {
    obs.push_back({"c", Group::control, 1, x(rng)});
    obs.push_back({"t", Group::test, 1, 0.78 * x(rng)});
  }
  auto rows = stratified_test(obs, {1});
  EXPECT_NEAR(*rows[0].pct_saved, 0.22, 0.03);
  EXPECT_LT(rows[0].welch->p, 1e-6);
  EXPECT_FALSE(rows.size() > 2);
}

TEST(Stratified, LargeDiffsDiluteThePooledRow) {
  std::mt19937_64 rng(4);
  std::lognormal_distribution<double> x(0.0, 0.2);
  const std::map<std::int64_t, double> effect{{1, 0.78}, {2, 0.78}, {3, 0.81}, {4, 0.76}};
  std::vector<Observation> obs;
  for (std::int64_t files = 1; files <= 20; ++files) {
    const double f = files <= 4 ? effect.at(files) : 1.0;
    const int n = files <= 4 ? 200 : 40;
    for (int i = 0; i < n; ++i) {
      obs.push_back({"c", Group::control, files, 3600.0 * files * x(rng)});
      obs.push_back({"t", Group::test, files, f * 3600.0 * files * x(rng)});
    }
  }
  auto rows = stratified_test(obs);
  double min_stratum = 1.0;
  for (std::size_t i = 0; i < 4; ++i) min_stratum = std::min(min_stratum, *rows[i].pct_saved);
  EXPECT_LT(*rows.back().pct_saved, min_stratum);
}

TEST(Stratified, UndersizedStratumHasNoTest) {
  std::vector<Observation> obs{{"a", Group::control, 2, 1}, {"b", Group::test, 2, 2}, {"c", Group::test, 2, 3}};
  auto rows = stratified_test(obs, {1, 2});
  EXPECT_FALSE(rows[0].welch.has_value());
  EXPECT_FALSE(rows[0].mean_control.has_value());
  EXPECT_FALSE(rows[1].welch.has_value());
  EXPECT_EQ(rows[1].mean_test, 2.5);
}

TEST(Terciles, TiesGoLower) {
  auto t = tercile_thresholds({7, 7, 7, 7, 7});
  for (auto loc : {7}) EXPECT_EQ(t.tercile_of(loc), 1);
  auto s = tercile_thresholds({10, 10, 20, 20, 30, 30});
  EXPECT_EQ(s.first, 10);
  EXPECT_EQ(s.second, 20);
  EXPECT_EQ(s.tercile_of(20), 2);
  EXPECT_EQ(s.tercile_of(31), 3);
}

TEST(Baseline, TrimmedCells) {
  std::vector<DiffSample> cell;
  for (double h : {1.0, 2.0, 3.0, 4.0, 100.0}) cell.push_back(sample("x", {{"web", "app"}}, 5, h));
  auto table = build_baseline_table(cell, 0.2);
  BaselineKey key{"web", "app", 1};
  EXPECT_DOUBLE_EQ(table.cells.at(key).trimmed_mean, 3.0 * kHour);
  std::vector<double> hours{1 * kHour, 2 * kHour, 3 * kHour, 4 * kHour, 100 * kHour};
  EXPECT_DOUBLE_EQ(build_baseline_table(cell, 0.0).cells.at(key).trimmed_mean, mean(hours));
}

TEST(Baseline, RejectsSharedOrMultiTarget) {
  std::vector<DiffSample> bad{sample("s", {{"a", "b"}, {"c", "d"}}, 1, 1)};
  EXPECT_THROW(build_baseline_table(bad), StatsError);
  std::vector<DiffSample> shared{sample("s", {{"a", "b"}}, 1, 1, true)};
  EXPECT_THROW(build_baseline_table(shared), StatsError);
}

TEST(Counterfactual, HandExample) {
  auto table = build_baseline_table(hand_unshared());
  std::vector<DiffSample> shared{sample("S1", {{"android", "app1"}, {"ios", "app1"}}, 20, 3, true)};
  auto r = counterfactual_savings(shared, table);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].tercile, 2);
  EXPECT_DOUBLE_EQ(r.records[0].counterfactual, 10.0 * kHour);
  EXPECT_DOUBLE_EQ(r.total_saved, 7.0 * kHour);
  EXPECT_DOUBLE_EQ(*r.relative_improvement, 0.7);
}

TEST(Counterfactual, SingleTargetCanLose) {
  auto table = build_baseline_table(hand_unshared());
  std::vector<DiffSample> worse{sample("S2", {{"ios", "app1"}}, 20, 8, true)};
  EXPECT_DOUBLE_EQ(counterfactual_savings(worse, table).total_saved, -2.0 * kHour);
  std::vector<DiffSample> even{sample("S3", {{"ios", "app1"}}, 20, 6, true)};
  EXPECT_EQ(counterfactual_savings(even, table).total_saved, 0.0);
}

TEST(Counterfactual, MissingCellIsAnError) {
  auto table = build_baseline_table(hand_unshared());
  std::vector<DiffSample> s{sample("S4", {{"web", "app9"}}, 20, 1, true)};
  try {
    counterfactual_savings(s, table);
    FAIL();
  } catch (const StatsError& e) {
    EXPECT_NE(std::string(e.what()).find("(web, app9, tercile 2)"), std::string::npos);
  }
}

TEST(Counterfactual, MoreTargetsNeverLowerTheCounterfactual) {
  auto table = build_baseline_table(hand_unshared());
  DiffMeta one{"S", "alice", {"c"}, 1, 30, true, {{"ios", "app1"}}, {}};
  DiffMeta two = one;
  two.platform_apps.push_back({"android", "app1"});
  EXPECT_GT(counterfactual_dat(two, table), counterfactual_dat(one, table));
}
