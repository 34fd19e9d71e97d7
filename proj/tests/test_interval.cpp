#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dat/interval.hpp"

using dat::Interval;

namespace {

std::set<dat::Millis> points(const std::vector<Interval>& v) {
  std::set<dat::Millis> out;
  for (const auto& i : v)
    for (dat::Millis t = i.start; t < i.end; ++t) out.insert(t);
  return out;
}

std::vector<Interval> random_set(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> pos(0, 200), len(1, 30);
  std::vector<Interval> v;
  for (int i = 0; i < n; ++i) {
    dat::Millis s = pos(rng);
    v.push_back({s, s + len(rng)});
  }
  return v;
}

}  // namespace

TEST(Interval, Basics) {
  Interval i{10, 25};
  EXPECT_EQ(i.length(), 15);
  EXPECT_FALSE(i.empty());
  EXPECT_TRUE((Interval{5, 5}).empty());
  EXPECT_EQ(dat::overlap_length({0, 10}, {5, 20}), 5);
  EXPECT_EQ(dat::overlap_length({0, 10}, {10, 20}), 0);
  EXPECT_FALSE(dat::overlaps({0, 10}, {10, 20}));
  EXPECT_TRUE(dat::intersect({0, 10}, {20, 30}).empty());
}

TEST(Interval, NormalizeCoalescesTouching) {
  auto n = dat::normalize({{20, 30}, {0, 10}, {10, 15}, {25, 40}, {50, 50}});
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0], (Interval{0, 15}));
  EXPECT_EQ(n[1], (Interval{20, 40}));
  EXPECT_EQ(dat::total_length(n), 35);
}

TEST(Interval, SetOperationsMatchPointwiseOracle) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 300; ++round) {
    auto a = random_set(rng, 1 + round % 6);
    auto b = random_set(rng, round % 5);
    auto na = dat::normalize(a), nb = dat::normalize(b);
    EXPECT_EQ(points(na), points(a));
    EXPECT_EQ(static_cast<std::size_t>(dat::total_length(na)), points(a).size());
    for (std::size_t i = 1; i < na.size(); ++i) EXPECT_LT(na[i - 1].end, na[i].start);

    std::set<dat::Millis> diff;
    auto pb = points(b);
    for (auto t : points(a))
      if (!pb.count(t)) diff.insert(t);
    EXPECT_EQ(points(dat::subtract(na, nb)), diff);

    Interval w{50, 120};
    std::size_t inside = 0;
    for (auto t : points(a)) inside += t >= w.start && t < w.end;
    EXPECT_EQ(static_cast<std::size_t>(dat::clipped_length(na, w)), inside);
  }
}

TEST(Interval, FloorDivRoundsDown) {
  EXPECT_EQ(dat::floor_div(7, 2), 3);
  EXPECT_EQ(dat::floor_div(-7, 2), -4);
  EXPECT_EQ(dat::floor_div(-8, 2), -4);
  EXPECT_EQ(dat::floor_div(0, 5), 0);
}
