#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dat/stats.hpp"
#include "dat/types.hpp"

namespace dat {

enum class Group { control, test, mixed };

inline std::string_view to_string(Group g) {
  switch (g) {
    case Group::control: return "control";
    case Group::test: return "test";
    case Group::mixed: return "mixed";
  }
  return "mixed";
}

inline std::optional<Group> group_from(std::string_view s) {
  if (s == "control") return Group::control;
  if (s == "test") return Group::test;
  if (s == "mixed") return Group::mixed;
  return std::nullopt;
}

struct GroupAssignment {
  std::string diff_id;
  Group group = Group::mixed;
  friend bool operator==(const GroupAssignment&, const GroupAssignment&) = default;
};

struct DiffFiles {
  std::string diff_id;
  std::vector<std::string> touched;
};

/// control: touches migrated files only; test: unmigrated only; mixed: both.
/// Files outside `relevant` are ignored, and diffs touching no relevant file
/// get no assignment.
inline std::vector<GroupAssignment> assign_groups(const std::vector<DiffFiles>& diffs,
                                                  const std::set<std::string>& migrated,
                                                  const std::set<std::string>& relevant) {
  std::vector<GroupAssignment> out;
  for (const auto& d : diffs) {
    bool any_migrated = false, any_unmigrated = false;
    for (const auto& f : d.touched) {
      if (!relevant.contains(f)) continue;
      (migrated.contains(f) ? any_migrated : any_unmigrated) = true;
    }
    if (!any_migrated && !any_unmigrated) continue;
    Group g = any_migrated && any_unmigrated ? Group::mixed
              : any_migrated                 ? Group::control
                                             : Group::test;
    out.push_back({d.diff_id, g});
  }
  return out;
}

struct Observation {
  std::string diff_id;
  Group group = Group::control;
  std::int64_t files_changed = 0;
  double dat = 0.0;
};

struct StratumResult {
  std::string stratum;  // files-changed value, or "variable" for the pooled row
  std::size_t n_control = 0;
  std::size_t n_test = 0;
  std::optional<double> mean_control;
  std::optional<double> mean_test;
  /// (mean_control - mean_test) / mean_control
  std::optional<double> pct_saved;
  std::optional<WelchResult> welch;  // absent when a side is undersized or has no variance
};

inline StratumResult compare_groups(std::string label, std::span<const double> control,
                                    std::span<const double> test) {
  StratumResult r;
  r.stratum = std::move(label);
  r.n_control = control.size();
  r.n_test = test.size();
  if (!control.empty()) r.mean_control = mean(control);
  if (!test.empty()) r.mean_test = mean(test);
  if (r.mean_control && r.mean_test && *r.mean_control > 0.0)
    r.pct_saved = (*r.mean_control - *r.mean_test) / *r.mean_control;
  if (control.size() >= 2 && test.size() >= 2) {
    try {
      r.welch = welch_t_test(control, test);
    } catch (const StatsError&) {
    }
  }
  return r;
}

/// One Welch comparison per files-changed stratum plus a pooled "variable" row
/// over every size. Mixed diffs are excluded.
inline std::vector<StratumResult> stratified_test(std::span<const Observation> obs,
                                                  const std::vector<std::int64_t>& strata = {1, 2, 3, 4}) {
  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>> by_size;
  std::vector<double> all_control, all_test;
  for (const auto& o : obs) {
    if (o.group == Group::mixed) continue;
    auto& [c, t] = by_size[o.files_changed];
    (o.group == Group::control ? c : t).push_back(o.dat);
    (o.group == Group::control ? all_control : all_test).push_back(o.dat);
  }
  std::vector<StratumResult> out;
  for (std::int64_t s : strata) {
    const auto& [c, t] = by_size[s];
    out.push_back(compare_groups(std::to_string(s), c, t));
  }
  out.push_back(compare_groups("variable", all_control, all_test));
  return out;
}

struct DiffSample {
  DiffMeta diff;
  double dat = 0.0;
};

struct TercileThresholds {
  std::int64_t first = 0;
  std::int64_t second = 0;

  /// Ties go to the lower tercile.
  int tercile_of(std::int64_t loc) const { return loc <= first ? 1 : loc <= second ? 2 : 3; }
};

/// Nearest-rank 1/3 and 2/3 LOC quantiles, in exact integer arithmetic.
inline TercileThresholds tercile_thresholds(std::vector<std::int64_t> locs) {
  if (locs.empty()) throw StatsError("no data");
  std::sort(locs.begin(), locs.end());
  const std::size_t n = locs.size();
  return {locs[(n + 2) / 3 - 1], locs[(2 * n + 2) / 3 - 1]};
}

using BaselineKey = std::tuple<std::string, std::string, int>;  // platform, app, tercile

struct BaselineCell {
  double trimmed_mean = 0.0;
  std::size_t n = 0;
};

struct BaselineTable {
  TercileThresholds thresholds;
  double trim = 0.10;
  std::map<BaselineKey, BaselineCell> cells;
};

inline std::string describe(const BaselineKey& k) {
  return "(" + std::get<0>(k) + ", " + std::get<1>(k) + ", tercile " + std::to_string(std::get<2>(k)) + ")";
}

/// Per (platform, app, LOC tercile) trimmed-mean DAT of unshared diffs.
inline BaselineTable build_baseline_table(std::span<const DiffSample> unshared, double trim = 0.10) {
  if (unshared.empty()) throw StatsError("baseline table needs unshared diffs");
  std::vector<std::int64_t> locs;
  for (const auto& s : unshared) {
    if (s.diff.shared) throw StatsError("diff " + s.diff.diff_id + " is shared");
    if (s.diff.platform_apps.size() != 1)
      throw StatsError("unshared diff " + s.diff.diff_id + " must target exactly one platform-app");
    locs.push_back(s.diff.loc);
  }
  BaselineTable table;
  table.trim = trim;
  table.thresholds = tercile_thresholds(std::move(locs));
  std::map<BaselineKey, std::vector<double>> values;
  for (const auto& s : unshared) {
    const auto& [platform, app] = s.diff.platform_apps.front();
    values[{platform, app, table.thresholds.tercile_of(s.diff.loc)}].push_back(s.dat);
  }
  for (const auto& [key, v] : values) table.cells[key] = {trimmed_mean(v, trim), v.size()};
  return table;
}

struct SavingsRecord {
  std::string diff_id;
  int tercile = 1;
  double counterfactual = 0.0;
  double actual = 0.0;
  double saved = 0.0;  // negative when sharing cost more
};

struct SavingsReport {
  std::vector<SavingsRecord> records;
  double total_counterfactual = 0.0;
  double total_actual = 0.0;
  double total_saved = 0.0;
  std::optional<double> relative_improvement;  // total_saved / total_counterfactual
};

inline double counterfactual_dat(const DiffMeta& diff, const BaselineTable& table) {
  const int tercile = table.thresholds.tercile_of(diff.loc);
  double sum = 0.0;
  for (const auto& [platform, app] : diff.platform_apps) {
    BaselineKey key{platform, app, tercile};
    auto it = table.cells.find(key);
    if (it == table.cells.end()) throw StatsError("missing baseline cell " + describe(key));
    sum += it->second.trimmed_mean;
  }
  return sum;
}

inline SavingsReport counterfactual_savings(std::span<const DiffSample> shared, const BaselineTable& table) {
  SavingsReport r;
  for (const auto& s : shared) {
    SavingsRecord rec;
    rec.diff_id = s.diff.diff_id;
    rec.tercile = table.thresholds.tercile_of(s.diff.loc);
    rec.counterfactual = counterfactual_dat(s.diff, table);
    rec.actual = s.dat;
    rec.saved = rec.counterfactual - rec.actual;
    r.total_counterfactual += rec.counterfactual;
    r.total_actual += rec.actual;
    r.total_saved += rec.saved;
    r.records.push_back(std::move(rec));
  }
  if (r.total_counterfactual > 0.0) r.relative_improvement = r.total_saved / r.total_counterfactual;
  return r;
}

}  // namespace dat
