#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dat/event_log.hpp"
#include "dat/experiment.hpp"
#include "dat/precise_matcher.hpp"

namespace dat {

/// Multiplicative DAT effect on the diffs labeled as the test group.
struct EffectInjection {
  double test_fraction = 0.0;
  double factor = 1.0;
  /// Overrides `factor` by files changed; diffs of other sizes use default_factor.
  std::map<std::int64_t, double> factor_by_files;
  double default_factor = 1.0;

  double factor_for(std::int64_t files) const {
    if (factor_by_files.empty()) return factor;
    auto it = factor_by_files.find(files);
    return it == factor_by_files.end() ? default_factor : it->second;
  }
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t n_developers = 4;
  std::size_t n_diffs_per_dev = 20;

  // Ide session length ~ lognormal in minutes.
  double session_log_mean = std::log(12.0);
  double session_log_sigma = 0.45;
  std::size_t base_sessions_per_diff = 8;
  std::size_t sessions_per_file = 1;
  std::size_t max_commits_per_diff = 3;
  /// Weights for 1, 2, ... files changed.
  std::vector<double> files_changed_weights{0.30, 0.25, 0.20, 0.15, 0.04, 0.03, 0.02, 0.01};

  double interleave_probability = 0.3;
  double untracked_tool_fraction = 0.1;
  double noncoding_probability = 0.3;
  double review_probability = 0.3;
  double abandoned_session_probability = 0.0;

  // Offline gap between sessions ~ min_gap + lognormal minutes.
  double gap_log_mean = std::log(3.0);
  double gap_log_sigma = 0.7;
  Millis min_gap = 45 * kSecond;

  double shared_fraction = 0.0;
  double shared_dat_factor = 1.2;
  double loc_per_minute = 3.0;

  Millis epoch = 1704067200000;  // 2024-01-01T00:00:00Z
  Millis workday_start = 9 * kHour;
  Millis workday_length = 8 * kHour;

  EffectInjection effect;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string("sim config: ") + name + " must be in [0, 1]");
    };
    prob(interleave_probability, "interleave_probability");
    prob(untracked_tool_fraction, "untracked_tool_fraction");
    prob(noncoding_probability, "noncoding_probability");
    prob(review_probability, "review_probability");
    prob(abandoned_session_probability, "abandoned_session_probability");
    prob(shared_fraction, "shared_fraction");
    prob(effect.test_fraction, "effect test_fraction");
    if (untracked_tool_fraction >= 1.0) throw Error("sim config: untracked_tool_fraction must be below 1");
    if (n_developers == 0 || n_diffs_per_dev == 0) throw Error("sim config: needs developers and diffs");
    if (interleave_probability > 0.0 && n_diffs_per_dev < 2)
      throw Error("sim config: interleaving needs at least two diffs per developer");
    if (!(session_log_sigma >= 0.0) || !(gap_log_sigma >= 0.0)) throw Error("sim config: sigma must be >= 0");
    if (base_sessions_per_diff == 0 || max_commits_per_diff == 0)
      throw Error("sim config: diffs need sessions and commits");
    if (files_changed_weights.empty()) throw Error("sim config: files_changed_weights is empty");
    for (double w : files_changed_weights)
      if (!(w >= 0.0)) throw Error("sim config: negative files weight");
    if (min_gap <= 0) throw Error("sim config: min_gap must be positive");
    if (!(shared_dat_factor > 0.0) || !(loc_per_minute > 0.0)) throw Error("sim config: factors must be positive");
    auto positive = [](double f) { return f > 0.0; };
    if (!positive(effect.factor) || !positive(effect.default_factor) ||
        !std::all_of(effect.factor_by_files.begin(), effect.factor_by_files.end(),
                     [&](const auto& kv) { return positive(kv.second); }))
      throw Error("sim config: effect factors must be positive");
  }
};

struct GroundTruthDiff {
  std::string diff_id;
  std::string author;
  Millis true_duration = 0;
  std::vector<Interval> intervals;  // authored work labeled as serving this diff
  std::optional<Group> group;
  std::map<std::string, Millis> reviewer;
  std::int64_t files_changed = 0;

  friend bool operator==(const GroundTruthDiff&, const GroundTruthDiff&) = default;
};

struct GroundTruth {
  std::vector<GroundTruthDiff> diffs;  // ordered by diff id

  const GroundTruthDiff* find(const std::string& id) const {
    auto it = std::lower_bound(diffs.begin(), diffs.end(), id,
                               [](const GroundTruthDiff& d, const std::string& v) { return d.diff_id < v; });
    return it != diffs.end() && it->diff_id == id ? &*it : nullptr;
  }
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Workload {
  EventLog log;
  GroundTruth truth;
};

namespace detail {

// std distributions are implementation-defined; these draw from the
// standard-specified mt19937_64 stream directly so that output is
// reproducible across standard libraries.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  Millis between(Millis lo, Millis hi) { return lo + static_cast<Millis>(below(static_cast<std::size_t>(hi - lo + 1))); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

  std::size_t weighted(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double r = uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (r < w[i]) return i;
      r -= w[i];
    }
    return w.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::string padded(const char* prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

struct SimDiff {
  std::size_t gt = 0;         // index into truth.diffs
  std::size_t meta = 0;       // index into log.diffs
  std::vector<std::vector<Millis>> units;  // ide session lengths per commit
  std::size_t next_unit = 0;
  double factor = 1.0;
  std::optional<std::string> head;
  Millis last_commit = 0;
};

}  // namespace detail

/// Generates a synthetic telemetry log with per-diff ground truth.
///
/// Each diff is worked in commit-sized units: an optional terminal lead-in
/// (the untracked share of the unit's work), ide sessions separated by offline
/// gaps (sometimes filled by non-coding tools), then a commit or amend. With
/// interleaving the developer checks out another in-flight diff between units.
inline Workload generate_workload(const SimConfig& cfg) {
  cfg.validate();
  detail::SimRng rng(cfg.seed);
  Workload w;
  for (auto [tool, cls] : {std::pair{"vscode", ToolClass::ide}, {"terminal", ToolClass::coding_related},
                           {"chrome", ToolClass::non_coding}, {"phabricator", ToolClass::review}})
    w.log.catalog.add(tool, cls);

  const std::vector<PlatformApp> targets{{"android", "app1"}, {"ios", "app1"}, {"web", "app1"},
                                         {"android", "app2"}, {"ios", "app2"}};
  const std::size_t n_total = cfg.n_developers * cfg.n_diffs_per_dev;

  // Exact group sizes: the first round(test_fraction * n) of a shuffled order are test.
  std::vector<std::size_t> order(n_total);
  for (std::size_t i = 0; i < n_total; ++i) order[i] = i;
  for (std::size_t i = n_total; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<bool> is_test(n_total, false);
  const auto n_test = static_cast<std::size_t>(std::llround(cfg.effect.test_fraction * static_cast<double>(n_total)));
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  std::vector<detail::SimDiff> sims;
  for (std::size_t dev = 0; dev < cfg.n_developers; ++dev) {
    for (std::size_t k = 0; k < cfg.n_diffs_per_dev; ++k) {
      const std::size_t global = dev * cfg.n_diffs_per_dev + k;
      detail::SimDiff sd;
      DiffMeta meta;
      meta.diff_id = detail::padded("D", global + 1, 5);
      meta.author = detail::padded("dev", dev + 1, 3);
      meta.files_changed = static_cast<std::int64_t>(rng.weighted(cfg.files_changed_weights)) + 1;
      meta.shared = rng.chance(cfg.shared_fraction);
      std::size_t n_targets = meta.shared ? 2 + rng.below(2) : 1;
      std::vector<PlatformApp> pool = targets;
      for (std::size_t t = 0; t < n_targets; ++t) {
        std::size_t pick = rng.below(pool.size());
        meta.platform_apps.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      std::sort(meta.platform_apps.begin(), meta.platform_apps.end());

      const std::size_t n_sessions =
          cfg.base_sessions_per_diff + cfg.sessions_per_file * static_cast<std::size_t>(meta.files_changed);
      const std::size_t n_units = 1 + rng.below(std::min(cfg.max_commits_per_diff, n_sessions));
      sd.units.resize(n_units);
      double base_minutes = 0.0;
      for (std::size_t s = 0; s < n_sessions; ++s) {
        double minutes = rng.lognormal(cfg.session_log_mean, cfg.session_log_sigma);
        if (meta.shared) minutes *= cfg.shared_dat_factor;
        base_minutes += minutes;
        sd.units[s % n_units].push_back(std::max<Millis>(kSecond, std::llround(minutes * kMinute)));
      }
      base_minutes /= (1.0 - cfg.untracked_tool_fraction);
      meta.loc = std::max<std::int64_t>(
          1, std::llround(base_minutes * cfg.loc_per_minute * rng.lognormal(0.0, 0.3)));

      GroundTruthDiff gt;
      gt.diff_id = meta.diff_id;
      gt.author = meta.author;
      gt.files_changed = meta.files_changed;
      if (cfg.effect.test_fraction > 0.0) {
        gt.group = is_test[global] ? Group::test : Group::control;
        if (is_test[global]) sd.factor = cfg.effect.factor_for(meta.files_changed);
      }
      sd.gt = w.truth.diffs.size();
      sd.meta = w.log.diffs.size();
      w.truth.diffs.push_back(std::move(gt));
      w.log.diffs.push_back(std::move(meta));
      sims.push_back(std::move(sd));
    }
  }

  std::size_t commit_counter = 0;
  auto activity = [&](const std::string& user, const char* tool, Millis a, Millis b) {
    w.log.activities.push_back({user, tool, "main", a, b});
  };
  auto vcs = [&](const std::string& user, VcsOp op, const std::string& id, Millis ts, bool automatic) {
    w.log.vcs_events.push_back({user, "main", op, id, ts, automatic});
  };
  auto gap = [&] {
    return cfg.min_gap + std::llround(rng.lognormal(cfg.gap_log_mean, cfg.gap_log_sigma) * kMinute);
  };

  for (std::size_t dev = 0; dev < cfg.n_developers; ++dev) {
    const std::string user = detail::padded("dev", dev + 1, 3);
    const std::size_t first = dev * cfg.n_diffs_per_dev;
    std::size_t queued = first;
    const std::size_t end = first + cfg.n_diffs_per_dev;
    const std::size_t width = cfg.interleave_probability > 0.0 ? 2 : 1;
    std::vector<std::size_t> active;
    auto refill = [&] {
      while (active.size() < width && queued < end) active.push_back(queued++);
    };
    refill();

    Millis day = 0;
    Millis t = cfg.epoch + cfg.workday_start;
    std::string head = "base-" + user;
    std::optional<std::size_t> last_worked;
    std::size_t cur = 0;
    vcs(user, VcsOp::checkout, head, t, true);
    t += rng.between(5 * kSecond, 30 * kSecond);

    while (!active.empty()) {
      if (t > cfg.epoch + day * kDay + cfg.workday_start + cfg.workday_length) {
        ++day;
        t = cfg.epoch + day * kDay + cfg.workday_start;
        vcs(user, VcsOp::checkout, head, t, true);
        t += rng.between(5 * kSecond, 30 * kSecond);
      }
      if (active.size() > 1 && rng.chance(cfg.interleave_probability)) cur = (cur + 1) % active.size();
      if (cur >= active.size()) cur = 0;
      detail::SimDiff& sd = sims[active[cur]];
      GroundTruthDiff& gt = w.truth.diffs[sd.gt];
      DiffMeta& meta = w.log.diffs[sd.meta];

      if (last_worked != active[cur]) {
        head = sd.head.value_or("base-" + user + "-" + std::to_string(active[cur]));
        vcs(user, VcsOp::checkout, head, t, false);
        t += rng.between(5 * kSecond, 30 * kSecond);
        last_worked = active[cur];
      }

      if (rng.chance(cfg.abandoned_session_probability)) {
        const Millis len = std::llround(rng.lognormal(cfg.session_log_mean, cfg.session_log_sigma) * kMinute);
        activity(user, "vscode", t, t + std::max<Millis>(kSecond, len));
        t += std::max<Millis>(kSecond, len) + gap();
      }

      std::vector<Millis> lengths;
      for (Millis len : sd.units[sd.next_unit])
        lengths.push_back(std::max<Millis>(kSecond, std::llround(static_cast<double>(len) * sd.factor)));
      if (cfg.untracked_tool_fraction > 0.0) {
        Millis ide_total = 0;
        for (Millis len : lengths) ide_total += len;
        const Millis lead = std::llround(static_cast<double>(ide_total) * cfg.untracked_tool_fraction /
                                         (1.0 - cfg.untracked_tool_fraction));
        if (lead > 0) {
          activity(user, "terminal", t, t + lead);
          gt.intervals.push_back({t, t + lead});
          t += lead + rng.between(kSecond, 20 * kSecond);
        }
      }
      for (std::size_t i = 0; i < lengths.size(); ++i) {
        activity(user, "vscode", t, t + lengths[i]);
        gt.intervals.push_back({t, t + lengths[i]});
        t += lengths[i];
        if (i + 1 == lengths.size()) break;
        const Millis g = gap();
        if (g >= 60 * kSecond && rng.chance(cfg.noncoding_probability))
          activity(user, "chrome", t + 15 * kSecond, t + g - 15 * kSecond);
        t += g;
      }

      const Millis ts = rng.chance(0.5) ? t : t + rng.between(kSecond, 30 * kSecond);
      const std::string id = detail::padded("c", ++commit_counter, 7);
      if (sd.next_unit == 0 || rng.chance(0.5)) {
        vcs(user, VcsOp::commit, id, ts, false);
        meta.commit_ids.push_back(id);
      } else {
        vcs(user, VcsOp::amend, id, ts, false);
      }
      sd.head = id;
      head = id;
      sd.last_commit = ts;
      t = ts + gap();
      ++sd.next_unit;

      if (rng.chance(cfg.review_probability) && n_total > cfg.n_diffs_per_dev) {
        std::size_t other = rng.below(n_total - cfg.n_diffs_per_dev);
        if (other >= first) other += cfg.n_diffs_per_dev;
        const Millis len = std::max<Millis>(kSecond, std::llround(rng.lognormal(std::log(8.0), 0.5) * kMinute));
        activity(user, "phabricator", t, t + len);
        w.log.reviews.push_back({user, w.log.diffs[sims[other].meta].diff_id, t, t + len});
        w.truth.diffs[sims[other].gt].reviewer[user] += len;
        t += len + gap();
      }

      if (sd.next_unit == sd.units.size()) {
        meta.landed_ts = sd.last_commit + std::llround(rng.lognormal(std::log(6.0), 0.8) * kHour);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(cur));
        refill();
        if (cur >= active.size()) cur = 0;
      }
    }

    // Trailing session: work never saved as a commit.
    const Millis len = std::llround(rng.lognormal(cfg.session_log_mean, cfg.session_log_sigma) * kMinute);
    activity(user, "vscode", t, t + std::max<Millis>(kSecond, len));
  }

  for (auto& gt : w.truth.diffs) gt.true_duration = total_length(gt.intervals);
  std::sort(w.truth.diffs.begin(), w.truth.diffs.end(),
            [](const GroundTruthDiff& a, const GroundTruthDiff& b) { return a.diff_id < b.diff_id; });
  detail::sort_streams(w.log);
  return w;
}

struct AccuracyEntry {
  std::string diff_id;
  Millis computed = 0;
  Millis truth = 0;
  double relative_error = 0.0;
};

struct AccuracyReport {
  std::size_t n_scored = 0;
  std::size_t n_zero_truth = 0;
  double mean_relative_error = 0.0;
  double within_5pct = 0.0;  // fraction of scored diffs, band inclusive
  std::size_t n_within_5pct = 0;
  std::vector<AccuracyEntry> worst;  // up to five, largest error first
};

/// Compares computed author DAT (Anchor-DAT by default) with ground truth.
inline AccuracyReport score_accuracy(const std::vector<DiffDat>& dats, const GroundTruth& gt,
                                     bool use_anchor = true) {
  std::map<std::string, const DiffDat*> by_id;
  for (const auto& d : dats) by_id.emplace(d.diff_id, &d);
  AccuracyReport r;
  std::vector<AccuracyEntry> entries;
  for (const auto& g : gt.diffs) {
    auto it = by_id.find(g.diff_id);
    if (it == by_id.end()) throw Error("ground-truth diff " + g.diff_id + " missing from results");
    if (g.true_duration <= 0) {
      ++r.n_zero_truth;
      continue;
    }
    const Millis computed = use_anchor ? it->second->anchor_dat() : it->second->author_precise;
    const Millis err = computed > g.true_duration ? computed - g.true_duration : g.true_duration - computed;
    entries.push_back({g.diff_id, computed, g.true_duration,
                       static_cast<double>(err) / static_cast<double>(g.true_duration)});
    if (20 * err <= g.true_duration) ++r.n_within_5pct;
  }
  r.n_scored = entries.size();
  if (!entries.empty()) {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.relative_error;
    r.mean_relative_error = sum / static_cast<double>(entries.size());
    r.within_5pct = static_cast<double>(r.n_within_5pct) / static_cast<double>(entries.size());
  }
  std::stable_sort(entries.begin(), entries.end(), [](const AccuracyEntry& a, const AccuracyEntry& b) {
    return a.relative_error > b.relative_error;
  });
  entries.resize(std::min<std::size_t>(5, entries.size()));
  r.worst = std::move(entries);
  return r;
}

}  // namespace dat
