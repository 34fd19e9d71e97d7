#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dat/dat.hpp"

namespace datctl {
namespace {

using dat::Millis;
using dat::ojson;

// "90" (seconds), "1500ms", "30s", "5m", "2h".
Millis parse_duration(const std::string& text) {
  std::size_t pos = 0;
  long double value = 0;
  try {
    value = std::stold(text, &pos);
  } catch (const std::exception&) {
    throw dat::Error("invalid duration '" + text + "'");
  }
  const std::string unit = text.substr(pos);
  long double scale = 0;
  if (unit.empty() || unit == "s") scale = dat::kSecond;
  else if (unit == "ms") scale = 1;
  else if (unit == "m" || unit == "min") scale = dat::kMinute;
  else if (unit == "h") scale = dat::kHour;
  else throw dat::Error("invalid duration unit in '" + text + "'");
  if (value < 0) throw dat::Error("duration must be nonnegative: '" + text + "'");
  return static_cast<Millis>(std::llround(value * scale));
}

struct PipelineFlags {
  std::string merge_gap = "30s";
  std::string idle_threshold = "300s";
  std::string anchor_max_gap = "30m";
  std::string anchor_max_total = "2h";

  void attach(CLI::App* app) {
    app->add_option("--merge-gap", merge_gap, "Join same-tool activity separated by at most this gap")
        ->capture_default_str();
    app->add_option("--idle-threshold", idle_threshold, "Inactivity that always splits sessions")
        ->capture_default_str();
    app->add_option("--anchor-max-gap", anchor_max_gap, "Largest gap inside an anchor chain")
        ->capture_default_str();
    app->add_option("--anchor-max-total", anchor_max_total, "Anchor time added per diff at most")
        ->capture_default_str();
  }

  dat::PipelineConfig config() const {
    dat::PipelineConfig cfg;
    cfg.session.merge_gap = parse_duration(merge_gap);
    cfg.session.idle_threshold = parse_duration(idle_threshold);
    cfg.anchor.max_gap = parse_duration(anchor_max_gap);
    cfg.anchor.max_total = parse_duration(anchor_max_total);
    cfg.session.validate();
    cfg.anchor.validate();
    return cfg;
  }
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dat::ParseError(0, "cannot open " + path);
  return in;
}

dat::EventLog read_log(const std::string& path) {
  auto in = open_input(path);
  return dat::parse_event_log(in);
}

// Parses and rejects logs that break EventLog invariants.
dat::EventLog load_valid_log(const std::string& path, std::ostream& err) {
  dat::EventLog log = read_log(path);
  auto report = dat::validate_event_log(log);
  if (!report.ok()) {
    for (const auto& v : report.violations) err << "validation: " << v.code << ": " << v.detail << "\n";
    throw dat::ValidationError(0, std::to_string(report.violations.size()) + " invariant violation(s) in " + path);
  }
  return log;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw dat::Error("cannot write " + path);
  f << content;
}

std::string csv_with_manifest(const dat::RunManifest& m, const std::string& csv) {
  return "# " + dat::to_json(m).dump() + "\r\n" + csv;
}

void warn_notes(const std::vector<std::string>& notes, std::ostream& err) {
  for (const auto& n : notes) err << "warning: " << n << "\n";
}

ojson violations_json(const std::vector<dat::Violation>& vs) {
  ojson arr = ojson::array();
  for (const auto& v : vs) arr.push_back(ojson{{"invariant", v.code}, {"detail", v.detail}});
  return arr;
}

ojson trend_json(const std::vector<dat::TrendPoint>& pts) {
  ojson arr = ojson::array();
  for (const auto& p : pts)
    arr.push_back(ojson{{"bucket_start", p.bucket_start}, {"n", p.n},
                        {"winsorized_mean_ms", dat::num_or_null(p.winsorized_mean)}});
  return arr;
}

// ---------------------------------------------------------------- compute

struct ComputeCmd {
  std::string log;
  std::string out_prefix;
  std::string format = "jsonl";
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("compute", "Compute per-diff DAT");
    c->add_option("log", log, "Event log (JSONL)")->required();
    c->add_option("--out", out_prefix, "Write PREFIX.jsonl and PREFIX.csv instead of stdout");
    c->add_option("--format", format, "stdout format")->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = flags.config();
    const auto log_data = load_valid_log(log, err);
    const auto r = dat::compute_dat(log_data, cfg);
    warn_notes(r.notes, err);
    dat::RunManifest m{"compute", {log}, cfg, {}, {}, {}};
    std::string jsonl = dat::to_json(m).dump() + "\n";
    for (const auto& d : r.dats) jsonl += dat::to_json(d).dump() + "\n";
    const std::string csv = csv_with_manifest(m, dat::dat_csv(r.dats));
    if (!out_prefix.empty()) {
      write_output(out_prefix + ".jsonl", jsonl, out);
      write_output(out_prefix + ".csv", csv, out);
    } else {
      out << (format == "csv" ? csv : jsonl);
    }
    return kOk;
  }
};

// --------------------------------------------------------------- validate

struct ValidateCmd {
  std::string log;
  std::string dat_file;
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("validate", "Check log and DAT invariants");
    c->add_option("log", log, "Event log (JSONL)")->required();
    c->add_option("--dat", dat_file, "Check this DAT results file instead of recomputing");
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream&) const {
    const auto cfg = flags.config();
    const auto log_data = read_log(log);
    auto violations = dat::validate_event_log(log_data).violations;
    const auto r = dat::compute_dat(log_data, cfg);
    std::vector<dat::DiffDat> dats = r.dats;
    if (!dat_file.empty()) {
      auto in = open_input(dat_file);
      dats = dat::parse_dat_results(in);
    } else {
      auto cons = dat::check_ide_conservation(r);
      violations.insert(violations.end(), cons.begin(), cons.end());
    }
    auto inv = dat::check_dat_invariants(r.sessions, dats);
    violations.insert(violations.end(), inv.begin(), inv.end());

    std::map<std::string, Millis> coding, dat_time;
    for (const auto& s : r.sessions.sessions)
      if (dat::is_coding(s.tool_class)) coding[s.user] += s.duration();
    for (const auto& d : dats)
      for (const auto& c : d.intervals)
        if (c.source != dat::Source::review) dat_time[c.user] += c.span.length();
    ojson users = ojson::array();
    for (const auto& [u, t] : coding)
      users.push_back(ojson{{"user", u}, {"coding_ms", t}, {"dat_ms", dat_time[u]}});

    dat::RunManifest m{"validate", {log}, cfg, {}, {}, {}};
    if (!dat_file.empty()) m.inputs.push_back(dat_file);
    ojson report{{"kind", "validation"},
                 {"manifest", dat::to_json(m)},
                 {"ok", violations.empty()},
                 {"n_diffs", dats.size()},
                 {"coverage", log_data.diffs.empty() ? ojson(nullptr) : ojson(dat::coverage(dats, log_data.diffs))},
                 {"users", users},
                 {"violations", violations_json(violations)}};
    out << report.dump() << "\n";
    return violations.empty() ? kOk : kValidationError;
  }
};

// --------------------------------------------------------------- sessions

struct SessionsCmd {
  std::string log;
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("sessions", "Dump sessions as JSONL");
    c->add_option("log", log, "Event log (JSONL)")->required();
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = flags.config();
    const auto set = dat::build_sessions(load_valid_log(log, err), cfg.session);
    out << dat::to_json(dat::RunManifest{"sessions", {log}, cfg, {}, {}, {}}).dump() << "\n";
    for (const auto& s : set.sessions)
      out << ojson{{"kind", "session"}, {"user", s.user}, {"tool", s.tool}, {"workspace", s.workspace},
                   {"start", s.start}, {"end", s.end}, {"class", dat::to_string(s.tool_class)}}
                 .dump()
          << "\n";
    return kOk;
  }
};

// -------------------------------------------------------------- aggregate

struct AggregateCmd {
  std::string log;
  std::string out_prefix;
  std::string format = "jsonl";
  double winsorize_p = 0.99;
  std::string bucket = "day";
  std::optional<Millis> window_start, window_end;
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("aggregate", "Coverage, winsorized means, TSD, CGT and trendline");
    c->add_option("log", log, "Event log (JSONL)")->required();
    c->add_option("--winsorize-p", winsorize_p, "Winsorization percentile")->capture_default_str();
    c->add_option("--bucket", bucket, "Trendline bucket: day, week or a duration")->capture_default_str();
    c->add_option("--window-start", window_start, "TSD window start (ms)");
    c->add_option("--window-end", window_end, "TSD window end (ms, exclusive)");
    c->add_option("--out", out_prefix, "Write PREFIX.json and PREFIX_{tsd,cgt,trend}.csv");
    c->add_option("--format", format, "stdout format")->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = flags.config();
    const auto log_data = load_valid_log(log, err);
    const auto r = dat::compute_dat(log_data, cfg);
    warn_notes(r.notes, err);

    dat::Bucketing b = bucket == "day" ? dat::Bucketing::day()
                       : bucket == "week" ? dat::Bucketing::week()
                                          : dat::Bucketing{parse_duration(bucket), 0};
    const auto agg = dat::aggregate(r.dats, log_data.diffs, winsorize_p, b);

    Millis lo = INT64_MAX, hi = INT64_MIN;
    for (const auto& s : r.sessions.sessions) lo = std::min(lo, s.start), hi = std::max(hi, s.end);
    for (const auto& d : log_data.diffs)
      if (d.landed_ts) lo = std::min(lo, *d.landed_ts), hi = std::max(hi, *d.landed_ts + 1);
    std::vector<dat::TsdRecord> tsd;
    const dat::Interval window{window_start.value_or(lo), window_end.value_or(hi)};
    if (!window.empty()) tsd = dat::compute_tsd(r.sessions, log_data.diffs, window);
    const auto cgt = dat::compute_cgt(r.dats, log_data.diffs);

    dat::RunManifest m{"aggregate", {log}, cfg, winsorize_p, {}, {}};
    m.extra["bucket_ms"] = b.width;
    m.extra["bucket_origin_ms"] = b.origin;

    ojson tsd_j = ojson::array();
    for (const auto& t : tsd)
      tsd_j.push_back(ojson{{"user", t.user}, {"window_start", t.window.start}, {"window_end", t.window.end},
                            {"total_coding_ms", t.total_coding_time}, {"diffs_published", t.diffs_published},
                            {"tsd_ms", dat::num_or_null(t.tsd)}});
    ojson cgt_j = ojson::array();
    for (const auto& c : cgt.records)
      cgt_j.push_back(ojson{{"diff", c.diff_id}, {"coding_start", c.coding_start}, {"landed", c.landed},
                            {"cgt_ms", c.cgt}});
    ojson report{{"kind", "aggregate"},
                 {"manifest", dat::to_json(m)},
                 {"n_covered", agg.n},
                 {"n_diffs", log_data.diffs.size()},
                 {"coverage", agg.coverage},
                 {"percentile", agg.percentile},
                 {"winsorized_mean_anchor_ms", dat::num_or_null(agg.winsorized_mean_anchor)},
                 {"winsorized_mean_precise_ms", dat::num_or_null(agg.winsorized_mean_precise)},
                 {"trend", trend_json(agg.trend)},
                 {"tsd", tsd_j},
                 {"cgt", cgt_j},
                 {"cgt_skipped", cgt.notes}};

    dat::CsvWriter summary({"metric", "value"});
    summary.row({"n_diffs", std::to_string(log_data.diffs.size())});
    summary.row({"n_covered", std::to_string(agg.n)});
    summary.row({"coverage", dat::fmt_double(agg.coverage)});
    summary.row({"percentile", dat::fmt_double(agg.percentile)});
    summary.row({"winsorized_mean_anchor_ms", dat::opt(agg.winsorized_mean_anchor)});
    summary.row({"winsorized_mean_precise_ms", dat::opt(agg.winsorized_mean_precise)});

    if (!out_prefix.empty()) {
      write_output(out_prefix + ".json", report.dump() + "\n", out);
      write_output(out_prefix + "_summary.csv", csv_with_manifest(m, summary.str()), out);
      write_output(out_prefix + "_tsd.csv", csv_with_manifest(m, dat::tsd_csv(tsd)), out);
      write_output(out_prefix + "_cgt.csv", csv_with_manifest(m, dat::cgt_csv(cgt.records)), out);
      write_output(out_prefix + "_trend.csv", csv_with_manifest(m, dat::trend_csv(agg.trend)), out);
    } else if (format == "csv") {
      out << csv_with_manifest(m, summary.str());
    } else {
      out << report.dump() << "\n";
    }
    return kOk;
  }
};

// ------------------------------------------------------------- experiment

std::set<std::string> read_lines(const std::string& path) {
  auto in = open_input(path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

template <class Fn>
void for_each_json_line(const std::string& path, Fn fn) {
  auto in = open_input(path);
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw dat::ParseError(line, path + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw dat::ParseError(line, path + ": record must be a JSON object");
    if (j.contains("kind") && j["kind"] == "manifest") continue;
    fn(j, line);
  }
}

struct ExperimentCmd {
  std::string log;
  std::string groups_file;
  std::string observations_file;
  std::string migrated_file;
  std::string relevant_file;
  std::vector<std::int64_t> strata{1, 2, 3, 4};
  std::string format = "jsonl";
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("experiment", "Stratified Welch comparison of control and test diffs");
    c->add_option("log", log, "Event log (JSONL); DAT is computed from it");
    c->add_option("--groups", groups_file, "JSONL of {diff_id, group} or {diff_id, touched}");
    c->add_option("--observations", observations_file, "JSONL of {diff_id, group, files_changed, dat_ms}");
    c->add_option("--migrated", migrated_file, "Migrated files, one per line");
    c->add_option("--relevant", relevant_file, "Files in the experiment population, one per line");
    c->add_option("--strata", strata, "Files-changed strata")->delimiter(',')->capture_default_str();
    c->add_option("--format", format, "Output format")->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream& err) const {
    std::vector<dat::Observation> obs;
    dat::RunManifest m{"experiment", {}, {}, {}, {}, {}};
    std::size_t uncovered = 0;
    if (!observations_file.empty()) {
      m.inputs.push_back(observations_file);
      for_each_json_line(observations_file, [&](const nlohmann::json& j, std::size_t line) {
        dat::Observation o;
        o.diff_id = dat::detail::get_string(j, line, "diff_id");
        auto g = dat::group_from(dat::detail::get_string(j, line, "group"));
        if (!g) throw dat::ParseError(line, "unknown group");
        o.group = *g;
        o.files_changed = dat::detail::get_int(j, line, "files_changed");
        const auto& v = dat::detail::field(j, line, "dat_ms");
        if (!v.is_number()) throw dat::ParseError(line, "field 'dat_ms' must be a number");
        o.dat = v.get<double>();
        obs.push_back(std::move(o));
      });
    } else {
      if (log.empty() || groups_file.empty())
        throw dat::Error("experiment needs --observations, or a log with --groups");
      const auto cfg = flags.config();
      m.pipeline = cfg;
      m.inputs = {log, groups_file};
      const auto log_data = load_valid_log(log, err);
      const auto r = dat::compute_dat(log_data, cfg);

      std::map<std::string, dat::Group> groups;
      std::vector<dat::DiffFiles> touched;
      for_each_json_line(groups_file, [&](const nlohmann::json& j, std::size_t line) {
        const std::string id = dat::detail::get_string(j, line, "diff_id");
        if (j.contains("group") && !j["group"].is_null()) {
          auto g = dat::group_from(dat::detail::get_string(j, line, "group"));
          if (!g) throw dat::ParseError(line, "unknown group");
          groups[id] = *g;
        } else {
          touched.push_back({id, dat::detail::get_string_list(j, line, "touched")});
        }
      });
      if (!touched.empty()) {
        if (migrated_file.empty() || relevant_file.empty())
          throw dat::Error("touched-file groups need --migrated and --relevant");
        m.inputs.push_back(migrated_file);
        m.inputs.push_back(relevant_file);
        for (const auto& a : dat::assign_groups(touched, read_lines(migrated_file), read_lines(relevant_file)))
          groups[a.diff_id] = a.group;
      }
      std::map<std::string, const dat::DiffMeta*> meta;
      for (const auto& d : log_data.diffs) meta.emplace(d.diff_id, &d);
      for (const auto& d : r.dats) {
        auto g = groups.find(d.diff_id);
        if (g == groups.end()) continue;
        if (d.anchor_dat() <= 0) {
          ++uncovered;
          continue;
        }
        obs.push_back({d.diff_id, g->second, meta.at(d.diff_id)->files_changed, static_cast<double>(d.anchor_dat())});
      }
    }
    m.extra["strata"] = strata;

    const auto rows = dat::stratified_test(obs, strata);
    std::vector<double> control, test;
    std::size_t mixed = 0;
    for (const auto& o : obs) {
      if (o.group == dat::Group::control) control.push_back(o.dat);
      else if (o.group == dat::Group::test) test.push_back(o.dat);
      else ++mixed;
    }
    ojson strata_j = ojson::array();
    for (const auto& row : rows) strata_j.push_back(dat::to_json(row));
    ojson report{{"kind", "experiment"}, {"manifest", dat::to_json(m)}, {"strata", strata_j},
                 {"n_mixed_excluded", mixed}, {"n_uncovered_excluded", uncovered}};
    report["wasserstein_1_ms"] =
        !control.empty() && !test.empty() ? ojson(dat::wasserstein_1(control, test)) : ojson(nullptr);
    std::optional<double> delta;
    if (!control.empty() && !test.empty() && dat::mean(control) > 0) delta = dat::pct_delta_dat(control, test);
    report["pct_delta_dat"] = dat::num_or_null(delta);

    out << (format == "csv" ? csv_with_manifest(m, dat::strata_csv(rows)) : report.dump() + "\n");
    if (!rows.back().welch) {
      err << "pooled comparison is degenerate (undersized group or no variance)\n";
      return kStatsError;
    }
    return kOk;
  }
};

// ---------------------------------------------------------------- sharing

struct SharingCmd {
  std::string log;
  double trim = 0.10;
  std::string format = "jsonl";
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("sharing", "Counterfactual DAT savings of code-shared diffs");
    c->add_option("log", log, "Event log (JSONL)")->required();
    c->add_option("--trim", trim, "Trimmed-mean fraction per tail")->capture_default_str();
    c->add_option("--format", format, "Output format")->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = flags.config();
    const auto log_data = load_valid_log(log, err);
    const auto r = dat::compute_dat(log_data, cfg);
    std::map<std::string, const dat::DiffDat*> by_id;
    for (const auto& d : r.dats) by_id.emplace(d.diff_id, &d);

    std::vector<dat::DiffSample> unshared, shared;
    for (const auto& d : log_data.diffs) {
      const auto* dd = by_id.at(d.diff_id);
      if (dd->anchor_dat() <= 0) {
        err << "warning: " << d.diff_id << " has no DAT, skipped\n";
        continue;
      }
      if (d.shared) {
        shared.push_back({d, static_cast<double>(dd->anchor_dat())});
      } else if (d.platform_apps.size() == 1) {
        unshared.push_back({d, static_cast<double>(dd->anchor_dat())});
      } else {
        err << "warning: unshared " << d.diff_id << " does not target exactly one platform-app, skipped\n";
      }
    }
    const auto table = dat::build_baseline_table(unshared, trim);
    const auto savings = dat::counterfactual_savings(shared, table);

    dat::RunManifest m{"sharing", {log}, cfg, {}, trim, {}};
    if (format == "csv") {
      dat::CsvWriter w({"diff", "tercile", "counterfactual_ms", "actual_ms", "saved_ms"});
      for (const auto& s : savings.records)
        w.row({s.diff_id, std::to_string(s.tercile), dat::fmt_double(s.counterfactual), dat::fmt_double(s.actual),
               dat::fmt_double(s.saved)});
      w.row({"TOTAL", "", dat::fmt_double(savings.total_counterfactual), dat::fmt_double(savings.total_actual),
             dat::fmt_double(savings.total_saved)});
      out << csv_with_manifest(m, w.str());
      return kOk;
    }
    ojson cells = ojson::array();
    for (const auto& [key, cell] : table.cells)
      cells.push_back(ojson{{"platform", std::get<0>(key)}, {"app", std::get<1>(key)}, {"tercile", std::get<2>(key)},
                            {"trimmed_mean_ms", cell.trimmed_mean}, {"n", cell.n}});
    ojson records = ojson::array();
    for (const auto& s : savings.records)
      records.push_back(ojson{{"diff", s.diff_id}, {"tercile", s.tercile}, {"counterfactual_ms", s.counterfactual},
                              {"actual_ms", s.actual}, {"saved_ms", s.saved}});
    ojson report{{"kind", "sharing"},
                 {"manifest", dat::to_json(m)},
                 {"tercile_thresholds", ojson::array({table.thresholds.first, table.thresholds.second})},
                 {"baseline", cells},
                 {"savings", records},
                 {"total_counterfactual_ms", savings.total_counterfactual},
                 {"total_actual_ms", savings.total_actual},
                 {"total_saved_ms", savings.total_saved},
                 {"relative_improvement", dat::num_or_null(savings.relative_improvement)}};
    out << report.dump() << "\n";
    return kOk;
  }
};

// --------------------------------------------------------------- simulate

struct SimulateCmd {
  dat::SimConfig cfg;
  std::string out_prefix;
  std::string events_path;
  std::string gt_path;
  std::optional<double> effect;
  std::vector<std::string> effect_by_files;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("simulate", "Generate a synthetic log with ground truth");
    c->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    c->add_option("--developers", cfg.n_developers, "Developers")->capture_default_str();
    c->add_option("--diffs-per-dev", cfg.n_diffs_per_dev, "Diffs per developer")->capture_default_str();
    c->add_option("--session-sigma", cfg.session_log_sigma, "Lognormal sigma of session length")->capture_default_str();
    c->add_option("--untracked-fraction", cfg.untracked_tool_fraction, "Share of work in coding_related tools")
        ->capture_default_str();
    c->add_option("--interleave", cfg.interleave_probability, "Chance of switching diffs between commits")
        ->capture_default_str();
    c->add_option("--noncoding", cfg.noncoding_probability, "Chance of a non-coding session in a gap")
        ->capture_default_str();
    c->add_option("--review", cfg.review_probability, "Chance of a review after a commit")->capture_default_str();
    c->add_option("--abandoned", cfg.abandoned_session_probability, "Chance of uncommitted ide work before a unit")
        ->capture_default_str();
    c->add_option("--shared-fraction", cfg.shared_fraction, "Share of code-shared diffs")->capture_default_str();
    c->add_option("--test-fraction", cfg.effect.test_fraction, "Share of diffs labeled test")->capture_default_str();
    c->add_option("--effect", effect, "DAT multiplier for test diffs");
    c->add_option("--effect-by-files", effect_by_files, "FILES=FACTOR overrides; other sizes get 1")->delimiter(',');
    c->add_option("--out", out_prefix, "Write PREFIX.events.jsonl and PREFIX.gt.jsonl");
    c->add_option("--events", events_path, "Event log output path");
    c->add_option("--gt", gt_path, "Ground-truth output path");
  }

  int run(std::ostream& out, std::ostream&) const {
    dat::SimConfig c = cfg;
    if (effect) c.effect.factor = *effect;
    for (const auto& kv : effect_by_files) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw dat::Error("--effect-by-files expects FILES=FACTOR");
      c.effect.factor_by_files[std::stoll(kv.substr(0, eq))] = std::stod(kv.substr(eq + 1));
    }
    const auto w = dat::generate_workload(c);

    dat::RunManifest m{"simulate", {}, {}, {}, {}, c.seed};
    m.extra = ojson{{"developers", c.n_developers}, {"diffs_per_dev", c.n_diffs_per_dev},
                    {"session_log_mean", c.session_log_mean}, {"session_log_sigma", c.session_log_sigma},
                    {"untracked_tool_fraction", c.untracked_tool_fraction},
                    {"interleave_probability", c.interleave_probability},
                    {"noncoding_probability", c.noncoding_probability}, {"review_probability", c.review_probability},
                    {"abandoned_session_probability", c.abandoned_session_probability},
                    {"shared_fraction", c.shared_fraction}, {"test_fraction", c.effect.test_fraction},
                    {"effect", c.effect.factor}};
    ojson by_files = ojson::object();
    for (const auto& [f, v] : c.effect.factor_by_files) by_files[std::to_string(f)] = v;
    m.extra["effect_by_files"] = by_files;

    const std::string events = dat::to_json(m).dump() + "\n" + dat::serialize_event_log(w.log);
    const std::string gt = dat::serialize_ground_truth(w.truth, m);
    std::string ev_path = events_path, g_path = gt_path;
    if (!out_prefix.empty()) {
      if (ev_path.empty()) ev_path = out_prefix + ".events.jsonl";
      if (g_path.empty()) g_path = out_prefix + ".gt.jsonl";
    }
    write_output(ev_path, events, out);
    if (!g_path.empty()) write_output(g_path, gt, out);
    return kOk;
  }
};

// ------------------------------------------------------------------ score

struct ScoreCmd {
  std::string log;
  std::string gt_path;
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("score", "Compare computed DAT with ground truth");
    c->add_option("log", log, "Event log (JSONL)")->required();
    c->add_option("--gt", gt_path, "Ground-truth JSONL")->required();
    flags.attach(c);
  }

  static ojson report_json(const dat::AccuracyReport& a) {
    ojson worst = ojson::array();
    for (const auto& e : a.worst)
      worst.push_back(ojson{{"diff", e.diff_id}, {"computed_ms", e.computed}, {"true_ms", e.truth},
                            {"relative_error", e.relative_error}});
    return ojson{{"n_scored", a.n_scored},           {"n_zero_truth", a.n_zero_truth},
                 {"mean_relative_error", a.mean_relative_error}, {"within_5pct", a.within_5pct},
                 {"n_within_5pct", a.n_within_5pct}, {"worst", worst}};
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = flags.config();
    const auto log_data = load_valid_log(log, err);
    auto in = open_input(gt_path);
    const auto gt = dat::parse_ground_truth(in);
    const auto r = dat::compute_dat(log_data, cfg);
    dat::RunManifest m{"score", {log, gt_path}, cfg, {}, {}, {}};
    ojson report{{"kind", "accuracy"},
                 {"manifest", dat::to_json(m)},
                 {"anchor", report_json(dat::score_accuracy(r.dats, gt, true))},
                 {"precise", report_json(dat::score_accuracy(r.dats, gt, false))}};
    out << report.dump() << "\n";
    return kOk;
  }
};

// --------------------------------------------------------------- timeline

struct TimelineCmd {
  std::string log;
  std::string diff;
  std::string user;
  std::optional<Millis> from, to;
  std::size_t width = 96;
  std::string format = "text";
  std::string out_path;
  PipelineFlags flags;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("timeline", "Render raw sessions, precise and anchor attribution");
    c->add_option("log", log, "Event log (JSONL)")->required();
    auto* d = c->add_option("--diff", diff, "Diff to show (its author's timeline)");
    auto* u = c->add_option("--user", user, "User to show");
    d->excludes(u);
    c->add_option("--from", from, "Window start (ms)");
    c->add_option("--to", to, "Window end (ms)");
    c->add_option("--width", width, "Text width in cells")->capture_default_str();
    c->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "svg"}))->capture_default_str();
    c->add_option("--out", out_path, "Output file (default stdout)");
    flags.attach(c);
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = flags.config();
    const auto r = dat::compute_dat(load_valid_log(log, err), cfg);
    dat::TimelineSpec spec;
    if (!diff.empty()) spec.diff_id = diff;
    if (!user.empty()) spec.user = user;
    if (diff.empty() && user.empty()) throw dat::Error("timeline needs --diff or --user");
    spec.width = width;
    if (from || to) {
      if (!from || !to) throw dat::Error("--from and --to go together");
      spec.window = dat::Interval{*from, std::max(*from, *to)};
    }
    const auto tl = dat::build_timeline(r, spec);
    write_output(out_path, format == "svg" ? dat::render_timeline_svg(tl) : dat::render_timeline_text(tl, width), out);
    return kOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"datctl: diff authoring time from developer telemetry"};
  app.require_subcommand(1);
  ComputeCmd compute;
  ValidateCmd validate;
  SessionsCmd sessions;
  AggregateCmd aggregate;
  ExperimentCmd experiment;
  SharingCmd sharing;
  SimulateCmd simulate;
  ScoreCmd score;
  TimelineCmd timeline;
  compute.attach(app);
  validate.attach(app);
  sessions.attach(app);
  aggregate.attach(app);
  experiment.attach(app);
  sharing.attach(app);
  simulate.attach(app);
  score.attach(app);
  timeline.attach(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::vector<std::pair<std::string, std::function<int()>>> dispatch{
      {"compute", [&] { return compute.run(out, err); }},
      {"validate", [&] { return validate.run(out, err); }},
      {"sessions", [&] { return sessions.run(out, err); }},
      {"aggregate", [&] { return aggregate.run(out, err); }},
      {"experiment", [&] { return experiment.run(out, err); }},
      {"sharing", [&] { return sharing.run(out, err); }},
      {"simulate", [&] { return simulate.run(out, err); }},
      {"score", [&] { return score.run(out, err); }},
      {"timeline", [&] { return timeline.run(out, err); }},
  };
  try {
    for (const auto& [name, fn] : dispatch)
      if (app.got_subcommand(name)) return fn();
  } catch (const dat::ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const dat::ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const dat::UnknownDiffError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const dat::StatsError& e) {
    err << "statistics error: " << e.what() << "\n";
    return kStatsError;
  } catch (const dat::Error& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }
  return kParseError;
}

}  // namespace datctl
