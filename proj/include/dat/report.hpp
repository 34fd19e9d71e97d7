#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dat/event_log.hpp"
#include "dat/experiment.hpp"
#include "dat/metrics.hpp"
#include "dat/pipeline.hpp"
#include "dat/simulator.hpp"

namespace dat {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// Inputs and effective parameters of a run; embedded in every output file.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<PipelineConfig> pipeline;
  std::optional<double> winsorize_p;
  std::optional<double> trim;
  std::optional<std::uint64_t> seed;
  ojson extra = ojson::object();
};

inline ojson to_json(const RunManifest& m) {
  ojson cfg = ojson::object();
  if (m.pipeline) {
    cfg["merge_gap_ms"] = m.pipeline->session.merge_gap;
    cfg["idle_threshold_ms"] = m.pipeline->session.idle_threshold;
    cfg["anchor_max_gap_ms"] = m.pipeline->anchor.max_gap;
    cfg["anchor_max_total_ms"] = m.pipeline->anchor.max_total;
  }
  if (m.winsorize_p) cfg["winsorize_p"] = *m.winsorize_p;
  if (m.trim) cfg["trim"] = *m.trim;
  for (const auto& [k, v] : m.extra.items()) cfg[k] = v;
  ojson j{{"kind", "manifest"}, {"tool", "datctl"}, {"version", kVersion}, {"command", m.command},
          {"inputs", m.inputs}, {"config", cfg}};
  if (m.seed) j["seed"] = *m.seed;
  return j;
}

inline ojson to_json(const DiffDat& d) {
  ojson intervals = ojson::array();
  for (const auto& c : d.intervals)
    intervals.push_back(ojson{{"user", c.user}, {"tool", c.tool}, {"workspace", c.workspace},
                              {"start", c.span.start}, {"end", c.span.end},
                              {"source", to_string(c.source)}, {"commit", c.commit_id}});
  ojson reviewers = ojson::object();
  for (const auto& [u, t] : d.reviewer_precise) reviewers[u] = t;
  ojson contributors = ojson::object();
  for (const auto& [u, t] : d.contributor_precise) contributors[u] = t;
  return ojson{{"kind", "diff_dat"},
               {"diff", d.diff_id},
               {"author", d.author},
               {"author_precise_ms", d.author_precise},
               {"anchor_extra_ms", d.anchor_extra},
               {"anchor_dat_ms", d.anchor_dat()},
               {"reviewer_precise_ms", reviewers},
               {"contributor_precise_ms", contributors},
               {"intervals", intervals}};
}

inline DiffDat diff_dat_from_json(const nlohmann::json& j, std::size_t line) {
  DiffDat d;
  d.diff_id = detail::get_string(j, line, "diff");
  d.author = detail::get_string(j, line, "author");
  d.author_precise = detail::get_int(j, line, "author_precise_ms");
  d.anchor_extra = detail::get_int(j, line, "anchor_extra_ms");
  auto read_map = [&](const char* name, std::map<std::string, Millis>& out) {
    if (!j.contains(name)) return;
    const auto& m = j[name];
    if (!m.is_object()) throw ParseError(line, std::string("field '") + name + "' must be an object");
    for (const auto& [k, v] : m.items()) {
      if (!v.is_number_integer()) throw ParseError(line, std::string("field '") + name + "' must map to integers");
      out[k] = v.get<Millis>();
    }
  };
  read_map("reviewer_precise_ms", d.reviewer_precise);
  read_map("contributor_precise_ms", d.contributor_precise);
  for (const auto& c : detail::field(j, line, "intervals")) {
    Contribution k;
    k.user = detail::get_string(c, line, "user");
    k.tool = detail::get_string_or(c, line, "tool", "");
    k.workspace = detail::get_string_or(c, line, "workspace", "");
    k.span = {detail::get_int(c, line, "start"), detail::get_int(c, line, "end")};
    const std::string src = detail::get_string(c, line, "source");
    if (src == "precise") k.source = Source::precise;
    else if (src == "review") k.source = Source::review;
    else if (src == "anchor") k.source = Source::anchor;
    else throw ParseError(line, "unknown interval source '" + src + "'");
    k.commit_id = detail::get_string_or(c, line, "commit", "");
    d.intervals.push_back(std::move(k));
  }
  return d;
}

/// Reads a DAT results file (manifest lines are skipped).
inline std::vector<DiffDat> parse_dat_results(std::istream& in) {
  std::vector<DiffDat> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "record must be a JSON object");
    const std::string kind = detail::get_string(j, line, "kind");
    if (kind == "manifest") continue;
    if (kind != "diff_dat") throw ParseError(line, "unknown record kind '" + kind + "'");
    out.push_back(diff_dat_from_json(j, line));
  }
  return out;
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Shortest round-trip decimal form, so reports are byte-stable. Integral
/// values (durations in ms) print without exponent.
inline std::string fmt_double(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 1e15)
    return std::to_string(static_cast<long long>(v));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw Error("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(width_));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ += ',';
      out_ += csv_field(fields[i]);
    }
    out_ += "\r\n";
  }
  const std::string& str() const { return out_; }
  std::size_t width() const { return width_; }

 private:
  std::size_t width_;
  std::string out_;
};

inline std::string opt(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

inline std::string dat_csv(const std::vector<DiffDat>& dats) {
  CsvWriter w({"diff", "author", "author_precise_ms", "anchor_extra_ms", "anchor_dat_ms", "reviewer_ms",
               "contributor_ms", "n_intervals"});
  for (const auto& d : dats) {
    Millis reviewer = 0, contributor = 0;
    for (const auto& [_, t] : d.reviewer_precise) reviewer += t;
    for (const auto& [_, t] : d.contributor_precise) contributor += t;
    w.row({d.diff_id, d.author, std::to_string(d.author_precise), std::to_string(d.anchor_extra),
           std::to_string(d.anchor_dat()), std::to_string(reviewer), std::to_string(contributor),
           std::to_string(d.intervals.size())});
  }
  return w.str();
}

inline std::string tsd_csv(const std::vector<TsdRecord>& recs) {
  CsvWriter w({"user", "window_start", "window_end", "total_coding_ms", "diffs_published", "tsd_ms"});
  for (const auto& r : recs)
    w.row({r.user, std::to_string(r.window.start), std::to_string(r.window.end),
           std::to_string(r.total_coding_time), std::to_string(r.diffs_published), opt(r.tsd)});
  return w.str();
}

inline std::string cgt_csv(const std::vector<CgtRecord>& recs) {
  CsvWriter w({"diff", "coding_start", "landed", "cgt_ms"});
  for (const auto& r : recs)
    w.row({r.diff_id, std::to_string(r.coding_start), std::to_string(r.landed), std::to_string(r.cgt)});
  return w.str();
}

inline std::string trend_csv(const std::vector<TrendPoint>& pts) {
  CsvWriter w({"bucket_start", "n", "winsorized_mean_ms"});
  for (const auto& p : pts) w.row({std::to_string(p.bucket_start), std::to_string(p.n), opt(p.winsorized_mean)});
  return w.str();
}

inline std::string strata_csv(const std::vector<StratumResult>& rows) {
  CsvWriter w({"stratum", "n_control", "n_test", "control_test_ratio", "mean_control_ms", "mean_test_ms",
               "pct_saved", "t", "df", "p"});
  for (const auto& r : rows) {
    std::optional<double> ratio;
    if (r.n_test > 0) ratio = static_cast<double>(r.n_control) / static_cast<double>(r.n_test);
    w.row({r.stratum, std::to_string(r.n_control), std::to_string(r.n_test), opt(ratio), opt(r.mean_control),
           opt(r.mean_test), opt(r.pct_saved), r.welch ? fmt_double(r.welch->t) : "",
           r.welch ? fmt_double(r.welch->df) : "", r.welch ? fmt_double(r.welch->p) : ""});
  }
  return w.str();
}

inline ojson num_or_null(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline ojson to_json(const StratumResult& r) {
  ojson j{{"stratum", r.stratum}, {"n_control", r.n_control}, {"n_test", r.n_test},
          {"mean_control_ms", num_or_null(r.mean_control)}, {"mean_test_ms", num_or_null(r.mean_test)},
          {"pct_saved", num_or_null(r.pct_saved)}};
  if (r.welch) {
    j["t"] = r.welch->t;
    j["df"] = r.welch->df;
    j["p"] = r.welch->p;
  } else {
    j["t"] = nullptr;
    j["df"] = nullptr;
    j["p"] = nullptr;
  }
  return j;
}

inline ojson to_json(const GroundTruthDiff& g) {
  ojson iv = ojson::array();
  for (const auto& i : g.intervals) iv.push_back(ojson::array({i.start, i.end}));
  ojson rev = ojson::object();
  for (const auto& [u, t] : g.reviewer) rev[u] = t;
  return ojson{{"diff_id", g.diff_id}, {"author", g.author}, {"true_duration_ms", g.true_duration},
               {"intervals", iv}, {"group", g.group ? ojson(to_string(*g.group)) : ojson(nullptr)},
               {"files_changed", g.files_changed}, {"reviewer_ms", rev}};
}

inline std::string serialize_ground_truth(const GroundTruth& gt, const std::optional<RunManifest>& manifest = {}) {
  std::string out;
  if (manifest) out += to_json(*manifest).dump() + "\n";
  for (const auto& g : gt.diffs) out += to_json(g).dump() + "\n";
  return out;
}

inline GroundTruth parse_ground_truth(std::istream& in) {
  GroundTruth gt;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "record must be a JSON object");
    if (j.contains("kind") && j["kind"] == "manifest") continue;
    GroundTruthDiff g;
    g.diff_id = detail::get_string(j, line, "diff_id");
    g.author = detail::get_string_or(j, line, "author", "");
    g.true_duration = detail::get_int(j, line, "true_duration_ms");
    if (j.contains("intervals")) {
      for (const auto& iv : j["intervals"]) {
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number_integer() || !iv[1].is_number_integer())
          throw ParseError(line, "intervals must be [start, end] integer pairs");
        g.intervals.push_back({iv[0].get<Millis>(), iv[1].get<Millis>()});
      }
    }
    if (j.contains("group") && !j["group"].is_null()) {
      auto grp = group_from(detail::get_string(j, line, "group"));
      if (!grp) throw ParseError(line, "unknown group");
      g.group = grp;
    }
    if (j.contains("files_changed")) g.files_changed = detail::get_int(j, line, "files_changed");
    if (j.contains("reviewer_ms"))
      for (const auto& [u, t] : j["reviewer_ms"].items()) g.reviewer[u] = t.get<Millis>();
    gt.diffs.push_back(std::move(g));
  }
  std::sort(gt.diffs.begin(), gt.diffs.end(),
            [](const GroundTruthDiff& a, const GroundTruthDiff& b) { return a.diff_id < b.diff_id; });
  return gt;
}

}  // namespace dat
