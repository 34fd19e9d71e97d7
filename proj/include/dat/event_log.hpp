#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "dat/types.hpp"

namespace dat {

/// Malformed JSON or a record that does not fit the schema. Exit code 1.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A well-formed record that violates a data invariant. Exit code 2.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Violation {
  std::string code;
  std::string detail;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

using json = nlohmann::json;

inline const json& field(const json& obj, std::size_t line, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + name + "'");
  return *it;
}

inline std::string get_string(const json& obj, std::size_t line, const char* name) {
  const auto& v = field(obj, line, name);
  if (!v.is_string()) throw ParseError(line, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

inline std::string get_string_or(const json& obj, std::size_t line, const char* name,
                                 std::string_view fallback) {
  if (!obj.contains(name)) return std::string(fallback);
  return get_string(obj, line, name);
}

inline std::int64_t get_int(const json& obj, std::size_t line, const char* name) {
  const auto& v = field(obj, line, name);
  if (!v.is_number_integer()) throw ParseError(line, std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

inline bool get_bool_or(const json& obj, std::size_t line, const char* name, bool fallback) {
  auto it = obj.find(name);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ParseError(line, std::string("field '") + name + "' must be a boolean");
  return it->get<bool>();
}

inline std::vector<std::string> get_string_list(const json& obj, std::size_t line, const char* name) {
  const auto& v = field(obj, line, name);
  if (!v.is_array()) throw ParseError(line, std::string("field '") + name + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ParseError(line, std::string("field '") + name + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

template <class T, class Key>
void stable_sort_by(std::vector<T>& v, Key key) {
  std::stable_sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
}

inline void sort_streams(EventLog& log) {
  stable_sort_by(log.activities, [](const ActivityEvent& e) { return e.start; });
  stable_sort_by(log.vcs_events, [](const VcsEvent& e) { return e.ts; });
  stable_sort_by(log.reviews, [](const ReviewEvent& e) { return e.start; });
  // Unlanded diffs sort last.
  stable_sort_by(log.diffs, [](const DiffMeta& d) {
    return std::pair{!d.landed_ts.has_value(), d.landed_ts.value_or(0)};
  });
}

}  // namespace detail

/// Parses line-delimited JSON telemetry. Blank lines and "manifest" records
/// are skipped.
inline EventLog parse_event_log(std::istream& in) {
  using detail::json;
  EventLog log;
  std::unordered_map<std::string, std::string> commit_owner;
  std::unordered_map<std::string, std::size_t> diff_lines;
  std::string text;
  std::size_t line_no = 0;

  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "record must be a JSON object");
    const std::string kind = detail::get_string(obj, line_no, "kind");

    if (kind == "activity") {
      ActivityEvent e;
      e.user = detail::get_string(obj, line_no, "user");
      e.tool = detail::get_string(obj, line_no, "tool");
      e.workspace = detail::get_string_or(obj, line_no, "workspace", kDefaultWorkspace);
      e.start = detail::get_int(obj, line_no, "start");
      e.end = detail::get_int(obj, line_no, "end");
      if (e.end <= e.start) throw ValidationError(line_no, "activity interval has end <= start");
      log.activities.push_back(std::move(e));
    } else if (kind == "vcs") {
      VcsEvent e;
      e.user = detail::get_string(obj, line_no, "user");
      e.workspace = detail::get_string_or(obj, line_no, "workspace", kDefaultWorkspace);
      auto op = vcs_op_from(detail::get_string(obj, line_no, "op"));
      if (!op) throw ParseError(line_no, "unknown vcs op");
      e.op = *op;
      e.commit_id = detail::get_string(obj, line_no, "commit");
      e.ts = detail::get_int(obj, line_no, "ts");
      e.automatic = detail::get_bool_or(obj, line_no, "auto", false);
      if (e.commit_id.empty()) throw ValidationError(line_no, "empty commit id");
      if (e.automatic && e.op != VcsOp::checkout)
        throw ValidationError(line_no, "auto flag is only valid on checkouts");
      log.vcs_events.push_back(std::move(e));
    } else if (kind == "review") {
      ReviewEvent e;
      e.user = detail::get_string(obj, line_no, "user");
      e.diff_id = detail::get_string(obj, line_no, "diff");
      e.start = detail::get_int(obj, line_no, "start");
      e.end = detail::get_int(obj, line_no, "end");
      if (e.end <= e.start) throw ValidationError(line_no, "review interval has end <= start");
      log.reviews.push_back(std::move(e));
    } else if (kind == "diff") {
      DiffMeta d;
      d.diff_id = detail::get_string(obj, line_no, "diff");
      d.author = detail::get_string(obj, line_no, "author");
      d.commit_ids = detail::get_string_list(obj, line_no, "commits");
      d.files_changed = detail::get_int(obj, line_no, "files_changed");
      d.loc = detail::get_int(obj, line_no, "loc");
      d.shared = detail::get_bool_or(obj, line_no, "shared", false);
      if (obj.contains("platform_apps")) {
        const auto& pa = obj["platform_apps"];
        if (!pa.is_array()) throw ParseError(line_no, "field 'platform_apps' must be an array");
        for (const auto& p : pa) {
          if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
            throw ParseError(line_no, "platform_apps entries must be [platform, app] pairs");
          d.platform_apps.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
        }
      }
      if (obj.contains("landed_ts") && !obj["landed_ts"].is_null())
        d.landed_ts = detail::get_int(obj, line_no, "landed_ts");
      if (d.files_changed < 0 || d.loc < 0)
        throw ValidationError(line_no, "files_changed and loc must be nonnegative");
      if (d.commit_ids.empty()) throw ValidationError(line_no, "diff has no commits");
      if (d.shared && d.platform_apps.empty())
        throw ValidationError(line_no, "shared diff without platform_apps");
      if (!diff_lines.emplace(d.diff_id, line_no).second)
        throw ValidationError(line_no, "duplicate diff id " + d.diff_id);
      for (const auto& c : d.commit_ids) {
        auto [it, inserted] = commit_owner.emplace(c, d.diff_id);
        if (!inserted && it->second != d.diff_id)
          throw ValidationError(line_no, "duplicate commit membership: " + c + " in " +
                                             it->second + " and " + d.diff_id);
      }
      log.diffs.push_back(std::move(d));
    } else if (kind == "tool") {
      const std::string tool = detail::get_string(obj, line_no, "tool");
      auto cls = tool_class_from(detail::get_string(obj, line_no, "class"));
      if (!cls) throw ParseError(line_no, "unknown tool class");
      if (!log.catalog.add(tool, *cls))
        throw ValidationError(line_no, "tool " + tool + " declared with two classes");
    } else if (kind == "manifest") {
      continue;
    } else {
      throw ParseError(line_no, "unknown record kind '" + kind + "'");
    }
  }
  detail::sort_streams(log);
  return log;
}

inline EventLog parse_event_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_event_log(in);
}

inline std::string serialize_event_log(const EventLog& log) {
  using ojson = nlohmann::ordered_json;
  std::string out;
  auto emit = [&out](const ojson& j) { out += j.dump(); out += '\n'; };

  for (const auto& [tool, cls] : log.catalog.entries())
    emit(ojson{{"kind", "tool"}, {"tool", tool}, {"class", to_string(cls)}});
  for (const auto& e : log.activities)
    emit(ojson{{"kind", "activity"}, {"user", e.user}, {"tool", e.tool},
               {"workspace", e.workspace}, {"start", e.start}, {"end", e.end}});
  for (const auto& e : log.vcs_events)
    emit(ojson{{"kind", "vcs"}, {"user", e.user}, {"workspace", e.workspace},
               {"op", to_string(e.op)}, {"commit", e.commit_id}, {"ts", e.ts},
               {"auto", e.automatic}});
  for (const auto& e : log.reviews)
    emit(ojson{{"kind", "review"}, {"user", e.user}, {"diff", e.diff_id},
               {"start", e.start}, {"end", e.end}});
  for (const auto& d : log.diffs) {
    ojson pa = ojson::array();
    for (const auto& [p, a] : d.platform_apps) pa.push_back(ojson::array({p, a}));
    emit(ojson{{"kind", "diff"}, {"diff", d.diff_id}, {"author", d.author},
               {"commits", d.commit_ids}, {"files_changed", d.files_changed},
               {"loc", d.loc}, {"shared", d.shared}, {"platform_apps", pa},
               {"landed_ts", d.landed_ts ? ojson(*d.landed_ts) : ojson(nullptr)}});
  }
  return out;
}

/// Lists EventLog invariant violations. Never throws.
inline ValidationReport validate_event_log(const EventLog& log) {
  ValidationReport report;

  std::map<std::string, bool> unknown;
  for (const auto& a : log.activities)
    if (!log.catalog.contains(a.tool)) unknown.emplace(a.tool, true);
  for (const auto& [tool, _] : unknown)
    report.violations.push_back({"unknown_tool", "activity references unknown tool " + tool});

  std::map<std::string, std::string> owner;
  for (const auto& d : log.diffs) {
    for (const auto& c : d.commit_ids) {
      auto [it, inserted] = owner.emplace(c, d.diff_id);
      if (!inserted && it->second != d.diff_id)
        report.violations.push_back({"duplicate_commit_membership",
                                     "duplicate commit membership: " + c + " in " +
                                         it->second + " and " + d.diff_id});
    }
  }

  // Same user, tool and workspace must not report overlapping activity.
  std::map<std::tuple<std::string, std::string, std::string>, Millis> last_end;
  for (const auto& a : log.activities) {
    auto key = std::tuple{a.user, a.tool, a.workspace};
    auto it = last_end.find(key);
    if (it != last_end.end() && a.start < it->second) {
      report.violations.push_back({"overlapping_activity",
                                   "overlapping activity for user " + a.user + " in " +
                                       a.tool + " at " + std::to_string(a.start)});
    }
    if (it == last_end.end()) last_end.emplace(key, a.end);
    else it->second = std::max(it->second, a.end);
  }
  return report;
}

}  // namespace dat
