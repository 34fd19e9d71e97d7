#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dat/interval.hpp"

namespace dat {

enum class ToolClass { ide, coding_related, review, non_coding };

enum class VcsOp { commit, amend, checkout };

inline std::string_view to_string(ToolClass c) {
  switch (c) {
    case ToolClass::ide: return "ide";
    case ToolClass::coding_related: return "coding_related";
    case ToolClass::review: return "review";
    case ToolClass::non_coding: return "non_coding";
  }
  return "non_coding";
}

inline std::optional<ToolClass> tool_class_from(std::string_view s) {
  if (s == "ide") return ToolClass::ide;
  if (s == "coding_related") return ToolClass::coding_related;
  if (s == "review") return ToolClass::review;
  if (s == "non_coding") return ToolClass::non_coding;
  return std::nullopt;
}

inline std::string_view to_string(VcsOp op) {
  switch (op) {
    case VcsOp::commit: return "commit";
    case VcsOp::amend: return "amend";
    case VcsOp::checkout: return "checkout";
  }
  return "commit";
}

inline std::optional<VcsOp> vcs_op_from(std::string_view s) {
  if (s == "commit") return VcsOp::commit;
  if (s == "amend") return VcsOp::amend;
  if (s == "checkout") return VcsOp::checkout;
  return std::nullopt;
}

/// Tools whose time counts as coding time (the TSD basis).
constexpr bool is_coding(ToolClass c) {
  return c == ToolClass::ide || c == ToolClass::coding_related;
}

inline constexpr std::string_view kDefaultWorkspace = "default";

struct ActivityEvent {
  std::string user;
  std::string tool;
  std::string workspace{kDefaultWorkspace};
  Millis start = 0;
  Millis end = 0;

  Interval span() const { return {start, end}; }
  friend bool operator==(const ActivityEvent&, const ActivityEvent&) = default;
};

struct VcsEvent {
  std::string user;
  std::string workspace{kDefaultWorkspace};
  VcsOp op = VcsOp::commit;
  std::string commit_id;
  Millis ts = 0;
  bool automatic = false;  // checkout fired by the IDE on open

  bool creates_commit() const { return op == VcsOp::commit || op == VcsOp::amend; }
  friend bool operator==(const VcsEvent&, const VcsEvent&) = default;
};

struct ReviewEvent {
  std::string user;
  std::string diff_id;
  Millis start = 0;
  Millis end = 0;

  Interval span() const { return {start, end}; }
  friend bool operator==(const ReviewEvent&, const ReviewEvent&) = default;
};

using PlatformApp = std::pair<std::string, std::string>;

struct DiffMeta {
  std::string diff_id;
  std::string author;
  std::vector<std::string> commit_ids;
  std::int64_t files_changed = 0;
  std::int64_t loc = 0;
  bool shared = false;
  std::vector<PlatformApp> platform_apps;
  std::optional<Millis> landed_ts;

  friend bool operator==(const DiffMeta&, const DiffMeta&) = default;
};

class ToolCatalog {
 public:
  /// Returns false when the tool is already registered with a different class.
  bool add(const std::string& tool, ToolClass cls) {
    auto [it, inserted] = classes_.emplace(tool, cls);
    return inserted || it->second == cls;
  }

  std::optional<ToolClass> find(const std::string& tool) const {
    auto it = classes_.find(tool);
    if (it == classes_.end()) return std::nullopt;
    return it->second;
  }

  /// Unknown tools are treated as non-coding.
  ToolClass classify(const std::string& tool) const {
    return find(tool).value_or(ToolClass::non_coding);
  }

  bool contains(const std::string& tool) const { return classes_.contains(tool); }
  const std::map<std::string, ToolClass>& entries() const { return classes_; }
  bool empty() const { return classes_.empty(); }

  friend bool operator==(const ToolCatalog&, const ToolCatalog&) = default;

 private:
  std::map<std::string, ToolClass> classes_;
};

/// Immutable-by-convention ingested telemetry. Each stream is sorted by its
/// primary timestamp with input order as tiebreak.
struct EventLog {
  std::vector<ActivityEvent> activities;
  std::vector<VcsEvent> vcs_events;
  std::vector<ReviewEvent> reviews;
  std::vector<DiffMeta> diffs;
  ToolCatalog catalog;

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dat
