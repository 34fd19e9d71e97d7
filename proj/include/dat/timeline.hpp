#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dat/pipeline.hpp"

namespace dat {

struct TimelineSpec {
  std::optional<std::string> diff_id;  // selects the author and the diff's extent
  std::optional<std::string> user;
  std::optional<Interval> window;
  std::size_t width = 96;  // text cells
};

class UnknownDiffError : public Error {
 public:
  using Error::Error;
};

struct TimelineItem {
  Interval span;
  char symbol = ' ';
  std::string label;  // tool class for raw cells, diff id otherwise
  bool anchor = false;
};

/// Three rows over one user's time: sessions, precise attribution, and
/// attribution with anchors.
struct Timeline {
  std::string user;
  Interval window;
  std::vector<std::pair<char, std::string>> legend;
  std::vector<TimelineItem> raw;
  std::vector<TimelineItem> precise;
  std::vector<TimelineItem> anchored;
};

inline char raw_symbol(ToolClass c) {
  switch (c) {
    case ToolClass::ide: return 'I';
    case ToolClass::coding_related: return 'C';
    case ToolClass::review: return 'R';
    case ToolClass::non_coding: return 'n';
  }
  return 'n';
}

inline Timeline build_timeline(const PipelineResult& r, const TimelineSpec& spec) {
  Timeline tl;
  const DiffDat* focus = nullptr;
  if (spec.diff_id) {
    focus = r.find(*spec.diff_id);
    if (!focus) throw UnknownDiffError("unknown diff " + *spec.diff_id);
    tl.user = focus->author;
  } else if (spec.user) {
    tl.user = *spec.user;
  } else {
    throw Error("timeline needs a diff or a user");
  }

  if (spec.window) {
    tl.window = *spec.window;
  } else {
    std::optional<Interval> extent;
    auto grow = [&](const Interval& i) {
      if (!extent) extent = i;
      extent->start = std::min(extent->start, i.start);
      extent->end = std::max(extent->end, i.end);
    };
    if (focus) {
      for (const auto& c : focus->intervals)
        if (c.user == tl.user) grow(c.span);
    } else {
      for (const auto& s : r.sessions.sessions)
        if (s.user == tl.user) grow(s.span());
    }
    tl.window = extent.value_or(Interval{0, 0});
  }

  for (const auto& s : r.sessions.sessions)
    if (s.user == tl.user && overlaps(s.span(), tl.window))
      tl.raw.push_back({s.span(), raw_symbol(s.tool_class), std::string(to_string(s.tool_class)), false});

  std::map<std::string, char> symbols;
  for (const auto& d : r.dats) {
    for (const auto& c : d.intervals) {
      if (c.user != tl.user || !overlaps(c.span, tl.window)) continue;
      symbols.emplace(d.diff_id, '*');
    }
  }
  char next = 'A';
  for (auto& [id, sym] : symbols) {
    if (next <= 'Z') sym = next++;
    tl.legend.emplace_back(sym, id);
  }
  for (const auto& d : r.dats) {
    for (const auto& c : d.intervals) {
      if (c.user != tl.user || !overlaps(c.span, tl.window)) continue;
      const char sym = symbols.at(d.diff_id);
      if (c.source == Source::anchor) {
        const char lower = sym == '*' ? '~' : static_cast<char>(sym - 'A' + 'a');
        tl.anchored.push_back({c.span, lower, d.diff_id, true});
      } else {
        tl.precise.push_back({c.span, sym, d.diff_id, false});
        tl.anchored.push_back({c.span, sym, d.diff_id, false});
      }
    }
  }
  auto by_start = [](const TimelineItem& a, const TimelineItem& b) { return a.span.start < b.span.start; };
  std::stable_sort(tl.precise.begin(), tl.precise.end(), by_start);
  std::stable_sort(tl.anchored.begin(), tl.anchored.end(), by_start);
  return tl;
}

namespace detail {

inline std::string clock_of(Millis t) {
  Millis in_day = t - floor_div(t, kDay) * kDay;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(in_day / kHour),
                static_cast<long long>(in_day % kHour / kMinute), static_cast<long long>(in_day % kMinute / kSecond));
  return buf;
}

// Each cell shows the item covering most of it.
inline std::string render_row(const std::vector<TimelineItem>& items, const Interval& window, std::size_t width,
                              Millis cell) {
  std::string row(width, ' ');
  for (std::size_t i = 0; i < width; ++i) {
    const Interval c{window.start + static_cast<Millis>(i) * cell, window.start + static_cast<Millis>(i + 1) * cell};
    Millis best = 0;
    for (const auto& it : items) {
      const Millis ov = overlap_length(it.span, intersect(c, window));
      if (ov > best) {
        best = ov;
        row[i] = it.symbol;
      }
    }
  }
  return row;
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_timeline_text(const Timeline& tl, std::size_t width = 96) {
  if (width == 0) width = 1;
  const Millis len = tl.window.length();
  const Millis cell = std::max<Millis>(1, (len + static_cast<Millis>(width) - 1) / static_cast<Millis>(width));
  std::string out = "timeline user=" + tl.user + " window=[" + std::to_string(tl.window.start) + "," +
                    std::to_string(tl.window.end) + ") cell_ms=" + std::to_string(cell) + "\n";
  out += "legend:";
  for (const auto& [sym, id] : tl.legend) out += std::string(" ") + sym + "=" + id;
  out += "  raw: I=ide C=coding_related R=review n=non_coding  anchor: lowercase\n";
  const std::string bar(width, '-');
  auto row = [&](const char* name, const std::vector<TimelineItem>& items) {
    out += name;
    out += "|";
    out += len > 0 ? detail::render_row(items, tl.window, width, cell) : std::string(width, ' ');
    out += "|\n";
  };
  row("raw     ", tl.raw);
  row("precise ", tl.precise);
  row("anchor  ", tl.anchored);
  out += "        +" + bar + "+\n";
  std::string axis = "         " + detail::clock_of(tl.window.start);
  const std::string end_label = detail::clock_of(tl.window.end);
  const std::size_t end_col = 9 + width + 1;
  if (axis.size() + 1 + end_label.size() <= end_col + 1)
    axis += std::string(end_col + 1 - axis.size() - end_label.size(), ' ');
  else
    axis += ' ';
  axis += end_label;
  out += axis + "\n";
  return out;
}

inline std::string render_timeline_svg(const Timeline& tl) {
  constexpr double kLeft = 90.0, kPlot = 900.0, kRowH = 28.0, kTop = 30.0;
  const double len = static_cast<double>(tl.window.length());
  auto x_of = [&](Millis t) {
    if (len <= 0.0) return kLeft;
    const double clamped = static_cast<double>(std::clamp(t, tl.window.start, tl.window.end) - tl.window.start);
    return kLeft + clamped / len * kPlot;
  };
  auto fill_raw = [](char sym) -> const char* {
    switch (sym) {
      case 'I': return "#1f77b4";
      case 'C': return "#ff7f0e";
      case 'R': return "#2ca02c";
      default: return "#c7c7c7";
    }
  };
  static const char* palette[] = {"#1f77b4", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22"};
  std::map<std::string, const char*> diff_color;
  std::size_t k = 0;
  for (const auto& [sym, id] : tl.legend) diff_color[id] = palette[k++ % std::size(palette)];

  const double height = kTop + 3 * kRowH + 50.0;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1010\" height=\"" + detail::fixed2(height) +
                    "\" viewBox=\"0 0 1010 " + detail::fixed2(height) + "\">\n";
  out += "<text x=\"4\" y=\"18\" font-family=\"monospace\" font-size=\"12\">user " + detail::xml_escape(tl.user) +
         " [" + std::to_string(tl.window.start) + "," + std::to_string(tl.window.end) + ")</text>\n";
  const char* names[] = {"raw", "precise", "anchor"};
  const std::vector<TimelineItem>* rows[] = {&tl.raw, &tl.precise, &tl.anchored};
  for (int r = 0; r < 3; ++r) {
    const double y = kTop + r * kRowH;
    out += "<text x=\"4\" y=\"" + detail::fixed2(y + 18) + "\" font-family=\"monospace\" font-size=\"12\">" +
           names[r] + "</text>\n";
    for (const auto& it : *rows[r]) {
      const double x0 = x_of(it.span.start), x1 = x_of(it.span.end);
      if (x1 <= x0) continue;
      const char* fill = r == 0 ? fill_raw(it.symbol) : diff_color.count(it.label) ? diff_color[it.label] : "#000000";
      out += "<rect x=\"" + detail::fixed2(x0) + "\" y=\"" + detail::fixed2(y + 4) + "\" width=\"" +
             detail::fixed2(x1 - x0) + "\" height=\"" + detail::fixed2(kRowH - 8) + "\" fill=\"" + fill + "\"";
      if (it.anchor) out += " fill-opacity=\"0.45\" stroke=\"#000000\" stroke-dasharray=\"3,2\"";
      out += "><title>" + detail::xml_escape(it.label) + "</title></rect>\n";
    }
  }
  const double axis_y = kTop + 3 * kRowH + 6;
  out += "<line x1=\"" + detail::fixed2(kLeft) + "\" y1=\"" + detail::fixed2(axis_y) + "\" x2=\"" +
         detail::fixed2(kLeft + kPlot) + "\" y2=\"" + detail::fixed2(axis_y) + "\" stroke=\"#000000\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = kLeft + kPlot * i / 4.0;
    const Millis t = tl.window.start + static_cast<Millis>(len * i / 4.0);
    out += "<line x1=\"" + detail::fixed2(x) + "\" y1=\"" + detail::fixed2(axis_y) + "\" x2=\"" + detail::fixed2(x) +
           "\" y2=\"" + detail::fixed2(axis_y + 5) + "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + detail::fixed2(x) + "\" y=\"" + detail::fixed2(axis_y + 18) +
           "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">" + detail::clock_of(t) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dat
