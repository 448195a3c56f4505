// Copyright 2026 The rankcons Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rankcons/report.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <limits>

#include "rankcons/errors.h"
#include "rankcons/logs.h"

namespace rankcons {
namespace {

constexpr std::string_view kSummaryHeader =
    "name,spec,k,c,rcs_macro,rcs_micro,so_bid,so_pctr,ece,pcoc,auc,tv_full,tv_win";
constexpr std::string_view kHistogramHeader = "bucket,lo,hi,pre_full,rank_full,pre_win,rank_win";

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto pos = text.find('\n');
    auto line = text.substr(0, pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

double parse_real(std::string_view cell, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view cell, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line) + ": bad integer '" + std::string(cell) + "'");
  }
  return v;
}

std::optional<double> parse_opt_real(std::string_view cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return parse_real(cell, line);
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header) {
  if (lines.empty() || lines.front() != header) {
    throw DataError("expected CSV header '" + std::string(header) + "'");
  }
}

// Two decimals is plenty for pixel coordinates and keeps output stable.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 60;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;
  double sx(double x) const {
    const double span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    return kLeft + (x - x_lo) / span * (kWidth - kLeft - kRight);
  }
  double sy(double y) const {
    const double span = y_hi > y_lo ? y_hi - y_lo : 1.0;
    return kHeight - kBottom - (y - y_lo) / span * (kHeight - kTop - kBottom);
  }
};

std::string svg_open(std::string_view title, const Frame& f, std::string_view x_label,
                     std::string_view y_label) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
       px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + px(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       escape_xml(title) + "</text>\n";
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + px(x0) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x1) + "\" y2=\"" + px(y0) +
       "\"/>\n";
  s += "<line x1=\"" + px(x0) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(x0) + "\" y2=\"" + px(y1) +
       "\"/>\n";
  s += "</g>\n<g font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
    s += "<text x=\"" + px(f.sx(xv)) + "\" y=\"" + px(y0 + 14) + "\" text-anchor=\"middle\">" +
         px(xv) + "</text>\n";
    s += "<text x=\"" + px(x0 - 6) + "\" y=\"" + px(f.sy(yv) + 3) + "\" text-anchor=\"end\">" +
         px(yv) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" + px(kHeight - 12) +
       "\" text-anchor=\"middle\" font-size=\"12\">" + escape_xml(x_label) + "</text>\n";
  s += "<text x=\"14\" y=\"" + px((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-size=\"12\" " +
       "transform=\"rotate(-90 14 " + px((y0 + y1) / 2) + ")\">" + escape_xml(y_label) +
       "</text>\n";
  return s;
}

std::string legend_entry(std::size_t i, std::string_view name) {
  const double y = kTop + 10 + 16 * static_cast<double>(i);
  const double x = kWidth - kRight + 12;
  return "<line x1=\"" + px(x) + "\" y1=\"" + px(y) + "\" x2=\"" + px(x + 18) + "\" y2=\"" +
         px(y) + "\" stroke=\"" + kPalette[i % std::size(kPalette)] +
         "\" stroke-width=\"2\"/>\n<text x=\"" + px(x + 24) + "\" y=\"" + px(y + 4) +
         "\" font-size=\"11\">" + escape_xml(name) + "</text>\n";
}

std::string polyline(std::size_t i, const std::vector<std::pair<double, double>>& pts,
                     const Frame& f) {
  std::string s = "<polyline fill=\"none\" stroke=\"" +
                  std::string(kPalette[i % std::size(kPalette)]) +
                  "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j) s += ' ';
    s += px(f.sx(pts[j].first)) + "," + px(f.sy(pts[j].second));
  }
  return s + "\"/>\n";
}

}  // namespace

std::string rcs_grid_csv(const PipelineReport& report) {
  std::string s = "k,c,macro,micro,requests\n";
  for (const auto& r : report.rcs_grid) {
    s += std::to_string(r.k) + "," + std::to_string(r.c) + "," + format_real(r.macro) + "," +
         format_real(r.micro) + "," + std::to_string(r.requests()) + "\n";
  }
  return s;
}

std::string single_objective_csv(const PipelineReport& report) {
  std::string s = "objective,k,c,macro,micro\n";
  for (const auto& [objective, r] : report.single_objective) {
    s += objective + "," + std::to_string(r.k) + "," + std::to_string(r.c) + "," +
         format_real(r.macro) + "," + format_real(r.micro) + "\n";
  }
  return s;
}

std::string calibration_csv(const CalibrationReport& report) {
  std::string s = "bucket,lo,hi,count,mean_pred,mean_ref\n";
  const double n = static_cast<double>(report.buckets.size());
  for (std::size_t b = 0; b < report.buckets.size(); ++b) {
    const auto& bk = report.buckets[b];
    s += std::to_string(b) + "," + format_real(b / n) + "," + format_real((b + 1) / n) + "," +
         std::to_string(bk.count) + "," + format_real(bk.mean_pred) + "," +
         format_real(bk.mean_ref) + "\n";
  }
  return s;
}

std::string histograms_csv(const std::optional<StageHistograms>& h, std::size_t buckets) {
  std::string s = std::string(kHistogramHeader) + "\n";
  if (!h) return s;
  const double n = static_cast<double>(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    s += std::to_string(b) + "," + format_real(b / n) + "," + format_real((b + 1) / n) + "," +
         format_real(h->pre_full.at(b)) + "," + format_real(h->rank_full.at(b)) + "," +
         format_real(h->pre_win.at(b)) + "," + format_real(h->rank_win.at(b)) + "\n";
  }
  return s;
}

std::string diagnosis_csv(const DiagnosisTable& table) {
  std::string s = "slot,replaced,replacement,rcs_before,rcs_after,delta\n";
  for (const auto& row : table) {
    s += row.slot + "," + row.replaced + "," + row.replacement + "," +
         format_real(row.rcs_before) + "," + format_real(row.rcs_after) + "," +
         format_real(row.delta()) + "\n";
  }
  return s;
}

std::string loss_trace_csv(const std::vector<double>& trace) {
  std::string s = "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    s += std::to_string(e) + "," + format_real(trace[e]) + "\n";
  }
  return s;
}

SummaryRecord summarize(const PipelineReport& report) {
  SummaryRecord r;
  r.name = report.name;
  r.spec = report.spec;
  r.k = report.rcs.k;
  r.c = report.rcs.c;
  r.rcs_macro = report.rcs.macro;
  r.rcs_micro = report.rcs.micro;
  for (const auto& [objective, so] : report.single_objective) {
    if (objective == kBidObjective) r.so_bid = so.macro;
    if (objective == kCtrObjective) r.so_pctr = so.macro;
  }
  if (report.calibration) {
    r.ece = report.calibration->ece;
    r.pcoc = report.calibration->pcoc;
  }
  r.auc = report.auc;
  if (report.histograms) {
    r.tv_full = report.histograms->tv_full;
    r.tv_win = report.histograms->tv_win;
  }
  return r;
}

std::string summary_csv(const SummaryRecord& r) {
  return std::string(kSummaryHeader) + "\n" + r.name + "," + r.spec + "," +
         std::to_string(r.k) + "," + std::to_string(r.c) + "," + format_real(r.rcs_macro) + "," +
         format_real(r.rcs_micro) + "," + opt_real(r.so_bid) + "," + opt_real(r.so_pctr) + "," +
         opt_real(r.ece) + "," + opt_real(r.pcoc) + "," + opt_real(r.auc) + "," +
         opt_real(r.tv_full) + "," + opt_real(r.tv_win) + "\n";
}

SummaryRecord parse_summary_csv(std::string_view text) {
  const auto lines = lines_of(text);
  expect_header(lines, kSummaryHeader);
  if (lines.size() != 2) throw DataError("summary CSV must have exactly one data row");
  const auto cells = split_line(lines[1]);
  if (cells.size() != 13) throw DataError("line 2: expected 13 fields");
  SummaryRecord r;
  r.name = cells[0];
  r.spec = cells[1];
  r.k = parse_size(cells[2], 2);
  r.c = parse_size(cells[3], 2);
  r.rcs_macro = parse_real(cells[4], 2);
  r.rcs_micro = parse_real(cells[5], 2);
  r.so_bid = parse_opt_real(cells[6], 2);
  r.so_pctr = parse_opt_real(cells[7], 2);
  r.ece = parse_opt_real(cells[8], 2);
  r.pcoc = parse_opt_real(cells[9], 2);
  r.auc = parse_opt_real(cells[10], 2);
  r.tv_full = parse_opt_real(cells[11], 2);
  r.tv_win = parse_opt_real(cells[12], 2);
  return r;
}

std::string summary_table_csv(const std::vector<SummaryRecord>& records, RcsMode mode) {
  std::string s = "tier,single_objective_rcs,rcs,ece,pcoc,auc\n";
  for (const auto& r : records) {
    s += r.name + "," + opt_real(r.so_pctr) + "," +
         format_real(mode == RcsMode::kMacro ? r.rcs_macro : r.rcs_micro) + "," +
         opt_real(r.ece) + "," + opt_real(r.pcoc) + "," + opt_real(r.auc) + "\n";
  }
  return s;
}

HistogramTable parse_histograms_csv(std::string_view text) {
  const auto lines = lines_of(text);
  HistogramTable table;
  table.columns = {"pre_full", "rank_full", "pre_win", "rank_win"};
  table.values.assign(4, {});
  if (lines.empty()) return table;
  expect_header(lines, kHistogramHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_line(lines[i]);
    if (cells.size() != 7) throw DataError("line " + std::to_string(i + 1) + ": expected 7 fields");
    for (std::size_t j = 0; j < 4; ++j) table.values[j].push_back(parse_real(cells[3 + j], i + 1));
  }
  return table;
}

std::vector<GridPoint> parse_rcs_grid_csv(std::string_view text) {
  const auto lines = lines_of(text);
  expect_header(lines, "k,c,macro,micro,requests");
  std::vector<GridPoint> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_line(lines[i]);
    if (cells.size() != 5) throw DataError("line " + std::to_string(i + 1) + ": expected 5 fields");
    out.push_back({parse_size(cells[0], i + 1), parse_size(cells[1], i + 1),
                   parse_real(cells[2], i + 1), parse_real(cells[3], i + 1)});
  }
  return out;
}

std::string histogram_svg(std::string_view title, const HistogramTable& table) {
  double y_hi = 0.0;
  for (const auto& col : table.values) {
    for (double v : col) y_hi = std::max(y_hi, v);
  }
  if (y_hi <= 0.0) y_hi = 1.0;
  const Frame f{0.0, 1.0, 0.0, y_hi};
  std::string s = svg_open(title, f, "score", "proportion");
  for (std::size_t i = 0; i < table.values.size(); ++i) {
    const auto& col = table.values[i];
    if (col.empty()) continue;
    // Step outline: each bucket is a flat segment over its interval.
    std::vector<std::pair<double, double>> pts;
    const double n = static_cast<double>(col.size());
    for (std::size_t b = 0; b < col.size(); ++b) {
      pts.emplace_back(b / n, col[b]);
      pts.emplace_back((b + 1) / n, col[b]);
    }
    s += polyline(i, pts, f);
    s += legend_entry(i, table.columns.at(i));
  }
  return s + "</svg>\n";
}

std::string trend_svg(std::string_view title, std::string_view x_label,
                      const std::vector<TrendSeries>& series) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  for (const auto& sr : series) {
    for (const auto& [x, _] : sr.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
    }
  }
  if (!(x_lo <= x_hi)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (x_lo == x_hi) x_hi = x_lo + 1.0;
  const Frame f{x_lo, x_hi, 0.0, 1.0};
  std::string s = svg_open(title, f, x_label, "RCS");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i].points.empty()) s += polyline(i, series[i].points, f);
    s += legend_entry(i, series[i].name);
  }
  return s + "</svg>\n";
}

}  // namespace rankcons
