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

#ifndef RANKCONS_REPORT_H_
#define RANKCONS_REPORT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankcons/experiment.h"
#include "rankcons/metrics.h"

namespace rankcons {

// CSV emitters. Reals use 17 significant digits; files end with LF.

std::string rcs_grid_csv(const PipelineReport& report);           // k,c,macro,micro,requests
std::string single_objective_csv(const PipelineReport& report);   // objective,k,c,macro,micro
std::string calibration_csv(const CalibrationReport& report);     // bucket,lo,hi,count,mean_pred,mean_ref
std::string histograms_csv(const std::optional<StageHistograms>& h, std::size_t buckets);
std::string diagnosis_csv(const DiagnosisTable& table);
std::string loss_trace_csv(const std::vector<double>& trace);     // epoch,loss

/// One-row machine-readable summary of a pipeline evaluation.
struct SummaryRecord {
  std::string name;
  std::string spec;
  std::size_t k = 0;
  std::size_t c = 0;
  double rcs_macro = 0.0;
  double rcs_micro = 0.0;
  std::optional<double> so_bid;
  std::optional<double> so_pctr;
  std::optional<double> ece;
  std::optional<double> pcoc;
  std::optional<double> auc;
  std::optional<double> tv_full;
  std::optional<double> tv_win;

  bool operator==(const SummaryRecord&) const = default;
};

SummaryRecord summarize(const PipelineReport& report);
std::string summary_csv(const SummaryRecord& record);
/// Throws DataError on a malformed file.
SummaryRecord parse_summary_csv(std::string_view text);

/// tier,single_objective_rcs,rcs,ece,pcoc,auc with one row per record, in the given order.
std::string summary_table_csv(const std::vector<SummaryRecord>& records, RcsMode mode);

struct HistogramTable {
  std::vector<std::string> columns;         // series names
  std::vector<std::vector<double>> values;  // values[series][bucket]
};

/// Header-only or empty input gives an empty table with the standard columns.
HistogramTable parse_histograms_csv(std::string_view text);

struct GridPoint {
  std::size_t k = 0;
  std::size_t c = 0;
  double macro = 0.0;
  double micro = 0.0;
};

std::vector<GridPoint> parse_rcs_grid_csv(std::string_view text);

struct TrendSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

/// Score-distribution plot over [0, 1). An empty table draws the axes only.
std::string histogram_svg(std::string_view title, const HistogramTable& table);
/// Line plot; y spans [0, 1], x spans the range of all points.
std::string trend_svg(std::string_view title, std::string_view x_label,
                      const std::vector<TrendSeries>& series);

}  // namespace rankcons

#endif  // RANKCONS_REPORT_H_
