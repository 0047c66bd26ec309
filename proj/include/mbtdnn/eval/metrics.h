// Copyright 2026 The mbtdnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MBTDNN_EVAL_METRICS_H_
#define MBTDNN_EVAL_METRICS_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbtdnn/model/stutter_class.h"

namespace mbtdnn {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<int64_t, kNumClasses>, kNumClasses> counts{};

  int64_t at(StutterClass truth, StutterClass pred) const {
    return counts[ClassIndex(truth)][ClassIndex(pred)];
  }
  int64_t total() const;
  int64_t trace() const;
  int64_t row_sum(StutterClass c) const;
  int64_t col_sum(StutterClass c) const;

  // Share of class-x clips predicted as y, keyed "XasY" (e.g. "RasP").
  // Off-diagonal pairs only; classes without support are omitted.
  std::map<std::string, double> PairRates() const;
};

// Throws LengthMismatch on unequal lengths and EmptyMatrix on empty input.
ConfusionMatrix Confusion(std::span<const StutterClass> truth, std::span<const StutterClass> pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Same as recall.
  double accuracy = 0.0;
  int64_t support = 0;
  // Set when nothing was predicted as this class; precision is then 0.
  bool precision_undefined = false;
  // Set when the class has no support; recall is then 0.
  bool recall_undefined = false;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  // Mean accuracy over R, P, B, I.
  double sa = 0.0;
  // trace / total.
  double ta = 0.0;
  // Disfluent clips that the fluent head marks disfluent.
  double s2ca = 0.0;
  ConfusionMatrix confusion;

  const ClassMetrics& of(StutterClass c) const { return per_class[ClassIndex(c)]; }
};

// Throws EmptyMatrix when the matrix holds no counts.
MetricsReport Metrics(const ConfusionMatrix& confusion);

// Table column order: R, P, B, I, SA, F, TA.
const std::vector<std::string>& TableColumns();
// Accuracy values for TableColumns() plus "S2CA".
std::map<std::string, double> SummaryRow(const MetricsReport& report);

nlohmann::json ToJson(const MetricsReport& report);
// Aligned table in percent, columns as TableColumns(), followed by
// precision, recall and F1 per class.
std::string FormatTable(const MetricsReport& report);

struct AggregateReport {
  int runs = 0;
  std::map<std::string, double> mean;
  // Sample standard deviation; 0 for a single run.
  std::map<std::string, double> stddev;
};

AggregateReport Aggregate(std::span<const MetricsReport> reports);
nlohmann::json ToJson(const AggregateReport& report);
std::string FormatTable(const AggregateReport& report);

}  // namespace mbtdnn

#endif  // MBTDNN_EVAL_METRICS_H_
