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

#include "mbtdnn/eval/metrics.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mbtdnn/error.h"

namespace mbtdnn {

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (const auto& row : counts) {
    for (int64_t v : row) n += v;
  }
  return n;
}

int64_t ConfusionMatrix::trace() const {
  int64_t n = 0;
  for (int i = 0; i < kNumClasses; ++i) n += counts[i][i];
  return n;
}

int64_t ConfusionMatrix::row_sum(StutterClass c) const {
  int64_t n = 0;
  for (int64_t v : counts[ClassIndex(c)]) n += v;
  return n;
}

int64_t ConfusionMatrix::col_sum(StutterClass c) const {
  int64_t n = 0;
  for (const auto& row : counts) n += row[ClassIndex(c)];
  return n;
}

std::map<std::string, double> ConfusionMatrix::PairRates() const {
  std::map<std::string, double> out;
  for (StutterClass x : kAllClasses) {
    const int64_t support = row_sum(x);
    if (support == 0) continue;
    for (StutterClass y : kAllClasses) {
      if (x == y) continue;
      std::string key = std::string(1, ClassLetter(x)) + "as" + ClassLetter(y);
      out[key] = static_cast<double>(at(x, y)) / static_cast<double>(support);
    }
  }
  return out;
}

ConfusionMatrix Confusion(std::span<const StutterClass> truth, std::span<const StutterClass> pred) {
  if (truth.size() != pred.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(truth.size()) + " labels but " +
                                                std::to_string(pred.size()) + " predictions");
  }
  if (truth.empty()) throw Error(ErrorCode::kEmptyMatrix, "no labels to compare");
  ConfusionMatrix m;
  for (size_t i = 0; i < truth.size(); ++i) {
    ++m.counts[ClassIndex(truth[i])][ClassIndex(pred[i])];
  }
  return m;
}

MetricsReport Metrics(const ConfusionMatrix& confusion) {
  if (confusion.total() <= 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  MetricsReport r;
  r.confusion = confusion;
  for (StutterClass c : kAllClasses) {
    ClassMetrics& m = r.per_class[ClassIndex(c)];
    const double tp = static_cast<double>(confusion.at(c, c));
    const int64_t rows = confusion.row_sum(c);
    const int64_t cols = confusion.col_sum(c);
    m.support = rows;
    m.precision_undefined = cols == 0;
    m.recall_undefined = rows == 0;
    m.precision = cols ? tp / static_cast<double>(cols) : 0.0;
    m.recall = rows ? tp / static_cast<double>(rows) : 0.0;
    const double denom = m.precision + m.recall;
    m.f1 = denom > 0.0 ? 2.0 * m.precision * m.recall / denom : 0.0;
    m.accuracy = m.recall;
  }
  double sa = 0.0;
  int64_t disfluent = 0, flagged = 0;
  for (StutterClass c : kAllClasses) {
    if (c == StutterClass::kFluent) continue;
    sa += r.of(c).accuracy;
    disfluent += confusion.row_sum(c);
    for (StutterClass p : kAllClasses) {
      if (p != StutterClass::kFluent) flagged += confusion.at(c, p);
    }
  }
  r.sa = sa / kNumDisfluentClasses;
  r.ta = static_cast<double>(confusion.trace()) / static_cast<double>(confusion.total());
  r.s2ca = disfluent ? static_cast<double>(flagged) / static_cast<double>(disfluent) : 0.0;
  return r;
}

const std::vector<std::string>& TableColumns() {
  static const std::vector<std::string> kColumns = {"R", "P", "B", "I", "SA", "F", "TA"};
  return kColumns;
}

std::map<std::string, double> SummaryRow(const MetricsReport& r) {
  std::map<std::string, double> row;
  for (StutterClass c : kAllClasses) row[std::string(1, ClassLetter(c))] = r.of(c).accuracy;
  row["SA"] = r.sa;
  row["TA"] = r.ta;
  row["S2CA"] = r.s2ca;
  return row;
}

nlohmann::json ToJson(const MetricsReport& r) {
  nlohmann::json j;
  j["note"] = "per-class accuracy is per-class recall";
  j["columns"] = TableColumns();
  nlohmann::json summary;
  for (const auto& [k, v] : SummaryRow(r)) summary[k] = v;
  j["summary"] = summary;
  nlohmann::json classes = nlohmann::json::object();
  for (StutterClass c : kAllClasses) {
    const ClassMetrics& m = r.of(c);
    classes[ClassName(c)] = {{"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"accuracy", m.accuracy},
                             {"support", m.support},
                             {"precision_undefined", m.precision_undefined},
                             {"recall_undefined", m.recall_undefined}};
  }
  j["classes"] = classes;
  nlohmann::json conf = nlohmann::json::array();
  for (const auto& row : r.confusion.counts) conf.push_back(row);
  j["confusion"] = {{"order", {"F", "R", "P", "B", "I"}}, {"counts", conf}};
  nlohmann::json pairs = nlohmann::json::object();
  for (const auto& [k, v] : r.confusion.PairRates()) pairs[k] = v;
  j["pair_rates"] = pairs;
  return j;
}

namespace {

std::string Cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%8.2f", 100.0 * v);
  return buf;
}

std::string HeaderLine(const std::vector<std::string>& cols, const char* first) {
  std::string s;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%-8s", first);
  s += buf;
  for (const std::string& c : cols) {
    std::snprintf(buf, sizeof(buf), "%8s", c.c_str());
    s += buf;
  }
  return s + "\n";
}

}  // namespace

std::string FormatTable(const MetricsReport& r) {
  std::ostringstream out;
  const auto row = SummaryRow(r);
  out << "accuracy (%), per-class accuracy is recall\n";
  out << HeaderLine(TableColumns(), "");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%-8s", "acc");
  out << buf;
  for (const std::string& c : TableColumns()) out << Cell(row.at(c));
  out << "\n\n" << HeaderLine({"prec", "recall", "f1", "support"}, "class");
  for (StutterClass c : kAllClasses) {
    const ClassMetrics& m = r.of(c);
    std::snprintf(buf, sizeof(buf), "%-8s", ClassName(c));
    out << buf << Cell(m.precision) << Cell(m.recall) << Cell(m.f1);
    std::snprintf(buf, sizeof(buf), "%8lld", static_cast<long long>(m.support));
    out << buf << (m.precision_undefined ? "  (no predictions)" : "") << "\n";
  }
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * r.s2ca);
  out << "\nS2CA " << buf << "\n";
  return out.str();
}

AggregateReport Aggregate(std::span<const MetricsReport> reports) {
  AggregateReport a;
  a.runs = static_cast<int>(reports.size());
  if (reports.empty()) return a;
  std::map<std::string, std::vector<double>> values;
  for (const MetricsReport& r : reports) {
    for (const auto& [k, v] : SummaryRow(r)) values[k].push_back(v);
  }
  for (const auto& [k, v] : values) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    a.mean[k] = mean;
    a.stddev[k] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return a;
}

nlohmann::json ToJson(const AggregateReport& a) {
  nlohmann::json j;
  j["runs"] = a.runs;
  j["columns"] = TableColumns();
  j["mean"] = a.mean;
  j["stddev"] = a.stddev;
  return j;
}

std::string FormatTable(const AggregateReport& a) {
  std::ostringstream out;
  out << "accuracy (%) over " << a.runs << " runs, per-class accuracy is recall\n";
  out << HeaderLine(TableColumns(), "");
  char buf[32];
  for (const char* which : {"mean", "std"}) {
    std::snprintf(buf, sizeof(buf), "%-8s", which);
    out << buf;
    const auto& m = std::string(which) == "mean" ? a.mean : a.stddev;
    for (const std::string& c : TableColumns()) {
      auto it = m.find(c);
      out << Cell(it == m.end() ? 0.0 : it->second);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mbtdnn
