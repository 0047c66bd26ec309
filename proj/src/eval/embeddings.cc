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

#include "mbtdnn/eval/embeddings.h"

#include <cstdio>
#include <fstream>

#include "mbtdnn/data/csv.h"
#include "mbtdnn/error.h"
#include "mbtdnn/training/batching.h"

namespace mbtdnn {

EmbeddingTable ComputeEmbeddings(Model<float>& model, std::span<const ClipRecord> records) {
  EmbeddingTable t;
  for (const ClipRecord& r : records) {
    t.clip_ids.push_back(r.clip_id);
    t.podcast_ids.push_back(r.podcast_id);
    t.labels.push_back(r.label);
  }
  t.values = EmbedRecords(model, records);
  return t;
}

void WriteEmbeddings(std::ostream& out, const EmbeddingTable& t) {
  const Eigen::Index dim = t.values.rows();
  out << "clip_id,podcast_id,class";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",e" << i;
  out << "\n";
  char buf[32];
  for (size_t j = 0; j < t.clip_ids.size(); ++j) {
    out << CsvEscape(t.clip_ids[j]) << ',' << CsvEscape(t.podcast_ids[j]) << ','
        << ClassName(t.labels[j]);
    for (Eigen::Index i = 0; i < dim; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.9g", t.values(i, static_cast<Eigen::Index>(j)));
      out << buf;
    }
    out << "\n";
  }
}

void WriteEmbeddings(const std::string& path, const EmbeddingTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  WriteEmbeddings(out, t);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

EmbeddingTable ReadEmbeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, path + ": empty file");
  const std::vector<std::string> header = SplitCsvLine(line);
  if (header.size() < 4 || header[0] != "clip_id" || header[1] != "podcast_id" ||
      header[2] != "class") {
    throw Error(ErrorCode::kParseError, path + ":1: unexpected embedding header");
  }
  const size_t dim = header.size() - 3;
  EmbeddingTable t;
  std::vector<std::vector<float>> cols;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::kMalformedRow, where + ": expected " +
                                                std::to_string(header.size()) + " fields");
    }
    auto label = ParseClass(f[2]);
    if (!label) throw Error(ErrorCode::kUnknownLabel, where + ": unknown class '" + f[2] + "'");
    t.clip_ids.push_back(f[0]);
    t.podcast_ids.push_back(f[1]);
    t.labels.push_back(*label);
    std::vector<float> col(dim);
    for (size_t i = 0; i < dim; ++i) {
      try {
        size_t used = 0;
        col[i] = std::stof(f[i + 3], &used);
        if (used != Trim(f[i + 3]).size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParseError, where + ": bad value '" + f[i + 3] + "'");
      }
    }
    cols.push_back(std::move(col));
  }
  t.values.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    for (size_t i = 0; i < dim; ++i) {
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
  }
  return t;
}

}  // namespace mbtdnn
