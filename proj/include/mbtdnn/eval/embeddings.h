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

#ifndef MBTDNN_EVAL_EMBEDDINGS_H_
#define MBTDNN_EVAL_EMBEDDINGS_H_

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mbtdnn/data/dataset.h"
#include "mbtdnn/model/model.h"

namespace mbtdnn {

struct EmbeddingTable {
  std::vector<std::string> clip_ids;
  std::vector<std::string> podcast_ids;
  std::vector<StutterClass> labels;
  // One column per clip.
  Eigen::MatrixXf values;
};

// Eval-mode pooled encoder outputs for `records`.
EmbeddingTable ComputeEmbeddings(Model<float>& model, std::span<const ClipRecord> records);

// CSV: clip_id, podcast_id, class, e0 .. e{D-1}. Values print with %.9g so
// they read back exactly.
void WriteEmbeddings(std::ostream& out, const EmbeddingTable& table);
void WriteEmbeddings(const std::string& path, const EmbeddingTable& table);
EmbeddingTable ReadEmbeddings(const std::string& path);

}  // namespace mbtdnn

#endif  // MBTDNN_EVAL_EMBEDDINGS_H_
