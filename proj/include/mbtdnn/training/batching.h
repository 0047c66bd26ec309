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

#ifndef MBTDNN_TRAINING_BATCHING_H_
#define MBTDNN_TRAINING_BATCHING_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mbtdnn/data/dataset.h"
#include "mbtdnn/dsp/mfcc.h"
#include "mbtdnn/model/model.h"

namespace mbtdnn {

// podcast id -> speaker-head index (sorted order).
using PodcastIndex = std::map<std::string, int>;
PodcastIndex MakePodcastIndex(const std::vector<std::string>& podcasts);

// Inputs and the three label streams of one mini-batch. Negative entries
// mark a missing label: fluent clips have no disfluent target, and podcasts
// unknown to the speaker head have no speaker target.
template <typename T>
struct LabeledBatch {
  nn::SequenceBatch<T> x;
  std::vector<int> fluent;
  std::vector<int> disfluent;
  std::vector<int> speaker;
  std::vector<StutterClass> label;

  int size() const { return static_cast<int>(label.size()); }
};

// Every record must carry in-memory features.
template <typename T>
LabeledBatch<T> MakeLabeledBatch(std::span<const ClipRecord> records,
                                 std::span<const size_t> indices, const PodcastIndex& podcasts);

// Fills `features` for records that lack them, from feature_path (FMAT) or
// from audio_path via the MFCC front-end. Returns one message per failed
// record; successful records are left loaded.
std::vector<std::string> LoadFeatures(std::vector<ClipRecord>& records, const MfccConfig& cfg);
// Reads or computes the features of a single record.
FeatureMatrix FeaturesFor(const ClipRecord& record, const MfccConfig& cfg);

// Eval-mode predictions under the two-branch decision rule.
std::vector<StutterClass> PredictRecords(Model<float>& model, std::span<const ClipRecord> records,
                                         int batch_size = 256);
// Eval-mode embeddings, one column per record.
nn::Matrix<float> EmbedRecords(Model<float>& model, std::span<const ClipRecord> records,
                               int batch_size = 256);

}  // namespace mbtdnn

#endif  // MBTDNN_TRAINING_BATCHING_H_
