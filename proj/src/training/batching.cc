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

#include "mbtdnn/training/batching.h"

#include <algorithm>
#include <numeric>

#include "mbtdnn/dsp/wav.h"
#include "mbtdnn/error.h"

namespace mbtdnn {

PodcastIndex MakePodcastIndex(const std::vector<std::string>& podcasts) {
  PodcastIndex index;
  for (const auto& p : podcasts) index.emplace(p, static_cast<int>(index.size()));
  return index;
}

template <typename T>
LabeledBatch<T> MakeLabeledBatch(std::span<const ClipRecord> records,
                                 std::span<const size_t> indices, const PodcastIndex& podcasts) {
  if (indices.empty()) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  LabeledBatch<T> batch;
  std::vector<const FeatureMatrix*> clips;
  clips.reserve(indices.size());
  for (size_t i : indices) {
    const ClipRecord& r = records[i];
    if (!r.features) {
      throw Error(ErrorCode::kIo, "features for clip " + r.clip_id + " are not loaded");
    }
    clips.push_back(r.features.get());
    batch.label.push_back(r.label);
    batch.fluent.push_back(static_cast<int>(r.fluent()));
    batch.disfluent.push_back(DisfluentIndex(r.label));
    auto it = podcasts.find(r.podcast_id);
    batch.speaker.push_back(it == podcasts.end() ? -1 : it->second);
  }
  batch.x = MakeSequenceBatch<T>(clips);
  return batch;
}

template LabeledBatch<float> MakeLabeledBatch<float>(std::span<const ClipRecord>,
                                                     std::span<const size_t>, const PodcastIndex&);
template LabeledBatch<double> MakeLabeledBatch<double>(std::span<const ClipRecord>,
                                                       std::span<const size_t>,
                                                       const PodcastIndex&);

FeatureMatrix FeaturesFor(const ClipRecord& r, const MfccConfig& cfg) {
  if (r.features) return *r.features;
  if (!r.feature_path.empty()) return ReadFeatureMatrix(r.feature_path);
  if (r.audio_path.empty()) {
    throw Error(ErrorCode::kIo, "clip " + r.clip_id + " has no feature source");
  }
  AudioClip clip = ReadWav(r.audio_path);
  if (r.start_ms >= 0.0 || r.stop_ms >= 0.0) {
    clip = SliceClip(clip, std::max(0.0, r.start_ms), r.stop_ms);
  }
  return ExtractFeatures(clip, cfg);
}

std::vector<std::string> LoadFeatures(std::vector<ClipRecord>& records, const MfccConfig& cfg) {
  std::vector<std::string> failures;
  for (ClipRecord& r : records) {
    if (r.features) continue;
    try {
      r.features = std::make_shared<const FeatureMatrix>(FeaturesFor(r, cfg));
    } catch (const Error& e) {
      failures.push_back(r.clip_id + ": " + e.what());
    }
  }
  return failures;
}

namespace {

template <typename Fn>
void ForEachBatch(std::span<const ClipRecord> records, int batch_size, Fn&& fn) {
  std::vector<size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(batch_size)) {
    const size_t n = std::min<size_t>(static_cast<size_t>(batch_size), idx.size() - start);
    fn(std::span<const size_t>(idx.data() + start, n), start);
  }
}

}  // namespace

std::vector<StutterClass> PredictRecords(Model<float>& model, std::span<const ClipRecord> records,
                                         int batch_size) {
  std::vector<StutterClass> out;
  out.reserve(records.size());
  const PodcastIndex none;
  ForEachBatch(records, batch_size, [&](std::span<const size_t> idx, size_t) {
    LabeledBatch<float> b = MakeLabeledBatch<float>(records, idx, none);
    auto pred = model.Predict(b.x);
    out.insert(out.end(), pred.begin(), pred.end());
  });
  return out;
}

nn::Matrix<float> EmbedRecords(Model<float>& model, std::span<const ClipRecord> records,
                               int batch_size) {
  nn::Matrix<float> out(model.arch().embedding_dim(), static_cast<Eigen::Index>(records.size()));
  const PodcastIndex none;
  ForEachBatch(records, batch_size, [&](std::span<const size_t> idx, size_t start) {
    LabeledBatch<float> b = MakeLabeledBatch<float>(records, idx, none);
    out.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(idx.size())) =
        model.Encode(b.x, nn::Mode::kEval);
  });
  return out;
}

}  // namespace mbtdnn
