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

#ifndef MBTDNN_DATA_DATASET_H_
#define MBTDNN_DATA_DATASET_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mbtdnn/dsp/feature_matrix.h"
#include "mbtdnn/model/stutter_class.h"

namespace mbtdnn {

// One labeled three-second segment.
struct ClipRecord {
  std::string clip_id;
  // Meta-data label used by the speaker branch.
  std::string podcast_id;
  StutterClass label = StutterClass::kFluent;
  // Feature source: an audio file (optionally a [start, stop) slice of it),
  // an FMAT file, or features held in memory.
  std::string audio_path;
  double start_ms = -1.0;
  double stop_ms = -1.0;
  std::string feature_path;
  std::shared_ptr<const FeatureMatrix> features;

  FluentLabel fluent() const { return PseudoLabel(label); }
};

// Manifest CSV. The header must name clip_id, podcast_id and label; the
// optional columns are audio_path, start_ms, stop_ms and feature_path.
// Relative paths are resolved against the manifest's directory. An empty
// file yields no records and a warning.
std::vector<ClipRecord> LoadManifest(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr);
std::vector<ClipRecord> ParseManifest(std::istream& in, const std::string& source,
                                      const std::string& base_dir,
                                      std::vector<std::string>* warnings = nullptr);
// Paths are written as stored in the records.
void WriteManifest(const std::string& path, const std::vector<ClipRecord>& records);

// Sorted distinct podcast ids.
std::vector<std::string> DistinctPodcasts(std::span<const ClipRecord> records);

// ---------------------------------------------------------------------------
// SEP-28k annotation tables

struct Sep28kOptions {
  // Per-clip WAVs are expected at <audio_root>/<Show>/<EpId>/<Show>_<EpId>_<ClipId>.wav.
  std::string audio_root = "clips";
  // A non-stuttering column with at least this many annotator votes excludes
  // the row.
  int flag_threshold = 1;
};

struct Exclusion {
  std::string clip_id;
  std::string reason;
};

struct Sep28kResult {
  std::vector<ClipRecord> records;
  std::vector<Exclusion> excluded;
  std::array<int, kNumClasses> class_counts{};
};

// Resolves the per-class annotator counts of a SEP-28k label table to one
// label per clip: the class with the strictly largest count wins
// (Repetition counts as max(SoundRep, WordRep), Fluent as
// NoStutteredWords). Ties and rows with a non-stuttering flag are excluded
// and reported. Throws MalformedRow.
Sep28kResult AdaptSep28k(std::istream& table, const Sep28kOptions& opts = {});
void WriteExclusionReport(const std::string& path, const std::vector<Exclusion>& excluded);

// ---------------------------------------------------------------------------
// Splits

enum class SplitMode { kByPodcast, kWithinPodcast, kKFoldPodcast, kKFoldClip };
const char* SplitModeName(SplitMode m);

struct DatasetSplit {
  std::vector<ClipRecord> train;
  std::vector<ClipRecord> valid;
  std::vector<ClipRecord> test;
  SplitMode mode = SplitMode::kByPodcast;
  std::vector<std::string> warnings;
};

// Integer sizes proportional to `ratios` summing to `total`: floors first,
// then the remaining units go to the largest fractional parts (ties to the
// earlier entry).
std::vector<int> LargestRemainder(int total, std::span<const double> ratios);

// Podcasts are shuffled by seed and partitioned train/valid/test; every clip
// of a podcast lands in one set. Throws TooFewPodcasts below 3 podcasts.
DatasetSplit SplitByPodcast(std::span<const ClipRecord> records,
                            const std::array<double, 3>& ratios, uint64_t seed);

// Stratified per (podcast, class) cell: each cell with >= 2 clips puts at
// least one clip in train and one in valid; single-clip cells go to train
// with a warning. `test` is carried through unchanged. Throws EmptyPodcast
// when a podcast has fewer than 2 clips.
DatasetSplit SplitWithinPodcast(std::span<const ClipRecord> records, double valid_fraction,
                                uint64_t seed, std::vector<ClipRecord> test = {});

// k train/valid splits. With `by_podcast` whole podcasts are assigned to
// folds (throws TooFewPodcasts if fewer than k), otherwise single clips.
std::vector<DatasetSplit> KFold(std::span<const ClipRecord> records, int k, uint64_t seed,
                                bool by_podcast = true);

// ---------------------------------------------------------------------------
// Synthetic data

// Each clip is
//   alpha * A[class] + beta * ((1 - rho) * Bo[podcast] + rho * Bp[podcast]) + sigma * N
// where the A are orthonormal class patterns, Bo are podcast patterns
// orthogonal to every A, Bp are podcast patterns inside span(A), and N is
// standard Gaussian noise. All patterns have unit Frobenius norm and are
// constant over time.
struct SyntheticConfig {
  int n_podcasts = 4;
  // Clips per class in total, spread round-robin over the podcasts.
  std::array<int, kNumClasses> class_counts = {20, 20, 20, 20, 20};
  int frames = 32;
  int dim = 20;
  double class_strength = 1.0;
  double podcast_strength = 1.0;
  double entanglement = 0.0;
  double noise = 0.1;
  uint64_t seed = 0;
  // Seeds the patterns separately so datasets drawn with different `seed`
  // values share them.
  uint64_t pattern_seed = 1234;

  // Throws InvalidConfig.
  void Validate() const;
};

struct SyntheticPatterns {
  std::vector<Eigen::MatrixXf> classes;
  std::vector<Eigen::MatrixXf> podcast_orthogonal;
  std::vector<Eigen::MatrixXf> podcast_parallel;
};

SyntheticPatterns MakeSyntheticPatterns(const SyntheticConfig& cfg);
std::vector<ClipRecord> GenerateSynthetic(const SyntheticConfig& cfg);

// Writes <dir>/features/<clip_id>.fmat for every record with in-memory
// features and <dir>/manifest.csv pointing at them.
void WriteFeatureDataset(const std::string& dir, std::vector<ClipRecord> records);

}  // namespace mbtdnn

#endif  // MBTDNN_DATA_DATASET_H_
