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

#ifndef MBTDNN_CLI_PIPELINE_H_
#define MBTDNN_CLI_PIPELINE_H_

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "mbtdnn/cli/run_config.h"
#include "mbtdnn/error.h"
#include "mbtdnn/eval/metrics.h"
#include "mbtdnn/training/trainer.h"

namespace mbtdnn {

// Process exit status: 1 for usage and configuration errors, 3 for numeric
// failures, 2 for everything else (data and I/O).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;
int ExitCodeFor(ErrorCode code);

// Train, valid and test sets named by the config: either the explicit
// manifests or `manifest` split per `split` (the first fold for k-fold
// modes). Features are loaded; any clip that fails raises kIo.
DatasetSplit LoadRunData(const RunConfig& cfg, std::vector<std::string>* warnings = nullptr);

// Loads features in place and throws kIo listing the clips that failed.
void RequireFeatures(std::vector<ClipRecord>& records, const MfccConfig& mfcc);

struct TrainedRun {
  std::unique_ptr<Model<float>> model;
  TrainResult result;
};

// Builds a model for the train set's podcasts, seeded with the train seed,
// and trains it.
TrainedRun TrainRun(const RunConfig& cfg, const DatasetSplit& split,
                    const EpochCallback& on_epoch = {});

MetricsReport EvaluateModel(Model<float>& model, std::span<const ClipRecord> records);

struct ProtocolOptions {
  // SEP-28k label table and per-clip audio directory.
  std::string labels_csv;
  Sep28kOptions sep28k;
  int runs = 10;
  std::string out_dir;
};

struct ProtocolResult {
  std::vector<MetricsReport> reports;
  AggregateReport aggregate;
  int n_records = 0;
  int n_excluded = 0;
  int n_dropped = 0;
  std::array<int, 3> podcast_counts{};
};

// Label table -> podcast-level 80/10/10 split -> `runs` seeded trainings of
// cfg.train.mode -> test metrics averaged over runs. For mtl and adv the
// train and valid podcasts are pooled and re-split within each podcast with
// cfg.split.valid_fraction; the test set never changes. Clips whose audio
// cannot be read are dropped and counted. Writes the exclusion report, per
// run logs and reports, and the aggregate under `out_dir`.
ProtocolResult RunProtocol(const RunConfig& cfg, const ProtocolOptions& opts,
                           std::ostream* progress = nullptr);

}  // namespace mbtdnn

#endif  // MBTDNN_CLI_PIPELINE_H_
