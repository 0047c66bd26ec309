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

#ifndef MBTDNN_TRAINING_TRAINER_H_
#define MBTDNN_TRAINING_TRAINER_H_

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mbtdnn/data/dataset.h"
#include "mbtdnn/model/model.h"
#include "mbtdnn/training/batching.h"
#include "mbtdnn/training/objective.h"

namespace mbtdnn {

struct TrainConfig {
  TrainMode mode = TrainMode::kBaseline;
  double lambda = 0.3;
  LambdaSchedule schedule = LambdaSchedule::kFixed;
  double sigmoid_gamma = 10.0;
  SigmoidSign sigmoid_sign = SigmoidSign::kRamp;
  double lr = 1e-2;
  int batch_size = 32;
  int patience = 7;
  double min_delta = 1e-6;
  int max_epochs = 100;
  std::array<int, 3> stage_boundaries = {25, 50, 75};
  bool train_encoder_with_speaker = true;
  // Evaluate train accuracy with an extra eval-mode pass each epoch.
  bool log_train_accuracy = true;
  uint64_t seed = 0;

  // Throws InvalidConfig.
  void Validate() const;
};

// Patience counter on a loss to be minimized. Only a drop of more than
// `min_delta` below the best value so far counts as improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience, double min_delta = 1e-6);

  // Returns true when training should stop.
  bool Update(double loss);
  void Reset();

  bool improved() const { return improved_; }
  double best() const { return best_; }
  int since_improvement() const { return since_; }
  int patience() const { return patience_; }

 private:
  int patience_;
  double min_delta_;
  std::optional<double> best_value_;
  double best_ = 0.0;
  int since_ = 0;
  bool improved_ = false;
};

struct EpochLog {
  int epoch = 0;
  Stage stage = Stage::kJoint;
  double lambda = 0.0;
  double l_fluent = 0.0;
  double l_disfluent = 0.0;
  double l_speaker = 0.0;
  double l_total = 0.0;
  double valid_stutter_loss = 0.0;
  double train_acc = 0.0;
  double valid_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  // -1 when no epoch was eligible for checkpointing.
  int best_epoch = -1;
  double best_valid_loss = 0.0;
  bool stopped_early = false;
  std::vector<std::string> podcasts;
};

struct EvalLosses {
  double fluent = 0.0;
  double disfluent = 0.0;
  double speaker = 0.0;
  double stutter() const { return fluent + disfluent; }
  double accuracy = 0.0;
};

// Eval-mode losses over `records`, each averaged over the clips carrying
// the corresponding label, and 5-way accuracy.
EvalLosses Evaluate(Model<float>& model, std::span<const ClipRecord> records,
                    const PodcastIndex& podcasts, int batch_size = 256);

// Contiguous batches over `order`; a trailing batch of one clip joins the
// previous batch.
std::vector<std::span<const size_t>> MakeBatches(std::span<const size_t> order, int batch_size);

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains `model` in place and leaves it at the best validation epoch. The
// speaker head's classes are the sorted podcasts of `train`, and the model
// must have been built with that many. Features must be loaded.
TrainResult Train(Model<float>& model, const TrainConfig& cfg,
                  const std::vector<ClipRecord>& train, const std::vector<ClipRecord>& valid,
                  const EpochCallback& on_epoch = {});

void WriteEpochLog(std::ostream& out, const std::vector<EpochLog>& log);
void WriteEpochLog(const std::string& path, const std::vector<EpochLog>& log);

}  // namespace mbtdnn

#endif  // MBTDNN_TRAINING_TRAINER_H_
