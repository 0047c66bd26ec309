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

#ifndef MBTDNN_TRAINING_OBJECTIVE_H_
#define MBTDNN_TRAINING_OBJECTIVE_H_

#include <array>
#include <optional>
#include <string>

#include "mbtdnn/model/model.h"
#include "mbtdnn/nn/loss.h"
#include "mbtdnn/training/batching.h"

namespace mbtdnn {

enum class TrainMode { kBaseline, kMtl, kAdv };
enum class LambdaSchedule { kFixed, kDecay10, kSigmoidRamp };
// kRamp: 2 / (1 + exp(-gamma p)) - 1, rising from 0 toward 1.
// kAsWritten: 2 / (1 + exp(gamma p)) - 1, falling from 0 toward -1.
enum class SigmoidSign { kRamp, kAsWritten };
enum class Stage { kJoint, kSpeakerOnly, kStutterOnly, kJointGrl, kRecovery };

const char* TrainModeName(TrainMode m);
const char* ScheduleName(LambdaSchedule s);
const char* StageName(Stage s);
std::optional<TrainMode> ParseTrainMode(const std::string& s);
std::optional<LambdaSchedule> ParseSchedule(const std::string& s);

// `epoch` counts from 0; p = epoch / max_epochs for the sigmoid ramp.
double LambdaAt(LambdaSchedule schedule, int epoch, double lambda0, double gamma = 10.0,
                int max_epochs = 100, SigmoidSign sign = SigmoidSign::kRamp);

struct StagePlan {
  Stage stage = Stage::kJoint;
  BranchSet trainable = BranchSet::All();
  bool grl = false;
};

// Adversarial schedule: [0, b0) speaker branch (with the encoder unless
// `encoder_with_speaker` is false), [b0, b1) stutter branches with the
// encoder, [b1, b2) everything with gradient reversal, then the stutter
// heads alone on a frozen encoder.
StagePlan StageAt(int epoch, const std::array<int, 3>& boundaries,
                  bool encoder_with_speaker = true);

// Scalar objective: baseline L_stutter; mtl (1 - lambda) L_stutter +
// lambda L_speaker; adv L_stutter - lambda L_speaker.
double ComposeTotal(TrainMode mode, double stutter, double speaker, double lambda);

struct BatchLosses {
  double fluent = 0.0;
  double disfluent = 0.0;
  double speaker = 0.0;
  double stutter = 0.0;
  double total = 0.0;
};

// How each head's mean loss enters the backward pass. Under gradient
// reversal the speaker head descends its own loss with weight 1 while the
// encoder receives -lambda times that gradient.
struct LossWeights {
  double fluent = 1.0;
  double disfluent = 1.0;
  double speaker = 0.0;
  std::optional<double> grl;
};

LossWeights WeightsFor(TrainMode mode, Stage stage, double lambda);

struct BackwardOptions {
  bool enabled = false;
  bool to_encoder = true;
};

// Forward pass over `batch` plus, optionally, the backward pass for the
// objective of (mode, stage). L_fluent and L_speaker average over the clips
// that carry the label; L_disfluent averages over disfluent clips only and is
// 0 for a batch without any. Gradients accumulate; call ZeroGrad() first.
template <typename T>
BatchLosses ComputeBatchLosses(Model<T>& model, const LabeledBatch<T>& batch, TrainMode mode,
                               double lambda, nn::Mode nn_mode, Stage stage = Stage::kJoint,
                               BackwardOptions backward = {}) {
  if (batch.size() == 0) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  const LossWeights w = WeightsFor(mode, stage, lambda);
  const ModelOutputs<T> out = model.Forward(batch.x, nn_mode, w.grl);
  nn::Matrix<T> g_fluent, g_disfluent, g_speaker;
  BatchLosses l;
  l.fluent = nn::MeanCrossEntropy<T>(out.fluent, batch.fluent, w.fluent, &g_fluent);
  l.disfluent = nn::MeanCrossEntropy<T>(out.disfluent, batch.disfluent, w.disfluent, &g_disfluent);
  l.speaker = nn::MeanCrossEntropy<T>(out.speaker, batch.speaker, w.speaker, &g_speaker);
  l.stutter = l.fluent + l.disfluent;
  l.total = ComposeTotal(mode, l.stutter, l.speaker, lambda);
  if (backward.enabled) {
    HeadGradients<T> g;
    g.fluent = w.fluent != 0.0 ? &g_fluent : nullptr;
    g.disfluent = w.disfluent != 0.0 ? &g_disfluent : nullptr;
    g.speaker = w.speaker != 0.0 ? &g_speaker : nullptr;
    g.propagate_to_encoder = backward.to_encoder;
    model.Backward(g);
  }
  return l;
}

}  // namespace mbtdnn

#endif  // MBTDNN_TRAINING_OBJECTIVE_H_
