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

#include "mbtdnn/training/objective.h"

#include <cmath>

namespace mbtdnn {

const char* TrainModeName(TrainMode m) {
  switch (m) {
    case TrainMode::kBaseline: return "baseline";
    case TrainMode::kMtl: return "mtl";
    case TrainMode::kAdv: return "adv";
  }
  return "?";
}

const char* ScheduleName(LambdaSchedule s) {
  switch (s) {
    case LambdaSchedule::kFixed: return "fixed";
    case LambdaSchedule::kDecay10: return "decay10";
    case LambdaSchedule::kSigmoidRamp: return "sigmoid_ramp";
  }
  return "?";
}

const char* StageName(Stage s) {
  switch (s) {
    case Stage::kJoint: return "joint";
    case Stage::kSpeakerOnly: return "speaker_only";
    case Stage::kStutterOnly: return "stutter_only";
    case Stage::kJointGrl: return "joint_grl";
    case Stage::kRecovery: return "recovery";
  }
  return "?";
}

std::optional<TrainMode> ParseTrainMode(const std::string& s) {
  for (TrainMode m : {TrainMode::kBaseline, TrainMode::kMtl, TrainMode::kAdv}) {
    if (s == TrainModeName(m)) return m;
  }
  return std::nullopt;
}

std::optional<LambdaSchedule> ParseSchedule(const std::string& s) {
  for (LambdaSchedule m :
       {LambdaSchedule::kFixed, LambdaSchedule::kDecay10, LambdaSchedule::kSigmoidRamp}) {
    if (s == ScheduleName(m)) return m;
  }
  return std::nullopt;
}

double LambdaAt(LambdaSchedule schedule, int epoch, double lambda0, double gamma, int max_epochs,
                SigmoidSign sign) {
  switch (schedule) {
    case LambdaSchedule::kFixed:
      return lambda0;
    case LambdaSchedule::kDecay10:
      return std::pow(10.0, -static_cast<double>(epoch));
    case LambdaSchedule::kSigmoidRamp: {
      const double p = static_cast<double>(epoch) / std::max(1, max_epochs);
      const double x = sign == SigmoidSign::kRamp ? -gamma * p : gamma * p;
      return 2.0 / (1.0 + std::exp(x)) - 1.0;
    }
  }
  return lambda0;
}

StagePlan StageAt(int epoch, const std::array<int, 3>& b, bool encoder_with_speaker) {
  StagePlan plan;
  if (epoch < b[0]) {
    plan.stage = Stage::kSpeakerOnly;
    plan.trainable = encoder_with_speaker ? BranchSet{Branch::kEncoder, Branch::kSpeaker}
                                          : BranchSet{Branch::kSpeaker};
  } else if (epoch < b[1]) {
    plan.stage = Stage::kStutterOnly;
    plan.trainable = {Branch::kEncoder, Branch::kFluent, Branch::kDisfluent};
  } else if (epoch < b[2]) {
    plan.stage = Stage::kJointGrl;
    plan.trainable = BranchSet::All();
    plan.grl = true;
  } else {
    plan.stage = Stage::kRecovery;
    plan.trainable = {Branch::kFluent, Branch::kDisfluent};
  }
  return plan;
}

double ComposeTotal(TrainMode mode, double stutter, double speaker, double lambda) {
  switch (mode) {
    case TrainMode::kBaseline: return stutter;
    case TrainMode::kMtl: return (1.0 - lambda) * stutter + lambda * speaker;
    case TrainMode::kAdv: return stutter - lambda * speaker;
  }
  return stutter;
}

LossWeights WeightsFor(TrainMode mode, Stage stage, double lambda) {
  LossWeights w;
  switch (mode) {
    case TrainMode::kBaseline:
      break;
    case TrainMode::kMtl:
      w.fluent = w.disfluent = 1.0 - lambda;
      w.speaker = lambda;
      break;
    case TrainMode::kAdv:
      switch (stage) {
        case Stage::kSpeakerOnly:
          w.fluent = w.disfluent = 0.0;
          w.speaker = 1.0;
          break;
        case Stage::kStutterOnly:
        case Stage::kRecovery:
          break;
        case Stage::kJoint:
        case Stage::kJointGrl:
          w.speaker = 1.0;
          w.grl = lambda;
          break;
      }
      break;
  }
  return w;
}

}  // namespace mbtdnn
