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

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "grad_suite.h"
#include "mbtdnn/data/dataset.h"
#include "mbtdnn/training/batching.h"
#include "mbtdnn/training/objective.h"
#include "mbtdnn/training/trainer.h"
#include "test_util.h"

namespace mbtdnn {
namespace {

TEST(Compose, HandArithmetic) {
  EXPECT_NEAR(ComposeTotal(TrainMode::kMtl, 2.0, 1.0, 0.3), 1.7, 1e-12);
  EXPECT_NEAR(ComposeTotal(TrainMode::kAdv, 2.0, 1.0, 0.5), 1.5, 1e-12);
  EXPECT_EQ(ComposeTotal(TrainMode::kBaseline, 2.0, 1.0, 0.5), 2.0);
}

TEST(Compose, AffineInLambda) {
  for (int k = 0; k <= 4; ++k) {
    const double lambda = k < 4 ? 0.25 * k : 1.0 - 1e-9;
    const double mtl = ComposeTotal(TrainMode::kMtl, 2.3, 0.7, lambda);
    EXPECT_NEAR(mtl, 2.3 + lambda * (0.7 - 2.3), 1e-12);
  }
  for (int k = 1; k <= 9; ++k) {
    const double lambda = k / 10.0;
    EXPECT_NEAR(ComposeTotal(TrainMode::kMtl, 2.0, 1.0, lambda), 2.0 - lambda, 1e-7);
    EXPECT_NEAR(ComposeTotal(TrainMode::kAdv, 2.0, 1.0, lambda), 2.0 - lambda, 1e-7);
  }
}

TEST(Weights, PerModeAndStage) {
  const LossWeights mtl = WeightsFor(TrainMode::kMtl, Stage::kJoint, 0.3);
  EXPECT_DOUBLE_EQ(mtl.fluent, 0.7);
  EXPECT_DOUBLE_EQ(mtl.disfluent, 0.7);
  EXPECT_DOUBLE_EQ(mtl.speaker, 0.3);
  EXPECT_FALSE(mtl.grl);
  const LossWeights base = WeightsFor(TrainMode::kBaseline, Stage::kJoint, 0.3);
  EXPECT_EQ(base.speaker, 0.0);
  const LossWeights s1 = WeightsFor(TrainMode::kAdv, Stage::kSpeakerOnly, 0.3);
  EXPECT_EQ(s1.fluent, 0.0);
  EXPECT_EQ(s1.speaker, 1.0);
  EXPECT_FALSE(s1.grl);
  const LossWeights s3 = WeightsFor(TrainMode::kAdv, Stage::kJointGrl, 0.3);
  EXPECT_EQ(s3.speaker, 1.0);
  ASSERT_TRUE(s3.grl);
  EXPECT_DOUBLE_EQ(*s3.grl, 0.3);
  const LossWeights s4 = WeightsFor(TrainMode::kAdv, Stage::kRecovery, 0.3);
  EXPECT_EQ(s4.speaker, 0.0);
}

TEST(Lambda, Schedules) {
  EXPECT_EQ(LambdaAt(LambdaSchedule::kFixed, 17, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(LambdaAt(LambdaSchedule::kDecay10, 0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(LambdaAt(LambdaSchedule::kDecay10, 1, 0.3), 0.1);
  EXPECT_DOUBLE_EQ(LambdaAt(LambdaSchedule::kDecay10, 2, 0.3), 0.01);
  EXPECT_EQ(LambdaAt(LambdaSchedule::kSigmoidRamp, 0, 0.3, 10.0, 100), 0.0);
  // 2 / (1 + e^-x) - 1 = tanh(x / 2).
  EXPECT_NEAR(LambdaAt(LambdaSchedule::kSigmoidRamp, 50, 0.3, 10.0, 100), std::tanh(2.5), 1e-12);
  EXPECT_NEAR(LambdaAt(LambdaSchedule::kSigmoidRamp, 50, 0.3, 10.0, 100), 0.98661, 1e-5);
  EXPECT_NEAR(LambdaAt(LambdaSchedule::kSigmoidRamp, 50, 0.3, 10.0, 100, SigmoidSign::kAsWritten),
              -std::tanh(2.5), 1e-12);
}

TEST(Lambda, RampIsMonotone) {
  double prev = -1.0;
  for (int e = 0; e <= 100; ++e) {
    const double l = LambdaAt(LambdaSchedule::kSigmoidRamp, e, 0.3, 10.0, 100);
    EXPECT_GT(l, prev);
    EXPECT_LT(l, 1.0);
    prev = l;
  }
}

TEST(Stages, PaperBoundaries) {
  const std::array<int, 3> b = {25, 50, 75};
  const StagePlan s10 = StageAt(10, b);
  EXPECT_EQ(s10.stage, Stage::kSpeakerOnly);
  EXPECT_EQ(s10.trainable, (BranchSet{Branch::kEncoder, Branch::kSpeaker}));
  EXPECT_FALSE(s10.grl);
  EXPECT_EQ(StageAt(25, b).stage, Stage::kStutterOnly);
  EXPECT_EQ(StageAt(25, b).trainable,
            (BranchSet{Branch::kEncoder, Branch::kFluent, Branch::kDisfluent}));
  const StagePlan s60 = StageAt(60, b);
  EXPECT_EQ(s60.stage, Stage::kJointGrl);
  EXPECT_TRUE(s60.grl);
  EXPECT_EQ(s60.trainable, BranchSet::All());
  const StagePlan s80 = StageAt(80, b);
  EXPECT_EQ(s80.stage, Stage::kRecovery);
  EXPECT_EQ(s80.trainable, (BranchSet{Branch::kFluent, Branch::kDisfluent}));
  EXPECT_FALSE(s80.grl);
  EXPECT_EQ(StageAt(24, b).stage, Stage::kSpeakerOnly);
  EXPECT_EQ(StageAt(49, b).stage, Stage::kStutterOnly);
  EXPECT_EQ(StageAt(74, b).stage, Stage::kJointGrl);
  EXPECT_EQ(StageAt(75, b).stage, Stage::kRecovery);
  EXPECT_EQ(StageAt(3, b, false).trainable, BranchSet{Branch::kSpeaker});
}

TEST(EarlyStop, SevenEpochsWithoutImprovement) {
  EarlyStopping es(7);
  EXPECT_FALSE(es.Update(1.0));
  EXPECT_FALSE(es.Update(0.9));
  for (int i = 0; i < 6; ++i) EXPECT_FALSE(es.Update(0.95));
  EXPECT_TRUE(es.Update(0.9));
}

TEST(EarlyStop, DecreasingNeverStops) {
  EarlyStopping es(7);
  for (int i = 0; i < 200; ++i) EXPECT_FALSE(es.Update(10.0 - 0.01 * i));
}

TEST(EarlyStop, ImprovementMustExceedDelta) {
  EarlyStopping es(2);
  es.Update(1.0);
  EXPECT_FALSE(es.Update(1.0 - 5e-7));
  EXPECT_FALSE(es.improved());
  EXPECT_TRUE(es.Update(1.0 - 9e-7));
  es.Reset();
  EXPECT_FALSE(es.Update(3.0));
  EXPECT_TRUE(es.improved());
  EXPECT_FALSE(es.Update(2.0));
  EXPECT_EQ(es.since_improvement(), 0);
  EXPECT_EQ(es.best(), 2.0);
}

TEST(GrlIdentities, HoldOnSeededBatches) {
  for (uint64_t seed : {1u, 2u, 3u}) {
    for (double lambda : {0.1, 0.3, 0.9}) {
      const gradsuite::GrlIdentityReport r = gradsuite::CheckGrlIdentities<double>(seed, lambda);
      EXPECT_TRUE(r.forward_bitwise);
      EXPECT_LE(r.speaker_term_rel, 1e-6);
      EXPECT_TRUE(r.speaker_head_equal);
      EXPECT_TRUE(r.lambda0_bitwise);
    }
  }
  const gradsuite::GrlIdentityReport f = gradsuite::CheckGrlIdentities<float>(1, 0.3);
  EXPECT_TRUE(f.forward_bitwise);
  EXPECT_TRUE(f.lambda0_bitwise);
}

TEST(BatchLosses, ComponentsAndTotal) {
  gradsuite::ModelFixture<double> f(4);
  for (TrainMode mode : {TrainMode::kBaseline, TrainMode::kMtl, TrainMode::kAdv}) {
    const BatchLosses l = f.Run(mode, Stage::kJoint, 0.3, false);
    EXPECT_DOUBLE_EQ(l.stutter, l.fluent + l.disfluent);
    EXPECT_DOUBLE_EQ(l.total, ComposeTotal(mode, l.stutter, l.speaker, 0.3));
  }
}

TEST(BatchLosses, AllFluentBatchHasZeroDisfluentLoss) {
  gradsuite::ModelFixture<double> f(4);
  for (auto& d : f.batch.disfluent) d = -1;
  for (auto& c : f.batch.fluent) c = 0;
  const BatchLosses l = f.Run(TrainMode::kBaseline, Stage::kJoint, 0.3, false);
  EXPECT_EQ(l.disfluent, 0.0);
  EXPECT_GT(l.fluent, 0.0);
}

TEST(BatchLosses, EmptyBatch) {
  Model<float> m(gradsuite::SmallArch(), 1);
  EXPECT_MBTDNN_ERROR(ComputeBatchLosses(m, LabeledBatch<float>{}, TrainMode::kBaseline, 0.3,
                                         nn::Mode::kTrain),
                      kEmptyBatch);
}

TEST(Batches, TrailingSingletonJoinsPrevious) {
  std::vector<size_t> order(33);
  std::iota(order.begin(), order.end(), 0);
  auto b = MakeBatches(order, 32);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].size(), 33u);
  order.push_back(33);
  b = MakeBatches(order, 32);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].size(), 2u);
  order.resize(64);
  EXPECT_EQ(MakeBatches(order, 32).size(), 2u);
}

TEST(Config, Validation) {
  TrainConfig c;
  c.mode = TrainMode::kMtl;
  c.lambda = 1.5;
  EXPECT_MBTDNN_ERROR(c.Validate(), kInvalidConfig);
  c.lambda = 0.0;
  EXPECT_MBTDNN_ERROR(c.Validate(), kInvalidConfig);
  c = {};
  c.batch_size = 1;
  EXPECT_MBTDNN_ERROR(c.Validate(), kInvalidConfig);
  c = {};
  c.stage_boundaries = {25, 25, 75};
  EXPECT_MBTDNN_ERROR(c.Validate(), kInvalidConfig);
  c = {};
  c.patience = 0;
  EXPECT_MBTDNN_ERROR(c.Validate(), kInvalidConfig);
  c = {};
  c.mode = TrainMode::kAdv;
  c.schedule = LambdaSchedule::kDecay10;
  EXPECT_NO_THROW(c.Validate());
}

class TrainLoop : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticConfig cfg;
    cfg.n_podcasts = 3;
    cfg.class_counts = {8, 8, 8, 8, 8};
    cfg.frames = 20;
    cfg.dim = 8;
    cfg.noise = 0.3;
    cfg.seed = 1;
    train = GenerateSynthetic(cfg);
    cfg.seed = 2;
    valid = GenerateSynthetic(cfg);
    arch.input_dim = 8;
    arch.channels = {8, 8, 8, 8, 8};
    arch.head_hidden = {8, 8};
    arch.n_podcasts = 3;
    tc.batch_size = 8;
    tc.max_epochs = 9;
    tc.patience = 100;
    tc.seed = 5;
  }

  std::vector<ClipRecord> train, valid;
  ArchConfig arch;
  TrainConfig tc;
};

TEST_F(TrainLoop, SameSeedSameLog) {
  tc.mode = TrainMode::kMtl;
  tc.max_epochs = 4;
  Model<float> a(arch, 1), b(arch, 1);
  const TrainResult ra = Train(a, tc, train, valid);
  const TrainResult rb = Train(b, tc, train, valid);
  std::ostringstream la, lb;
  WriteEpochLog(la, ra.log);
  WriteEpochLog(lb, rb.log);
  EXPECT_EQ(la.str(), lb.str());
  EXPECT_EQ(ra.log.size(), 4u);
  EXPECT_EQ(la.str().substr(0, la.str().find('\n')),
            "epoch,stage,lambda,l_fluent,l_disfluent,l_speaker,l_total,valid_stutter_loss,"
            "train_acc,valid_acc");
}

TEST_F(TrainLoop, AdversarialStagesAndRecoveryFreeze) {
  tc.mode = TrainMode::kAdv;
  tc.stage_boundaries = {2, 4, 6};
  Model<float> m(arch, 1);
  std::vector<nn::RowMatrix<float>> frozen;
  auto values = [&] {
    std::vector<nn::RowMatrix<float>> v;
    for (Branch b : {Branch::kEncoder, Branch::kSpeaker}) {
      for (auto* p : m.Params(b)) v.push_back(p->value);
    }
    return v;
  };
  bool recovery_changed = false;
  const TrainResult r = Train(m, tc, train, valid, [&](const EpochLog& e) {
    if (e.epoch == 5) frozen = values();
    if (e.epoch > 5) recovery_changed |= !gradsuite::Bitwise(values(), frozen);
  });
  ASSERT_EQ(r.log.size(), 9u);
  const Stage expected[] = {Stage::kSpeakerOnly, Stage::kSpeakerOnly, Stage::kStutterOnly,
                            Stage::kStutterOnly, Stage::kJointGrl,    Stage::kJointGrl,
                            Stage::kRecovery,    Stage::kRecovery,    Stage::kRecovery};
  for (size_t i = 0; i < r.log.size(); ++i) EXPECT_EQ(r.log[i].stage, expected[i]) << i;
  EXPECT_FALSE(recovery_changed);
  EXPECT_GE(r.best_epoch, 6);
  EXPECT_TRUE(gradsuite::Bitwise(values(), frozen));
}

TEST_F(TrainLoop, BaselineCheckpointsBestEpoch) {
  Model<float> m(arch, 1);
  const TrainResult r = Train(m, tc, train, valid);
  ASSERT_GE(r.best_epoch, 0);
  double best = std::numeric_limits<double>::infinity();
  for (const EpochLog& e : r.log) best = std::min(best, e.valid_stutter_loss);
  EXPECT_EQ(r.best_valid_loss, best);
  const EvalLosses now = Evaluate(m, valid, MakePodcastIndex(r.podcasts));
  EXPECT_NEAR(now.stutter(), best, 1e-5);
  EXPECT_EQ(m.trainable(), BranchSet::All());
}

TEST_F(TrainLoop, EarlyStopping) {
  tc.lr = 1e-9;
  tc.patience = 2;
  tc.max_epochs = 50;
  Model<float> m(arch, 1);
  const TrainResult r = Train(m, tc, train, valid);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_LT(r.log.size(), 50u);
}

TEST_F(TrainLoop, NonFiniteLossIsReported) {
  auto bad = std::make_shared<FeatureMatrix>(*train[0].features);
  bad->coeffs(0, 0) = std::numeric_limits<float>::quiet_NaN();
  train[0].features = bad;
  Model<float> m(arch, 1);
  EXPECT_MBTDNN_ERROR(Train(m, tc, train, valid), kNumericFailure);
}

TEST_F(TrainLoop, SpeakerHeadMustMatchTrainPodcasts) {
  arch.n_podcasts = 4;
  Model<float> m(arch, 1);
  EXPECT_MBTDNN_ERROR(Train(m, tc, train, valid), kInvalidConfig);
}

TEST(Evaluate, LossesAverageOverLabeledClips) {
  SyntheticConfig cfg;
  cfg.n_podcasts = 2;
  cfg.class_counts = {5, 3, 2, 2, 1};
  cfg.frames = 16;
  cfg.dim = 8;
  const auto records = GenerateSynthetic(cfg);
  ArchConfig a = gradsuite::SmallArch();
  a.input_dim = 8;
  a.n_podcasts = 2;
  Model<float> model(a, 2);
  const PodcastIndex podcasts = MakePodcastIndex(DistinctPodcasts(records));
  const EvalLosses l = Evaluate(model, records, podcasts, 4);
  std::vector<size_t> all(records.size());
  std::iota(all.begin(), all.end(), 0);
  const LabeledBatch<float> batch = MakeLabeledBatch<float>(records, all, podcasts);
  const BatchLosses full =
      ComputeBatchLosses(model, batch, TrainMode::kMtl, 0.3, nn::Mode::kEval);
  EXPECT_NEAR(l.fluent, full.fluent, 1e-5);
  EXPECT_NEAR(l.disfluent, full.disfluent, 1e-5);
  EXPECT_NEAR(l.speaker, full.speaker, 1e-5);
}

}  // namespace
}  // namespace mbtdnn
