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

#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "grad_suite.h"
#include "mbtdnn/model/model.h"
#include "mbtdnn/model/stutter_class.h"
#include "mbtdnn/nn/adam.h"
#include "mbtdnn/training/objective.h"
#include "test_util.h"

namespace mbtdnn {
namespace {

using MatF = nn::Matrix<float>;

ArchConfig Small(int n_podcasts = 3) {
  ArchConfig a;
  a.input_dim = 6;
  a.channels = {8, 8, 8, 8, 8};
  a.head_hidden = {8, 8};
  a.n_podcasts = n_podcasts;
  return a;
}

nn::SequenceBatch<float> RandomBatch(const std::vector<int>& lengths, int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::SequenceBatch<float> x;
  x.lengths = lengths;
  int total = 0;
  for (int l : lengths) total += l;
  x.data = gradsuite::Random<float>(dim, total, rng, -2.0, 2.0);
  return x;
}

bool SameValues(const std::vector<nn::RowMatrix<float>>& a,
                const std::vector<nn::RowMatrix<float>>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) return false;
  }
  return true;
}

std::vector<nn::RowMatrix<float>> ValuesOf(const std::vector<nn::Param<float>*>& params) {
  std::vector<nn::RowMatrix<float>> out;
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

TEST(Arch, SameSeedSameParameters) {
  Model<float> a(ArchConfig{}, 7), b(ArchConfig{}, 7), c(ArchConfig{}, 8);
  EXPECT_TRUE(SameValues(a.Snapshot(), b.Snapshot()));
  EXPECT_FALSE(SameValues(a.Snapshot(), c.Snapshot()));
}

TEST(Arch, DefaultShapes) {
  Model<float> m(ArchConfig{}, 1);
  const auto& w = m.encoder_block(0).tdnn().weight();
  EXPECT_EQ(w.shape, (std::vector<int>{64, 20, 5}));
  EXPECT_EQ(m.head(Branch::kFluent).output_layer().out_dim(), 2);
  EXPECT_EQ(m.head(Branch::kDisfluent).output_layer().out_dim(), 4);
  ArchConfig eight;
  eight.n_podcasts = 8;
  EXPECT_EQ(Model<float>(eight, 1).head(Branch::kSpeaker).output_layer().out_dim(), 8);
}

TEST(Arch, PartitionsAreDisjointAndCover) {
  Model<float> m(Small(), 1);
  std::set<const void*> seen;
  size_t total = 0;
  for (Branch b : {Branch::kEncoder, Branch::kFluent, Branch::kDisfluent, Branch::kSpeaker}) {
    for (auto* p : m.Params(b)) {
      EXPECT_TRUE(seen.insert(p).second) << p->name;
      ++total;
    }
  }
  EXPECT_EQ(total, m.AllParams().size());
}

TEST(Arch, InvalidConfigurations) {
  ArchConfig a = Small();
  a.channels = {8, 8, 8, 8};
  EXPECT_MBTDNN_ERROR(a.Validate(), kInvalidArch);
  a = Small(1);
  EXPECT_MBTDNN_ERROR(a.Validate(), kInvalidArch);
  a = Small();
  a.n_fluent = 3;
  EXPECT_MBTDNN_ERROR(a.Validate(), kInvalidArch);
  a = Small();
  a.dropout = 1.0;
  EXPECT_ANY_THROW(Model<float>(a, 1));
}

TEST(Encode, EmbeddingLength) {
  Model<float> m(ArchConfig{}, 1);
  const MatF z = m.Encode(RandomBatch({299}, 20, 2), nn::Mode::kEval);
  EXPECT_EQ(z.rows(), 128);
  EXPECT_EQ(z.cols(), 1);
}

TEST(Encode, LayerLengths) {
  EXPECT_EQ(ArchConfig::LayerLengths(299), (std::vector<int>{295, 291, 285, 285, 285}));
  EXPECT_EQ(ArchConfig::TotalSpan(), 14);
  EXPECT_EQ(ArchConfig::MinFrames(), 15);
  for (int t = 15; t < 400; ++t) {
    const std::vector<int> l = ArchConfig::LayerLengths(t);
    EXPECT_EQ(l.back(), t - 14);
    EXPECT_EQ(l[0], t - 4);
    EXPECT_EQ(l[1], t - 8);
    EXPECT_EQ(l[2], t - 14);
  }
}

TEST(Encode, MinimumLengthPoolsOneFrame) {
  Model<float> m(Small(), 1);
  const MatF z = m.Encode(RandomBatch({15}, 6, 3), nn::Mode::kEval);
  EXPECT_LT(z.bottomRows(8).cwiseAbs().maxCoeff(), 1e-4f);
  EXPECT_MBTDNN_ERROR(m.Encode(RandomBatch({14}, 6, 3), nn::Mode::kEval), kInputTooShort);
}

TEST(Encode, BatchedEqualsSingleInEvalMode) {
  Model<float> m(Small(), 1);
  const nn::SequenceBatch<float> both = RandomBatch({20, 31}, 6, 4);
  nn::SequenceBatch<float> first, second;
  first.lengths = {20};
  first.data = both.data.leftCols(20);
  second.lengths = {31};
  second.data = both.data.rightCols(31);
  const MatF z = m.Encode(both, nn::Mode::kEval);
  EXPECT_TRUE(z.col(0).isApprox(m.Encode(first, nn::Mode::kEval), 1e-5f));
  EXPECT_TRUE(z.col(1).isApprox(m.Encode(second, nn::Mode::kEval), 1e-5f));
}

TEST(Encode, IndependentOfSpeakerHead) {
  Model<float> m(Small(), 1);
  const nn::SequenceBatch<float> x = RandomBatch({20, 25}, 6, 5);
  const MatF before = m.Encode(x, nn::Mode::kEval);
  for (auto* p : m.Params(Branch::kSpeaker)) p->value.setConstant(3.0f);
  EXPECT_EQ(m.Encode(x, nn::Mode::kEval), before);
  EXPECT_EQ(m.Forward(x, nn::Mode::kEval, 0.5).embedding, before);
}

TEST(Heads, GrlDoesNotChangeForward) {
  Model<float> m(Small(), 1);
  const MatF z = m.Encode(RandomBatch({20, 25, 18}, 6, 6), nn::Mode::kEval);
  const ModelOutputs<float> plain = m.HeadForward(z, nn::Mode::kEval);
  const ModelOutputs<float> rev = m.HeadForward(z, nn::Mode::kEval, 0.7);
  EXPECT_EQ(plain.fluent, rev.fluent);
  EXPECT_EQ(plain.disfluent, rev.disfluent);
  EXPECT_EQ(plain.speaker, rev.speaker);
  EXPECT_EQ(plain.fluent.rows(), 2);
  EXPECT_EQ(plain.disfluent.rows(), 4);
  EXPECT_EQ(plain.speaker.rows(), 3);
  const ModelOutputs<float> again = m.HeadForward(z, nn::Mode::kEval);
  EXPECT_EQ(plain.fluent, again.fluent);
}

TEST(Heads, TrainModeForwardIsSeeded) {
  Model<float> m(Small(), 1);
  const MatF z = m.Encode(RandomBatch({20, 25, 18}, 6, 6), nn::Mode::kEval);
  m.ReseedDropout(3);
  const MatF a = m.HeadForward(z, nn::Mode::kTrain).fluent;
  m.ReseedDropout(3);
  EXPECT_EQ(m.HeadForward(z, nn::Mode::kTrain).fluent, a);
}

TEST(Heads, WrongEmbeddingSize) {
  Model<float> m(Small(), 1);
  EXPECT_MBTDNN_ERROR(m.HeadForward(MatF::Zero(15, 2), nn::Mode::kEval), kShapeMismatch);
}

TEST(Decide, Examples) {
  EXPECT_EQ(DecideClass(Eigen::Vector2f(2, 1), Eigen::Vector4f(0, 0, 5, 0)), StutterClass::kFluent);
  EXPECT_EQ(DecideClass(Eigen::Vector2f(1, 2), Eigen::Vector4f(0, 0, 0, 5)),
            StutterClass::kInterjection);
  EXPECT_EQ(DecideClass(Eigen::Vector2f(1, 1), Eigen::Vector4f(0, 9, 0, 0)), StutterClass::kFluent);
  EXPECT_EQ(DecideClass(Eigen::Vector2f(0, 1), Eigen::Vector4f(3, 3, 3, 3)),
            StutterClass::kRepetition);
}

TEST(Decide, FluentArgmaxAlwaysWins) {
  std::mt19937_64 rng(17);
  std::normal_distribution<float> n(0.0f, 3.0f);
  for (int trial = 0; trial < 20000; ++trial) {
    const Eigen::Vector2f f(n(rng), n(rng));
    const Eigen::Vector4f d(n(rng), n(rng), n(rng), n(rng));
    const StutterClass c = DecideClass(f, d);
    if (f[0] >= f[1]) {
      ASSERT_EQ(c, StutterClass::kFluent);
    } else {
      int best = 0;
      for (int k = 1; k < 4; ++k) {
        if (d[k] > d[best]) best = k;
      }
      ASSERT_EQ(static_cast<int>(c), best + 1);
    }
  }
}

TEST(Decide, PredictIgnoresSpeakerHead) {
  Model<float> m(Small(), 1);
  const nn::SequenceBatch<float> x = RandomBatch({20, 25, 18, 30}, 6, 8);
  const std::vector<StutterClass> before = m.Predict(x);
  for (auto* p : m.Params(Branch::kSpeaker)) p->value.setRandom();
  EXPECT_EQ(m.Predict(x), before);
}

TEST(ClassNames, FixedMapping) {
  EXPECT_EQ(static_cast<int>(StutterClass::kFluent), 0);
  EXPECT_EQ(static_cast<int>(StutterClass::kRepetition), 1);
  EXPECT_EQ(static_cast<int>(StutterClass::kProlongation), 2);
  EXPECT_EQ(static_cast<int>(StutterClass::kBlock), 3);
  EXPECT_EQ(static_cast<int>(StutterClass::kInterjection), 4);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto cls = static_cast<StutterClass>(c);
    EXPECT_EQ(ParseClass(ClassName(cls)), cls);
    EXPECT_EQ(ParseClass(std::string(1, ClassLetter(cls))), cls);
  }
}

class FreezeTest : public ::testing::Test {
 protected:
  void Step(BranchSet trainable, Stage stage, TrainMode mode) {
    model.SetTrainable(trainable);
    nn::Adam<float> adam;
    for (int i = 0; i < 3; ++i) {
      model.ZeroGrad();
      ComputeBatchLosses(model, fixture.batch, mode, 0.3, nn::Mode::kTrain, stage,
                         BackwardOptions{.enabled = true,
                                         .to_encoder = trainable.contains(Branch::kEncoder)});
      adam.Step(model.TrainableParams());
    }
  }

  gradsuite::ModelFixture<float> fixture{3};
  Model<float>& model = fixture.model;
};

TEST_F(FreezeTest, FrozenEncoderIsBitIdentical) {
  const auto encoder = ValuesOf(model.Params(Branch::kEncoder));
  const auto speaker = ValuesOf(model.Params(Branch::kSpeaker));
  Step({Branch::kSpeaker}, Stage::kSpeakerOnly, TrainMode::kAdv);
  EXPECT_TRUE(SameValues(ValuesOf(model.Params(Branch::kEncoder)), encoder));
  EXPECT_FALSE(SameValues(ValuesOf(model.Params(Branch::kSpeaker)), speaker));
}

TEST_F(FreezeTest, FrozenSpeakerIsBitIdentical) {
  const auto speaker = ValuesOf(model.Params(Branch::kSpeaker));
  const auto encoder = ValuesOf(model.Params(Branch::kEncoder));
  Step({Branch::kFluent, Branch::kDisfluent}, Stage::kRecovery, TrainMode::kAdv);
  EXPECT_TRUE(SameValues(ValuesOf(model.Params(Branch::kSpeaker)), speaker));
  EXPECT_TRUE(SameValues(ValuesOf(model.Params(Branch::kEncoder)), encoder));
}

TEST_F(FreezeTest, AllBranchesMove) {
  const auto before = model.Snapshot();
  Step(BranchSet::All(), Stage::kJoint, TrainMode::kMtl);
  for (Branch b : {Branch::kEncoder, Branch::kFluent, Branch::kDisfluent, Branch::kSpeaker}) {
    Model<float> fresh(gradsuite::SmallArch(), 3);
    EXPECT_FALSE(SameValues(ValuesOf(model.Params(b)), ValuesOf(fresh.Params(b)))) << BranchName(b);
  }
}

TEST_F(FreezeTest, EmptySubset) {
  EXPECT_MBTDNN_ERROR(model.SetTrainable(BranchSet{}), kEmptySubset);
  EXPECT_EQ(BranchSet::Parse("{E,S}"), (BranchSet{Branch::kEncoder, Branch::kSpeaker}));
  EXPECT_MBTDNN_ERROR(BranchSet::Parse("EQ"), kInvalidConfig);
}

TEST(Snapshot, RestoreRoundTrip) {
  Model<float> m(Small(), 1);
  const auto saved = m.Snapshot();
  for (auto* p : m.AllParams()) p->value.setZero();
  m.Restore(saved);
  EXPECT_TRUE(SameValues(m.Snapshot(), saved));
}

TEST(Gradient, FullModelDouble) {
  const gradsuite::Case mtl = gradsuite::ModelMtlCase<double>(gradsuite::kModelSeed, 1e-6);
  const gradsuite::Case adv = gradsuite::ModelAdvCase<double>(gradsuite::kModelSeed, 1e-6);
  EXPECT_TRUE(mtl.report.pass) << mtl.report.max_rel_error();
  EXPECT_TRUE(adv.report.pass) << adv.report.max_rel_error();
}

}  // namespace
}  // namespace mbtdnn
