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

#ifndef MBTDNN_MODEL_MODEL_H_
#define MBTDNN_MODEL_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mbtdnn/dsp/feature_matrix.h"
#include "mbtdnn/model/stutter_class.h"
#include "mbtdnn/nn/layers.h"
#include "mbtdnn/nn/pooling.h"
#include "mbtdnn/nn/tdnn.h"
#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {

enum class BnOrder { kReluThenBn, kBnThenRelu };

// Network shape. The five temporal contexts are fixed; widths are not.
struct ArchConfig {
  int input_dim = 20;
  std::vector<int> channels = {64, 64, 64, 64, 64};
  std::vector<int> head_hidden = {64, 64};
  int n_fluent = 2;
  int n_disfluent = 4;
  int n_podcasts = 2;
  double dropout = 0.2;
  BnOrder bn_order = BnOrder::kReluThenBn;

  static const std::array<std::vector<int>, 5>& Contexts();

  // Throws InvalidArch.
  void Validate() const;
  int embedding_dim() const { return 2 * channels.back(); }
  // Frames consumed by the five layers together.
  static int TotalSpan();
  // Shortest input that leaves one frame for pooling.
  static int MinFrames() { return TotalSpan() + 1; }
  // Frame count after each encoder layer for an input of `frames`.
  static std::vector<int> LayerLengths(int frames);

  bool operator==(const ArchConfig&) const = default;
};

// Parameter partitions: encoder and the three heads.
enum class Branch { kEncoder = 0, kFluent = 1, kDisfluent = 2, kSpeaker = 3 };
inline constexpr std::array<Branch, 4> kAllBranches = {Branch::kEncoder, Branch::kFluent,
                                                       Branch::kDisfluent, Branch::kSpeaker};
const char* BranchName(Branch b);

class BranchSet {
 public:
  constexpr BranchSet() = default;
  constexpr BranchSet(std::initializer_list<Branch> branches) {
    for (Branch b : branches) bits_ |= Bit(b);
  }
  static constexpr BranchSet All() {
    return {Branch::kEncoder, Branch::kFluent, Branch::kDisfluent, Branch::kSpeaker};
  }
  // Letters E, F, D, S in any order, optionally comma separated.
  static BranchSet Parse(const std::string& text);

  constexpr bool contains(Branch b) const { return (bits_ & Bit(b)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  std::string ToString() const;
  constexpr bool operator==(const BranchSet&) const = default;

 private:
  static constexpr unsigned Bit(Branch b) { return 1u << static_cast<unsigned>(b); }
  unsigned bits_ = 0;
};

// Argmax of the fluent head decides Fluent vs. disfluent; only for a
// disfluent call is the four-way head consulted. Ties go to the lower index.
template <typename Derived1, typename Derived2>
StutterClass DecideClass(const Eigen::MatrixBase<Derived1>& fluent_logits,
                         const Eigen::MatrixBase<Derived2>& disfluent_logits);

template <typename T>
nn::SequenceBatch<T> MakeSequenceBatch(const std::vector<const FeatureMatrix*>& clips);

template <typename T>
struct ModelOutputs {
  nn::Matrix<T> embedding;  // 2C x B
  nn::Matrix<T> fluent;     // 2 x B
  nn::Matrix<T> disfluent;  // 4 x B
  nn::Matrix<T> speaker;    // n_podcasts x B
};

// Gradients of the objective with respect to each head's logits. A null
// pointer skips that head's backward pass.
template <typename T>
struct HeadGradients {
  const nn::Matrix<T>* fluent = nullptr;
  const nn::Matrix<T>* disfluent = nullptr;
  const nn::Matrix<T>* speaker = nullptr;
  bool propagate_to_encoder = true;
};

template <typename T>
class EncoderBlock {
 public:
  EncoderBlock() = default;
  EncoderBlock(const std::string& name, int in_dim, int out_dim, std::vector<int> offsets,
               BnOrder order);

  nn::SequenceBatch<T> Forward(const nn::SequenceBatch<T>& x, nn::Mode mode, bool update_stats);
  nn::SequenceBatch<T> Backward(const nn::SequenceBatch<T>& d_out, bool need_input_grad);
  std::vector<nn::Param<T>*> Params();
  nn::TdnnLayer<T>& tdnn() { return tdnn_; }

 private:
  nn::TdnnLayer<T> tdnn_;
  nn::Relu<T> relu_;
  nn::BatchNorm<T> bn_;
  BnOrder order_ = BnOrder::kReluThenBn;
  std::vector<int> lengths_;
};

// Three fully connected layers; the first two are followed by ReLU,
// batch-norm and dropout, the last emits logits.
template <typename T>
class Head {
 public:
  Head() = default;
  Head(const std::string& name, int in_dim, const std::vector<int>& hidden, int out_dim,
       double dropout, BnOrder order);

  nn::Matrix<T> Forward(const nn::Matrix<T>& z, nn::Mode mode, bool update_stats,
                        std::mt19937_64& rng);
  nn::Matrix<T> Backward(const nn::Matrix<T>& d_logits);
  std::vector<nn::Param<T>*> Params();
  nn::Linear<T>& output_layer() { return fc_.back(); }

 private:
  nn::Matrix<T> Activate(size_t i, const nn::Matrix<T>& x, nn::Mode mode, bool update_stats);
  nn::Matrix<T> ActivateBackward(size_t i, const nn::Matrix<T>& d);

  std::vector<nn::Linear<T>> fc_;
  std::vector<nn::Relu<T>> relu_;
  std::vector<nn::BatchNorm<T>> bn_;
  std::vector<nn::Dropout<T>> dropout_;
  BnOrder order_ = BnOrder::kReluThenBn;
};

// Shared TDNN encoder with statistics pooling, plus the fluent, disfluent
// and speaker heads. Parameters are owned here; the training loop owns the
// model.
template <typename T>
class Model {
 public:
  // Deterministic in `seed`.
  Model(const ArchConfig& arch, uint64_t seed);

  const ArchConfig& arch() const { return arch_; }

  // Shared encoder only: 2C x B embedding.
  nn::Matrix<T> Encode(const nn::SequenceBatch<T>& x, nn::Mode mode);
  // Heads on a given embedding. When `grl_lambda` is set the speaker head
  // sits behind a gradient reversal layer with that coefficient.
  ModelOutputs<T> HeadForward(const nn::Matrix<T>& z, nn::Mode mode,
                              std::optional<double> grl_lambda = std::nullopt);
  ModelOutputs<T> Forward(const nn::SequenceBatch<T>& x, nn::Mode mode,
                          std::optional<double> grl_lambda = std::nullopt);
  // Accumulates gradients into every parameter on the paths reached.
  void Backward(const HeadGradients<T>& grads);
  // Gradient that reached the embedding during the last Backward().
  const nn::Matrix<T>& embedding_grad() const { return d_embedding_; }

  std::vector<StutterClass> Predict(const nn::SequenceBatch<T>& x);

  void ZeroGrad();
  std::vector<nn::Param<T>*> Params(Branch b);
  std::vector<nn::Param<T>*> AllParams();
  std::vector<nn::Param<T>*> TrainableParams();
  int64_t NumParams(Branch b);

  // Selects the partitions the optimizer may update. Frozen partitions also
  // keep their batch-norm running statistics fixed. Throws EmptySubset.
  void SetTrainable(BranchSet branches);
  BranchSet trainable() const { return trainable_; }

  // Copies of every parameter value, for best-epoch checkpointing.
  std::vector<nn::RowMatrix<T>> Snapshot();
  void Restore(const std::vector<nn::RowMatrix<T>>& values);

  std::mt19937_64& dropout_rng() { return dropout_rng_; }
  void ReseedDropout(uint64_t seed);

  EncoderBlock<T>& encoder_block(int i) { return blocks_[i]; }
  Head<T>& head(Branch b);

 private:
  ArchConfig arch_;
  std::vector<EncoderBlock<T>> blocks_;
  nn::StatsPooling<T> pooling_;
  Head<T> fluent_;
  Head<T> disfluent_;
  Head<T> speaker_;
  nn::GradReverse<T> grl_;
  std::optional<double> grl_lambda_;
  BranchSet trainable_ = BranchSet::All();
  std::mt19937_64 dropout_rng_;
  nn::Matrix<T> d_embedding_;
};

extern template class Model<float>;
extern template class Model<double>;

template <typename Derived1, typename Derived2>
StutterClass DecideClass(const Eigen::MatrixBase<Derived1>& fluent_logits,
                         const Eigen::MatrixBase<Derived2>& disfluent_logits) {
  int f = 0;
  for (Eigen::Index i = 1; i < fluent_logits.size(); ++i) {
    if (fluent_logits(i) > fluent_logits(f)) f = static_cast<int>(i);
  }
  if (f == static_cast<int>(FluentLabel::kFluent)) return StutterClass::kFluent;
  int d = 0;
  for (Eigen::Index i = 1; i < disfluent_logits.size(); ++i) {
    if (disfluent_logits(i) > disfluent_logits(d)) d = static_cast<int>(i);
  }
  return FromDisfluentIndex(d);
}

}  // namespace mbtdnn

#endif  // MBTDNN_MODEL_MODEL_H_
