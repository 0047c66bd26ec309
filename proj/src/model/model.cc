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

#include "mbtdnn/model/model.h"

#include <numeric>

#include "mbtdnn/error.h"

namespace mbtdnn {

using nn::Matrix;
using nn::Mode;
using nn::Param;
using nn::SequenceBatch;

const std::array<std::vector<int>, 5>& ArchConfig::Contexts() {
  static const std::array<std::vector<int>, 5> contexts = {
      std::vector<int>{-2, -1, 0, 1, 2}, std::vector<int>{-2, 0, 2},
      std::vector<int>{-3, 0, 3}, std::vector<int>{0}, std::vector<int>{0}};
  return contexts;
}

int ArchConfig::TotalSpan() {
  int span = 0;
  for (const auto& c : Contexts()) span += c.back() - c.front();
  return span;
}

std::vector<int> ArchConfig::LayerLengths(int frames) {
  std::vector<int> lengths;
  for (const auto& c : Contexts()) {
    frames -= c.back() - c.front();
    lengths.push_back(frames);
  }
  return lengths;
}

void ArchConfig::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArch, what); };
  if (input_dim < 1) fail("input_dim must be positive");
  if (channels.size() != 5) fail("the encoder has exactly 5 TDNN layers");
  for (int c : channels) {
    if (c < 1) fail("channel widths must be positive");
  }
  if (head_hidden.size() != 2) fail("each head has exactly two hidden layers");
  for (int h : head_hidden) {
    if (h < 1) fail("head hidden sizes must be positive");
  }
  if (n_fluent != 2) fail("the fluent head is binary");
  if (n_disfluent != kNumDisfluentClasses) fail("the disfluent head has 4 outputs");
  if (n_podcasts < 2) fail("the speaker head needs at least 2 podcasts");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
}

const char* BranchName(Branch b) {
  switch (b) {
    case Branch::kEncoder: return "E";
    case Branch::kFluent: return "F";
    case Branch::kDisfluent: return "D";
    case Branch::kSpeaker: return "S";
  }
  return "?";
}

BranchSet BranchSet::Parse(const std::string& text) {
  BranchSet set;
  for (char ch : text) {
    switch (ch) {
      case 'E': case 'e': set.bits_ |= Bit(Branch::kEncoder); break;
      case 'F': case 'f': set.bits_ |= Bit(Branch::kFluent); break;
      case 'D': case 'd': set.bits_ |= Bit(Branch::kDisfluent); break;
      case 'S': case 's': set.bits_ |= Bit(Branch::kSpeaker); break;
      case ',': case ' ': case '{': case '}': break;
      default:
        throw Error(ErrorCode::kInvalidConfig, "unknown branch letter in '" + text + "'");
    }
  }
  return set;
}

std::string BranchSet::ToString() const {
  std::string s;
  for (Branch b : kAllBranches) {
    if (contains(b)) s += BranchName(b);
  }
  return s;
}

template <typename T>
SequenceBatch<T> MakeSequenceBatch(const std::vector<const FeatureMatrix*>& clips) {
  if (clips.empty()) throw Error(ErrorCode::kEmptyBatch, "no clips in batch");
  SequenceBatch<T> batch;
  int total = 0;
  const int rows = clips.front()->rows();
  for (const FeatureMatrix* m : clips) {
    nn::CheckShape(m->rows() == rows, "clips in a batch must share the feature dimension");
    batch.lengths.push_back(m->frames());
    total += m->frames();
  }
  batch.data.resize(rows, total);
  int col = 0;
  for (const FeatureMatrix* m : clips) {
    batch.data.middleCols(col, m->frames()) = m->coeffs.template cast<T>();
    col += m->frames();
  }
  return batch;
}

template SequenceBatch<float> MakeSequenceBatch<float>(const std::vector<const FeatureMatrix*>&);
template SequenceBatch<double> MakeSequenceBatch<double>(const std::vector<const FeatureMatrix*>&);

// ---------------------------------------------------------------------------

template <typename T>
EncoderBlock<T>::EncoderBlock(const std::string& name, int in_dim, int out_dim,
                              std::vector<int> offsets, BnOrder order)
    : tdnn_(name + ".tdnn", in_dim, out_dim, std::move(offsets)),
      bn_(name + ".bn", out_dim),
      order_(order) {}

template <typename T>
SequenceBatch<T> EncoderBlock<T>::Forward(const SequenceBatch<T>& x, Mode mode,
                                          bool update_stats) {
  SequenceBatch<T> y = tdnn_.Forward(x);
  if (order_ == BnOrder::kReluThenBn) {
    y.data = bn_.Forward(relu_.Forward(y.data), mode, update_stats);
  } else {
    y.data = relu_.Forward(bn_.Forward(y.data, mode, update_stats));
  }
  return y;
}

template <typename T>
SequenceBatch<T> EncoderBlock<T>::Backward(const SequenceBatch<T>& d_out, bool need_input_grad) {
  SequenceBatch<T> d = d_out;
  if (order_ == BnOrder::kReluThenBn) {
    d.data = relu_.Backward(bn_.Backward(d.data));
  } else {
    d.data = bn_.Backward(relu_.Backward(d.data));
  }
  return tdnn_.Backward(d, need_input_grad);
}

template <typename T>
std::vector<Param<T>*> EncoderBlock<T>::Params() {
  return {&tdnn_.weight(), &tdnn_.bias(), &bn_.gamma(), &bn_.beta(), &bn_.running_mean(),
          &bn_.running_var()};
}

// ---------------------------------------------------------------------------

template <typename T>
Head<T>::Head(const std::string& name, int in_dim, const std::vector<int>& hidden, int out_dim,
              double dropout, BnOrder order)
    : order_(order) {
  int prev = in_dim;
  for (size_t i = 0; i < hidden.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    fc_.emplace_back(name + ".fc" + idx, prev, hidden[i]);
    relu_.emplace_back();
    bn_.emplace_back(name + ".bn" + idx, hidden[i]);
    dropout_.emplace_back(dropout);
    prev = hidden[i];
  }
  fc_.emplace_back(name + ".fc" + std::to_string(hidden.size() + 1), prev, out_dim);
}

template <typename T>
Matrix<T> Head<T>::Activate(size_t i, const Matrix<T>& x, Mode mode, bool update_stats) {
  if (order_ == BnOrder::kReluThenBn) return bn_[i].Forward(relu_[i].Forward(x), mode, update_stats);
  return relu_[i].Forward(bn_[i].Forward(x, mode, update_stats));
}

template <typename T>
Matrix<T> Head<T>::ActivateBackward(size_t i, const Matrix<T>& d) {
  if (order_ == BnOrder::kReluThenBn) return relu_[i].Backward(bn_[i].Backward(d));
  return bn_[i].Backward(relu_[i].Backward(d));
}

template <typename T>
Matrix<T> Head<T>::Forward(const Matrix<T>& z, Mode mode, bool update_stats,
                           std::mt19937_64& rng) {
  Matrix<T> h = z;
  for (size_t i = 0; i < relu_.size(); ++i) {
    h = dropout_[i].Forward(Activate(i, fc_[i].Forward(h), mode, update_stats), mode, rng);
  }
  return fc_.back().Forward(h);
}

template <typename T>
Matrix<T> Head<T>::Backward(const Matrix<T>& d_logits) {
  Matrix<T> d = fc_.back().Backward(d_logits);
  for (size_t i = relu_.size(); i-- > 0;) {
    d = fc_[i].Backward(ActivateBackward(i, dropout_[i].Backward(d)));
  }
  return d;
}

template <typename T>
std::vector<Param<T>*> Head<T>::Params() {
  std::vector<Param<T>*> out;
  for (size_t i = 0; i < fc_.size(); ++i) {
    out.push_back(&fc_[i].weight());
    out.push_back(&fc_[i].bias());
    if (i < bn_.size()) {
      out.push_back(&bn_[i].gamma());
      out.push_back(&bn_[i].beta());
      out.push_back(&bn_[i].running_mean());
      out.push_back(&bn_[i].running_var());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

template <typename T>
Model<T>::Model(const ArchConfig& arch, uint64_t seed) : arch_(arch) {
  arch_.Validate();
  const auto& contexts = ArchConfig::Contexts();
  int prev = arch_.input_dim;
  for (int i = 0; i < 5; ++i) {
    blocks_.emplace_back("encoder.layer" + std::to_string(i + 1), prev, arch_.channels[i],
                         contexts[i], arch_.bn_order);
    prev = arch_.channels[i];
  }
  const int z = arch_.embedding_dim();
  fluent_ = Head<T>("fluent", z, arch_.head_hidden, arch_.n_fluent, arch_.dropout, arch_.bn_order);
  disfluent_ = Head<T>("disfluent", z, arch_.head_hidden, arch_.n_disfluent, arch_.dropout,
                       arch_.bn_order);
  speaker_ = Head<T>("speaker", z, arch_.head_hidden, arch_.n_podcasts, arch_.dropout,
                     arch_.bn_order);

  std::mt19937_64 init_rng(seed);
  for (auto& block : blocks_) block.tdnn().Init(init_rng);
  for (Head<T>* head : {&fluent_, &disfluent_, &speaker_}) {
    // Params() lists each fc weight before its bias; batch-norm parameters
    // keep their defaults.
    int fan_in = 0;
    for (Param<T>* p : head->Params()) {
      if (p->name.find(".fc") == std::string::npos) continue;
      if (p->shape.size() == 2) fan_in = p->shape[1];
      nn::InitUniform(*p, std::sqrt(1.0 / fan_in), init_rng);
    }
  }
  ReseedDropout(seed);
}

template <typename T>
void Model<T>::ReseedDropout(uint64_t seed) {
  std::seed_seq seq{static_cast<uint32_t>(seed & 0xFFFFFFFFu), static_cast<uint32_t>(seed >> 32),
                    0x64726f70u};
  dropout_rng_.seed(seq);
}

template <typename T>
Head<T>& Model<T>::head(Branch b) {
  switch (b) {
    case Branch::kFluent: return fluent_;
    case Branch::kDisfluent: return disfluent_;
    case Branch::kSpeaker: return speaker_;
    case Branch::kEncoder: break;
  }
  throw Error(ErrorCode::kInvalidArch, "the encoder is not a head");
}

template <typename T>
Matrix<T> Model<T>::Encode(const SequenceBatch<T>& x, Mode mode) {
  nn::CheckShape(x.channels() == arch_.input_dim,
                 "expected " + std::to_string(arch_.input_dim) + "-dimensional features, got " +
                     std::to_string(x.channels()));
  for (int len : x.lengths) {
    if (len < ArchConfig::MinFrames()) {
      throw Error(ErrorCode::kInputTooShort,
                  std::to_string(len) + " frames; the encoder needs at least " +
                      std::to_string(ArchConfig::MinFrames()));
    }
  }
  const bool update = trainable_.contains(Branch::kEncoder);
  SequenceBatch<T> h = blocks_[0].Forward(x, mode, update);
  for (size_t i = 1; i < blocks_.size(); ++i) h = blocks_[i].Forward(h, mode, update);
  return pooling_.Forward(h);
}

template <typename T>
ModelOutputs<T> Model<T>::HeadForward(const Matrix<T>& z, Mode mode,
                                      std::optional<double> grl_lambda) {
  nn::CheckShape(z.rows() == arch_.embedding_dim(), "embedding size mismatch");
  ModelOutputs<T> out;
  out.embedding = z;
  out.fluent = fluent_.Forward(z, mode, trainable_.contains(Branch::kFluent), dropout_rng_);
  out.disfluent =
      disfluent_.Forward(z, mode, trainable_.contains(Branch::kDisfluent), dropout_rng_);
  grl_lambda_ = grl_lambda;
  if (grl_lambda) {
    grl_.set_lambda(*grl_lambda);
    out.speaker = speaker_.Forward(grl_.Forward(z), mode, trainable_.contains(Branch::kSpeaker),
                                   dropout_rng_);
  } else {
    out.speaker = speaker_.Forward(z, mode, trainable_.contains(Branch::kSpeaker), dropout_rng_);
  }
  return out;
}

template <typename T>
ModelOutputs<T> Model<T>::Forward(const SequenceBatch<T>& x, Mode mode,
                                  std::optional<double> grl_lambda) {
  return HeadForward(Encode(x, mode), mode, grl_lambda);
}

template <typename T>
void Model<T>::Backward(const HeadGradients<T>& grads) {
  d_embedding_.resize(0, 0);
  auto accumulate = [this](const Matrix<T>& d) {
    if (d_embedding_.size() == 0) {
      d_embedding_ = d;
    } else {
      d_embedding_ += d;
    }
  };
  if (grads.fluent != nullptr) accumulate(fluent_.Backward(*grads.fluent));
  if (grads.disfluent != nullptr) accumulate(disfluent_.Backward(*grads.disfluent));
  if (grads.speaker != nullptr) {
    Matrix<T> d = speaker_.Backward(*grads.speaker);
    accumulate(grl_lambda_ ? grl_.Backward(d) : d);
  }
  if (!grads.propagate_to_encoder || d_embedding_.size() == 0) return;
  SequenceBatch<T> d = pooling_.Backward(d_embedding_);
  for (size_t i = blocks_.size(); i-- > 0;) d = blocks_[i].Backward(d, i > 0);
}

template <typename T>
std::vector<StutterClass> Model<T>::Predict(const SequenceBatch<T>& x) {
  ModelOutputs<T> out = Forward(x, Mode::kEval);
  std::vector<StutterClass> pred;
  pred.reserve(out.fluent.cols());
  for (Eigen::Index j = 0; j < out.fluent.cols(); ++j) {
    pred.push_back(DecideClass(out.fluent.col(j), out.disfluent.col(j)));
  }
  return pred;
}

template <typename T>
void Model<T>::ZeroGrad() {
  for (Param<T>* p : AllParams()) p->ZeroGrad();
}

template <typename T>
std::vector<Param<T>*> Model<T>::Params(Branch b) {
  if (b == Branch::kEncoder) {
    std::vector<Param<T>*> out;
    for (auto& block : blocks_) {
      auto p = block.Params();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }
  return head(b).Params();
}

template <typename T>
std::vector<Param<T>*> Model<T>::AllParams() {
  std::vector<Param<T>*> out;
  for (Branch b : kAllBranches) {
    auto p = Params(b);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

template <typename T>
std::vector<Param<T>*> Model<T>::TrainableParams() {
  std::vector<Param<T>*> out;
  for (Branch b : kAllBranches) {
    if (!trainable_.contains(b)) continue;
    for (Param<T>* p : Params(b)) {
      if (p->differentiable) out.push_back(p);
    }
  }
  return out;
}

template <typename T>
int64_t Model<T>::NumParams(Branch b) {
  int64_t n = 0;
  for (Param<T>* p : Params(b)) {
    if (p->differentiable) n += p->numel();
  }
  return n;
}

template <typename T>
void Model<T>::SetTrainable(BranchSet branches) {
  if (branches.empty()) throw Error(ErrorCode::kEmptySubset, "no trainable partition selected");
  trainable_ = branches;
}

template <typename T>
std::vector<nn::RowMatrix<T>> Model<T>::Snapshot() {
  std::vector<nn::RowMatrix<T>> out;
  for (Param<T>* p : AllParams()) out.push_back(p->value);
  return out;
}

template <typename T>
void Model<T>::Restore(const std::vector<nn::RowMatrix<T>>& values) {
  auto params = AllParams();
  nn::CheckShape(values.size() == params.size(), "snapshot does not match the model");
  for (size_t i = 0; i < params.size(); ++i) {
    nn::CheckShape(values[i].rows() == params[i]->value.rows() &&
                       values[i].cols() == params[i]->value.cols(),
                   params[i]->name + ": snapshot shape mismatch");
    params[i]->value = values[i];
  }
}

template class EncoderBlock<float>;
template class EncoderBlock<double>;
template class Head<float>;
template class Head<double>;
template class Model<float>;
template class Model<double>;

}  // namespace mbtdnn
