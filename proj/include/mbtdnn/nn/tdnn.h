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

#ifndef MBTDNN_NN_TDNN_H_
#define MBTDNN_NN_TDNN_H_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {
namespace nn {

// Time-delay layer: a valid (unpadded) 1-D convolution whose taps sit at the
// given frame offsets.
//
//   out[c, t] = b[c] + sum_k sum_c' W[c, c', k] * in[c', t + off[k] - off[0]]
//
// W has shape {out_dim, in_dim, K}; the output is span = off.back() -
// off.front() frames shorter than the input.
template <typename T>
class TdnnLayer {
 public:
  TdnnLayer() = default;
  TdnnLayer(const std::string& name, int in_dim, int out_dim, std::vector<int> offsets)
      : in_dim_(in_dim),
        out_dim_(out_dim),
        offsets_(std::move(offsets)),
        weight_(name + ".weight", {out_dim, in_dim, static_cast<int>(offsets_.size())}),
        bias_(name + ".bias", {out_dim}) {
    if (offsets_.empty() || !std::is_sorted(offsets_.begin(), offsets_.end()) ||
        std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end()) {
      throw Error(ErrorCode::kInvalidArch, name + ": offsets must be sorted and distinct");
    }
  }

  int span() const { return offsets_.back() - offsets_.front(); }
  int context_size() const { return static_cast<int>(offsets_.size()); }
  int OutputLength(int in_length) const { return in_length - span(); }
  const std::vector<int>& offsets() const { return offsets_; }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  const Param<T>& weight() const { return weight_; }
  const Param<T>& bias() const { return bias_; }

  void Init(std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / (in_dim_ * context_size()));
    InitUniform(weight_, bound, rng);
    InitUniform(bias_, bound, rng);
  }

  SequenceBatch<T> Forward(const SequenceBatch<T>& in) {
    CheckShape(in.channels() == in_dim_, weight_.name + ": expected " +
                                             std::to_string(in_dim_) + " input channels, got " +
                                             std::to_string(in.channels()));
    const int k_size = context_size();
    SequenceBatch<T> out;
    out.lengths.reserve(in.lengths.size());
    int total_out = 0;
    for (int len : in.lengths) {
      if (len <= span()) {
        throw Error(ErrorCode::kInputTooShort,
                    weight_.name + ": " + std::to_string(len) +
                        " frames do not cover a context span of " + std::to_string(span()));
      }
      out.lengths.push_back(len - span());
      total_out += len - span();
    }
    in_lengths_ = in.lengths;
    const int rows = in_dim_ * k_size;
    unfolded_.resize(rows, total_out);
    const std::vector<int> in_off = in.Offsets();
    int col = 0;
    for (size_t i = 0; i < in.lengths.size(); ++i) {
      const int out_len = out.lengths[i];
      for (int k = 0; k < k_size; ++k) {
        Eigen::Map<Matrix<T>, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> dst(
            unfolded_.data() + k + static_cast<Eigen::Index>(col) * rows, in_dim_, out_len,
            Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(rows, k_size));
        dst = in.data.block(0, in_off[i] + offsets_[k] - offsets_.front(), in_dim_, out_len);
      }
      col += out_len;
    }
    out.data.noalias() = weight_.value * unfolded_;
    out.data.colwise() += bias_.value.col(0);
    return out;
  }

  // Accumulates parameter gradients; returns the input gradient unless
  // `need_input_grad` is false, in which case the returned batch is empty.
  SequenceBatch<T> Backward(const SequenceBatch<T>& d_out, bool need_input_grad = true) {
    CheckShape(d_out.data.cols() == unfolded_.cols() && d_out.channels() == out_dim_,
               weight_.name + ": gradient does not match the last forward pass");
    weight_.grad.noalias() += d_out.data * unfolded_.transpose();
    bias_.grad.col(0) += d_out.data.rowwise().sum();
    SequenceBatch<T> d_in;
    if (!need_input_grad) return d_in;
    const Matrix<T> d_unfolded = weight_.value.transpose() * d_out.data;
    d_in.lengths = in_lengths_;
    const std::vector<int> in_off = d_in.Offsets();
    d_in.data = Matrix<T>::Zero(in_dim_, in_off.back());
    const int rows = in_dim_ * context_size();
    int col = 0;
    for (size_t i = 0; i < in_lengths_.size(); ++i) {
      const int out_len = d_out.lengths[i];
      for (int k = 0; k < context_size(); ++k) {
        Eigen::Map<const Matrix<T>, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>> src(
            d_unfolded.data() + k + static_cast<Eigen::Index>(col) * rows, in_dim_, out_len,
            Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(rows, context_size()));
        d_in.data.block(0, in_off[i] + offsets_[k] - offsets_.front(), in_dim_, out_len) += src;
      }
      col += out_len;
    }
    return d_in;
  }

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  std::vector<int> offsets_;
  Param<T> weight_;
  Param<T> bias_;
  Matrix<T> unfolded_;
  std::vector<int> in_lengths_;
};

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_TDNN_H_
