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

#ifndef MBTDNN_NN_POOLING_H_
#define MBTDNN_NN_POOLING_H_

#include <cmath>
#include <vector>

#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {
namespace nn {

// Statistics pooling: for each sample, per-channel mean over frames stacked
// on the population standard deviation sqrt(mean((x - mu)^2) + eps).
// Output is 2C x batch.
template <typename T>
class StatsPooling {
 public:
  explicit StatsPooling(double eps = 1e-9) : eps_(eps) {}

  Matrix<T> Forward(const SequenceBatch<T>& in) {
    const int c = in.channels();
    const int b = in.batch_size();
    lengths_ = in.lengths;
    centered_ = in.data;
    stddev_.resize(c, b);
    Matrix<T> out(2 * c, b);
    const std::vector<int> off = in.Offsets();
    for (int i = 0; i < b; ++i) {
      const int len = in.lengths[i];
      CheckShape(len >= 1, "statistics pooling needs at least one frame");
      auto block = centered_.middleCols(off[i], len);
      const Vector<T> mean = block.rowwise().mean();
      block.colwise() -= mean;
      const Vector<T> var = block.array().square().rowwise().mean();
      stddev_.col(i) = (var.array() + T(eps_)).sqrt();
      out.col(i).head(c) = mean;
      out.col(i).tail(c) = stddev_.col(i);
    }
    return out;
  }

  SequenceBatch<T> Backward(const Matrix<T>& d_out) const {
    const int c = static_cast<int>(centered_.rows());
    CheckShape(d_out.rows() == 2 * c && d_out.cols() == static_cast<int>(lengths_.size()),
               "statistics pooling: gradient does not match the last forward pass");
    SequenceBatch<T> d_in;
    d_in.lengths = lengths_;
    d_in.data.resize(c, centered_.cols());
    const std::vector<int> off = d_in.Offsets();
    for (size_t i = 0; i < lengths_.size(); ++i) {
      const int len = lengths_[i];
      const Vector<T> d_mean = d_out.col(i).head(c) / T(len);
      const Vector<T> d_std = d_out.col(i).tail(c).cwiseQuotient(stddev_.col(i)) / T(len);
      auto block = d_in.data.middleCols(off[i], len);
      block = d_std.asDiagonal() * centered_.middleCols(off[i], len);
      block.colwise() += d_mean;
    }
    return d_in;
  }

 private:
  double eps_;
  std::vector<int> lengths_;
  Matrix<T> centered_;
  Matrix<T> stddev_;
};

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_POOLING_H_
