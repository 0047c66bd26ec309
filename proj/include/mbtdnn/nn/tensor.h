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

#ifndef MBTDNN_NN_TENSOR_H_
#define MBTDNN_NN_TENSOR_H_

#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mbtdnn/error.h"

namespace mbtdnn {
namespace nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Mode { kTrain, kEval };

// A named parameter tensor. Storage is a row-major matrix whose rows are
// shape[0] and whose columns are the product of the remaining dimensions, so
// value.data() is the row-major flattening of `shape`.
template <typename T>
struct Param {
  std::string name;
  std::vector<int> shape;
  RowMatrix<T> value;
  RowMatrix<T> grad;
  // False for state that is carried with the parameters but never receives
  // a gradient (batch-norm running statistics).
  bool differentiable = true;

  Param() = default;
  Param(std::string n, std::vector<int> s, bool diff = true)
      : name(std::move(n)), shape(std::move(s)), differentiable(diff) {
    const int rows = shape.empty() ? 1 : shape[0];
    const int cols = rows == 0 ? 0 : static_cast<int>(numel() / rows);
    value = RowMatrix<T>::Zero(rows, cols);
    grad = RowMatrix<T>::Zero(rows, cols);
  }

  int64_t numel() const {
    return std::accumulate(shape.begin(), shape.end(), int64_t{1},
                           std::multiplies<int64_t>());
  }
  void ZeroGrad() { grad.setZero(); }
};

// Uniform in [-bound, bound], drawn in storage order.
template <typename T>
void InitUniform(Param<T>& p, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  T* v = p.value.data();
  for (int64_t i = 0; i < p.value.size(); ++i) v[i] = static_cast<T>(dist(rng));
}

// A batch of variable-length sequences with samples concatenated along the
// frame axis: data is channels x sum(lengths).
template <typename T>
struct SequenceBatch {
  Matrix<T> data;
  std::vector<int> lengths;

  int batch_size() const { return static_cast<int>(lengths.size()); }
  int channels() const { return static_cast<int>(data.rows()); }
  int total_frames() const { return static_cast<int>(data.cols()); }
  std::vector<int> Offsets() const {
    std::vector<int> off(lengths.size() + 1, 0);
    for (size_t i = 0; i < lengths.size(); ++i) off[i + 1] = off[i] + lengths[i];
    return off;
  }
};

inline void CheckShape(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_TENSOR_H_
