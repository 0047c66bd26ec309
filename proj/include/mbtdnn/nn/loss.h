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

#ifndef MBTDNN_NN_LOSS_H_
#define MBTDNN_NN_LOSS_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {
namespace nn {

// Numerically stable softmax (max-shifted), evaluated in double.
template <typename T>
Eigen::VectorXd Softmax(const Eigen::Ref<const Vector<T>>& logits) {
  const Eigen::VectorXd z = logits.template cast<double>();
  const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

template <typename T>
struct CrossEntropy {
  double loss = 0.0;
  Vector<T> grad;
};

// loss = -log softmax(logits)[target]; grad = softmax(logits) - onehot.
template <typename T>
CrossEntropy<T> SoftmaxCrossEntropy(const Eigen::Ref<const Vector<T>>& logits, int target) {
  const auto k = static_cast<int>(logits.size());
  if (target < 0 || target >= k) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "target " + std::to_string(target) + " outside [0, " + std::to_string(k) + ")");
  }
  const Eigen::VectorXd z = logits.template cast<double>();
  const double max = z.maxCoeff();
  const double lse = max + std::log((z.array() - max).exp().sum());
  CrossEntropy<T> out;
  out.loss = lse - z[target];
  Eigen::VectorXd p = (z.array() - lse).exp();
  p[target] -= 1.0;
  out.grad = p.cast<T>();
  return out;
}

// Mean cross-entropy over the columns of `logits` whose target is >= 0
// (negative targets are masked out). If `grad` is non-null it receives
// weight * d(mean)/d(logits). Returns 0 with a zero gradient when every
// column is masked.
template <typename T>
double MeanCrossEntropy(const Matrix<T>& logits, std::span<const int> targets, double weight,
                        Matrix<T>* grad) {
  CheckShape(static_cast<Eigen::Index>(targets.size()) == logits.cols(),
             "cross-entropy: one target per column expected");
  const auto count = std::count_if(targets.begin(), targets.end(), [](int t) { return t >= 0; });
  if (grad != nullptr) grad->setZero(logits.rows(), logits.cols());
  if (count == 0) return 0.0;
  double total = 0.0;
  const T scale = T(weight / static_cast<double>(count));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    if (targets[j] < 0) continue;
    CrossEntropy<T> ce = SoftmaxCrossEntropy<T>(logits.col(j), targets[j]);
    total += ce.loss;
    if (grad != nullptr) grad->col(j) = ce.grad * scale;
  }
  return total / static_cast<double>(count);
}

// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
int Argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_LOSS_H_
