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

#ifndef MBTDNN_NN_ADAM_H_
#define MBTDNN_NN_ADAM_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {
namespace nn {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  RowMatrix<T> m;
  RowMatrix<T> v;
  int64_t step = 0;
};

// One bias-corrected Adam update of `p` from `p.grad`. Advances state.step.
template <typename T>
void AdamStep(Param<T>& p, AdamState<T>& state, const AdamConfig& cfg) {
  CheckShape(p.grad.rows() == p.value.rows() && p.grad.cols() == p.value.cols(),
             p.name + ": gradient shape differs from value");
  if (state.m.size() == 0) {
    state.m = RowMatrix<T>::Zero(p.value.rows(), p.value.cols());
    state.v = RowMatrix<T>::Zero(p.value.rows(), p.value.cols());
  }
  CheckShape(state.m.rows() == p.value.rows() && state.m.cols() == p.value.cols(),
             p.name + ": optimizer state shape differs from value");
  ++state.step;
  const T b1 = T(cfg.beta1), b2 = T(cfg.beta2);
  state.m = b1 * state.m + (T(1) - b1) * p.grad;
  state.v = b2 * state.v + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
  const T c1 = T(1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)));
  const T c2 = T(1.0 - std::pow(cfg.beta2, static_cast<double>(state.step)));
  p.value.array() -= T(cfg.lr) * (state.m.array() / c1) /
                     ((state.v.array() / c2).sqrt() + T(cfg.eps));
}

// Adam over a set of named parameters. Only the parameters handed to Step()
// are touched; each keeps its own step count, so a partition that was frozen
// for a while resumes with its own bias correction.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void Step(const std::vector<Param<T>*>& params) {
    for (Param<T>* p : params) {
      if (!p->differentiable) continue;
      AdamStep(*p, states_[p->name], cfg_);
    }
  }

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  AdamConfig cfg_;
  std::unordered_map<std::string, AdamState<T>> states_;
};

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_ADAM_H_
