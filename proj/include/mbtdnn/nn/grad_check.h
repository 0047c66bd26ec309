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

#ifndef MBTDNN_NN_GRAD_CHECK_H_
#define MBTDNN_NN_GRAD_CHECK_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "mbtdnn/nn/tensor.h"

namespace mbtdnn {
namespace nn {

// A scalar array to perturb together with its analytic gradient.
template <typename T>
struct GradView {
  std::string name;
  T* value = nullptr;
  const T* grad = nullptr;
  int64_t size = 0;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  int64_t worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;
  bool pass = false;

  double max_rel_error() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_error);
    return m;
  }
};

template <typename T>
constexpr double DefaultFiniteDifferenceStep() {
  return std::is_same_v<T, float> ? 1e-3 : 1e-5;
}

inline double RelativeError(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

template <typename T>
std::vector<GradView<T>> ViewsOf(const std::vector<Param<T>*>& params) {
  std::vector<GradView<T>> views;
  for (Param<T>* p : params) {
    if (!p->differentiable) continue;
    views.push_back({p->name, p->value.data(), p->grad.data(), p->value.size()});
  }
  return views;
}

// Compares each analytic gradient entry against the central difference
// (f(x + h) - f(x - h)) / ((x + h) - (x - h)), where the denominator uses
// the perturbation actually representable in T. `loss` must be a
// deterministic function of the viewed values; the analytic gradients must
// have been computed at the current values before the call.
template <typename T>
GradCheckReport FiniteDifferenceCheck(const std::function<double()>& loss,
                                      const std::vector<GradView<T>>& views, double tolerance,
                                      double step = DefaultFiniteDifferenceStep<T>()) {
  const double f0 = loss();
  const double f1 = loss();
  if (f0 != f1 && !(std::isnan(f0) && std::isnan(f1))) {
    throw Error(ErrorCode::kNonDeterministicLoss,
                "two evaluations at identical parameters differ");
  }
  GradCheckReport report;
  report.tolerance = tolerance;
  report.pass = true;
  for (const GradView<T>& view : views) {
    GradCheckEntry entry;
    entry.name = view.name;
    for (int64_t i = 0; i < view.size; ++i) {
      const T saved = view.value[i];
      const T plus = static_cast<T>(saved + step);
      const T minus = static_cast<T>(saved - step);
      view.value[i] = plus;
      const double f_plus = loss();
      view.value[i] = minus;
      const double f_minus = loss();
      view.value[i] = saved;
      const double numeric =
          (f_plus - f_minus) / (static_cast<double>(plus) - static_cast<double>(minus));
      const double analytic = static_cast<double>(view.grad[i]);
      const double err = RelativeError(analytic, numeric);
      if (err > entry.max_rel_error || entry.worst_index < 0) {
        entry.max_rel_error = err;
        entry.worst_index = i;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
    }
    if (!(entry.max_rel_error <= tolerance)) report.pass = false;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace nn
}  // namespace mbtdnn

#endif  // MBTDNN_NN_GRAD_CHECK_H_
