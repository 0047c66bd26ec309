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

#ifndef MBTDNN_EVAL_PROBE_H_
#define MBTDNN_EVAL_PROBE_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mbtdnn {

struct ProbeConfig {
  int steps = 200;
  double lr = 1e-2;
  double test_fraction = 0.2;
  // Hidden ReLU layers; empty gives a linear softmax probe.
  std::vector<int> hidden;
  uint64_t seed = 0;
};

struct ProbeResult {
  double accuracy = 0.0;
  // Share of the most frequent podcast among the held-out rows.
  double majority_rate = 0.0;
  int n_train = 0;
  int n_test = 0;
  int n_podcasts = 0;
};

// Trains a softmax classifier from `embeddings` (one column per clip) to
// `podcasts` with full-batch Adam and reports held-out accuracy. The split
// is stratified by podcast; features are standardized with statistics of
// the training part. Throws TooFewPodcasts for fewer than two podcasts with
// at least two clips each.
ProbeResult SpeakerProbe(const Eigen::MatrixXf& embeddings,
                         const std::vector<std::string>& podcasts, const ProbeConfig& cfg = {});

}  // namespace mbtdnn

#endif  // MBTDNN_EVAL_PROBE_H_
