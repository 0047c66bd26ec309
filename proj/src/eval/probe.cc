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

#include "mbtdnn/eval/probe.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mbtdnn/error.h"
#include "mbtdnn/nn/adam.h"
#include "mbtdnn/nn/layers.h"
#include "mbtdnn/nn/loss.h"

namespace mbtdnn {

ProbeResult SpeakerProbe(const Eigen::MatrixXf& embeddings,
                         const std::vector<std::string>& podcasts, const ProbeConfig& cfg) {
  if (static_cast<size_t>(embeddings.cols()) != podcasts.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one podcast label per embedding expected");
  }
  if (cfg.steps < 1 || !(cfg.lr > 0.0) || !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid probe configuration");
  }
  std::map<std::string, std::vector<Eigen::Index>> by_podcast;
  for (size_t j = 0; j < podcasts.size(); ++j) {
    by_podcast[podcasts[j]].push_back(static_cast<Eigen::Index>(j));
  }
  std::erase_if(by_podcast, [](const auto& kv) { return kv.second.size() < 2; });
  if (by_podcast.size() < 2) {
    throw Error(ErrorCode::kTooFewPodcasts, "probe needs at least two podcasts with two clips");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> train_cols, test_cols;
  std::vector<int> train_y, test_y;
  int cls = 0;
  for (auto& [name, cols] : by_podcast) {
    std::shuffle(cols.begin(), cols.end(), rng);
    const int n = static_cast<int>(cols.size());
    const int n_test = std::clamp(static_cast<int>(std::lround(cfg.test_fraction * n)), 1, n - 1);
    for (int i = 0; i < n; ++i) {
      (i < n_test ? test_cols : train_cols).push_back(cols[i]);
      (i < n_test ? test_y : train_y).push_back(cls);
    }
    ++cls;
  }

  const Eigen::Index dim = embeddings.rows();
  nn::Matrix<double> x_train(dim, static_cast<Eigen::Index>(train_cols.size()));
  nn::Matrix<double> x_test(dim, static_cast<Eigen::Index>(test_cols.size()));
  for (size_t j = 0; j < train_cols.size(); ++j) {
    x_train.col(j) = embeddings.col(train_cols[j]).cast<double>();
  }
  for (size_t j = 0; j < test_cols.size(); ++j) {
    x_test.col(j) = embeddings.col(test_cols[j]).cast<double>();
  }
  const Eigen::VectorXd mean = x_train.rowwise().mean();
  Eigen::VectorXd sd =
      ((x_train.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  sd = sd.unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });
  x_train = (x_train.colwise() - mean).array().colwise() / sd.array();
  x_test = (x_test.colwise() - mean).array().colwise() / sd.array();

  std::vector<nn::Linear<double>> fc;
  std::vector<nn::Relu<double>> relu(cfg.hidden.size());
  int in = static_cast<int>(dim);
  for (size_t i = 0; i <= cfg.hidden.size(); ++i) {
    const int out = i < cfg.hidden.size() ? cfg.hidden[i] : cls;
    fc.emplace_back("probe.fc" + std::to_string(i + 1), in, out);
    fc.back().Init(rng);
    in = out;
  }
  std::vector<nn::Param<double>*> params;
  for (auto& l : fc) {
    params.push_back(&l.weight());
    params.push_back(&l.bias());
  }
  auto forward = [&](const nn::Matrix<double>& x) {
    nn::Matrix<double> h = x;
    for (size_t i = 0; i < fc.size(); ++i) {
      h = fc[i].Forward(h);
      if (i < relu.size()) h = relu[i].Forward(h);
    }
    return h;
  };

  nn::Adam<double> adam(nn::AdamConfig{.lr = cfg.lr});
  nn::Matrix<double> grad;
  for (int step = 0; step < cfg.steps; ++step) {
    for (auto* p : params) p->ZeroGrad();
    const nn::Matrix<double> logits = forward(x_train);
    nn::MeanCrossEntropy<double>(logits, train_y, 1.0, &grad);
    nn::Matrix<double> d = grad;
    for (size_t i = fc.size(); i-- > 0;) {
      if (i < relu.size()) d = relu[i].Backward(d);
      d = fc[i].Backward(d);
    }
    adam.Step(params);
  }

  const nn::Matrix<double> logits = forward(x_test);
  ProbeResult r;
  int correct = 0;
  std::vector<int> freq(cls, 0);
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    if (nn::Argmax(logits.col(j)) == test_y[j]) ++correct;
    ++freq[test_y[j]];
  }
  r.n_train = static_cast<int>(train_cols.size());
  r.n_test = static_cast<int>(test_cols.size());
  r.n_podcasts = cls;
  r.accuracy = static_cast<double>(correct) / r.n_test;
  r.majority_rate = static_cast<double>(*std::max_element(freq.begin(), freq.end())) / r.n_test;
  return r;
}

}  // namespace mbtdnn
