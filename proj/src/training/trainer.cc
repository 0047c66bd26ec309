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

#include "mbtdnn/training/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "mbtdnn/error.h"
#include "mbtdnn/nn/adam.h"

namespace mbtdnn {

void TrainConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (schedule == LambdaSchedule::kFixed && mode != TrainMode::kBaseline &&
      !(lambda > 0.0 && lambda < 1.0)) {
    fail("lambda must lie in (0, 1), got " + std::to_string(lambda));
  }
  if (!std::isfinite(lambda)) fail("lambda must be finite");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("learning rate must be positive");
  if (batch_size < 2) fail("batch_size must be at least 2");
  if (patience < 1) fail("patience must be at least 1");
  if (!(min_delta >= 0.0)) fail("min_delta must be non-negative");
  if (max_epochs < 1) fail("max_epochs must be at least 1");
  if (!(sigmoid_gamma > 0.0)) fail("sigmoid_gamma must be positive");
  const auto& b = stage_boundaries;
  if (b[0] < 0 || !(b[0] < b[1] && b[1] < b[2])) fail("stage boundaries must be increasing");
}

EarlyStopping::EarlyStopping(int patience, double min_delta)
    : patience_(patience), min_delta_(min_delta) {
  if (patience < 1) throw Error(ErrorCode::kInvalidConfig, "patience must be at least 1");
}

bool EarlyStopping::Update(double loss) {
  improved_ = !best_value_ || loss < *best_value_ - min_delta_;
  if (improved_) {
    best_value_ = loss;
    best_ = loss;
    since_ = 0;
    return false;
  }
  ++since_;
  return since_ >= patience_;
}

void EarlyStopping::Reset() {
  best_value_.reset();
  best_ = 0.0;
  since_ = 0;
  improved_ = false;
}

std::vector<std::span<const size_t>> MakeBatches(std::span<const size_t> order, int batch_size) {
  std::vector<std::span<const size_t>> out;
  const size_t bs = static_cast<size_t>(batch_size);
  for (size_t start = 0; start < order.size(); start += bs) {
    const size_t n = std::min(bs, order.size() - start);
    if (n == 1 && !out.empty()) {
      out.back() = order.subspan(start - out.back().size(), out.back().size() + 1);
    } else {
      out.push_back(order.subspan(start, n));
    }
  }
  return out;
}

EvalLosses Evaluate(Model<float>& model, std::span<const ClipRecord> records,
                    const PodcastIndex& podcasts, int batch_size) {
  if (records.empty()) throw Error(ErrorCode::kEmptyBatch, "no records to evaluate");
  std::vector<size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  double sum_f = 0.0, sum_d = 0.0, sum_s = 0.0;
  size_t n_f = 0, n_d = 0, n_s = 0, correct = 0;
  auto count = [](const std::vector<int>& t) {
    return static_cast<size_t>(std::count_if(t.begin(), t.end(), [](int v) { return v >= 0; }));
  };
  for (std::span<const size_t> idx : MakeBatches(order, std::max(batch_size, 2))) {
    LabeledBatch<float> b = MakeLabeledBatch<float>(records, idx, podcasts);
    ModelOutputs<float> out = model.Forward(b.x, nn::Mode::kEval);
    const size_t cf = count(b.fluent), cd = count(b.disfluent), cs = count(b.speaker);
    sum_f += nn::MeanCrossEntropy<float>(out.fluent, b.fluent, 1.0, nullptr) * cf;
    sum_d += nn::MeanCrossEntropy<float>(out.disfluent, b.disfluent, 1.0, nullptr) * cd;
    if (out.speaker.rows() > 0 && cs > 0) {
      sum_s += nn::MeanCrossEntropy<float>(out.speaker, b.speaker, 1.0, nullptr) * cs;
    }
    n_f += cf;
    n_d += cd;
    n_s += cs;
    for (int j = 0; j < b.size(); ++j) {
      if (DecideClass(out.fluent.col(j), out.disfluent.col(j)) == b.label[j]) ++correct;
    }
  }
  EvalLosses l;
  l.fluent = n_f ? sum_f / n_f : 0.0;
  l.disfluent = n_d ? sum_d / n_d : 0.0;
  l.speaker = n_s ? sum_s / n_s : 0.0;
  l.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
  return l;
}

namespace {

void CheckFinite(double v, const char* what, int epoch) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kNumericFailure,
                std::string("non-finite ") + what + " at epoch " + std::to_string(epoch));
  }
}

}  // namespace

TrainResult Train(Model<float>& model, const TrainConfig& cfg,
                  const std::vector<ClipRecord>& train, const std::vector<ClipRecord>& valid,
                  const EpochCallback& on_epoch) {
  cfg.Validate();
  if (train.empty()) throw Error(ErrorCode::kEmptySubset, "training set is empty");
  if (valid.empty()) throw Error(ErrorCode::kEmptySubset, "validation set is empty");

  TrainResult result;
  result.podcasts = DistinctPodcasts(train);
  const PodcastIndex podcasts = MakePodcastIndex(result.podcasts);
  if (model.arch().n_podcasts != static_cast<int>(podcasts.size())) {
    throw Error(ErrorCode::kInvalidConfig,
                "model has " + std::to_string(model.arch().n_podcasts) +
                    " speaker classes but the training set has " +
                    std::to_string(podcasts.size()) + " podcasts");
  }

  nn::Adam<float> adam(nn::AdamConfig{.lr = cfg.lr});
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  EarlyStopping stopper(cfg.patience, cfg.min_delta);
  std::vector<nn::RowMatrix<float>> best;
  bool checkpointing = cfg.mode != TrainMode::kAdv;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    StagePlan plan;
    if (cfg.mode == TrainMode::kAdv) {
      plan = StageAt(epoch, cfg.stage_boundaries, cfg.train_encoder_with_speaker);
      if (plan.stage == Stage::kRecovery && !checkpointing) {
        checkpointing = true;
        stopper.Reset();
      }
    }
    model.SetTrainable(plan.trainable);
    const double lambda = LambdaAt(cfg.schedule, epoch, cfg.lambda, cfg.sigmoid_gamma,
                                   cfg.max_epochs, cfg.sigmoid_sign);

    std::shuffle(order.begin(), order.end(), rng);
    EpochLog row;
    row.epoch = epoch;
    row.stage = plan.stage;
    row.lambda = lambda;
    double weight_sum = 0.0;
    const BackwardOptions backward{.enabled = true,
                                   .to_encoder = plan.trainable.contains(Branch::kEncoder)};
    for (std::span<const size_t> idx : MakeBatches(order, cfg.batch_size)) {
      LabeledBatch<float> batch = MakeLabeledBatch<float>(train, idx, podcasts);
      model.ZeroGrad();
      BatchLosses l = ComputeBatchLosses(model, batch, cfg.mode, lambda, nn::Mode::kTrain,
                                         plan.stage, backward);
      CheckFinite(l.total, "training loss", epoch);
      adam.Step(model.TrainableParams());
      const double w = static_cast<double>(batch.size());
      row.l_fluent += w * l.fluent;
      row.l_disfluent += w * l.disfluent;
      row.l_speaker += w * l.speaker;
      row.l_total += w * l.total;
      weight_sum += w;
    }
    row.l_fluent /= weight_sum;
    row.l_disfluent /= weight_sum;
    row.l_speaker /= weight_sum;
    row.l_total /= weight_sum;

    const EvalLosses v = Evaluate(model, valid, podcasts);
    row.valid_stutter_loss = v.stutter();
    row.valid_acc = v.accuracy;
    CheckFinite(row.valid_stutter_loss, "validation loss", epoch);
    row.train_acc = cfg.log_train_accuracy ? Evaluate(model, train, podcasts).accuracy
                                           : std::nan("");
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);

    if (!checkpointing) continue;
    const bool stop = stopper.Update(row.valid_stutter_loss);
    if (stopper.improved()) {
      best = model.Snapshot();
      result.best_epoch = epoch;
      result.best_valid_loss = row.valid_stutter_loss;
    }
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  if (!best.empty()) model.Restore(best);
  model.SetTrainable(BranchSet::All());
  return result;
}

void WriteEpochLog(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,stage,lambda,l_fluent,l_disfluent,l_speaker,l_total,valid_stutter_loss,"
         "train_acc,valid_acc\n";
  char buf[512];
  for (const EpochLog& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch,
                  StageName(r.stage), r.lambda, r.l_fluent, r.l_disfluent, r.l_speaker, r.l_total,
                  r.valid_stutter_loss, r.train_acc, r.valid_acc);
    out << buf;
  }
}

void WriteEpochLog(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  WriteEpochLog(out, log);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace mbtdnn
