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

#include "mbtdnn/cli/pipeline.h"

#include <filesystem>
#include <fstream>

#include "mbtdnn/cli/checkpoint.h"
#include "mbtdnn/error.h"
#include "mbtdnn/training/batching.h"

namespace mbtdnn {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidArch:
    case ErrorCode::kInvalidRate:
      return kExitConfig;
    case ErrorCode::kNumericFailure:
    case ErrorCode::kNonDeterministicLoss:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

void RequireFeatures(std::vector<ClipRecord>& records, const MfccConfig& mfcc) {
  const std::vector<std::string> failures = LoadFeatures(records, mfcc);
  if (failures.empty()) return;
  std::string msg = std::to_string(failures.size()) + " clip(s) without features:";
  for (size_t i = 0; i < failures.size() && i < 10; ++i) msg += "\n  " + failures[i];
  if (failures.size() > 10) msg += "\n  ...";
  throw Error(ErrorCode::kIo, msg);
}

DatasetSplit LoadRunData(const RunConfig& cfg, std::vector<std::string>* warnings) {
  DatasetSplit split;
  if (!cfg.train_manifest.empty() || !cfg.valid_manifest.empty()) {
    if (cfg.train_manifest.empty() || cfg.valid_manifest.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "train_manifest and valid_manifest go together");
    }
    split.train = LoadManifest(cfg.train_manifest, warnings);
    split.valid = LoadManifest(cfg.valid_manifest, warnings);
    if (!cfg.test_manifest.empty()) split.test = LoadManifest(cfg.test_manifest, warnings);
  } else if (!cfg.manifest.empty()) {
    const std::vector<ClipRecord> all = LoadManifest(cfg.manifest, warnings);
    switch (cfg.split.mode) {
      case SplitMode::kByPodcast:
        split = SplitByPodcast(all, cfg.split.ratios, cfg.split.seed);
        break;
      case SplitMode::kWithinPodcast: {
        std::vector<ClipRecord> test;
        if (!cfg.test_manifest.empty()) test = LoadManifest(cfg.test_manifest, warnings);
        split = SplitWithinPodcast(all, cfg.split.valid_fraction, cfg.split.seed, test);
        break;
      }
      case SplitMode::kKFoldPodcast:
      case SplitMode::kKFoldClip:
        split = KFold(all, cfg.split.folds, cfg.split.seed,
                      cfg.split.mode == SplitMode::kKFoldPodcast)
                    .front();
        break;
    }
    if (warnings) warnings->insert(warnings->end(), split.warnings.begin(), split.warnings.end());
  } else {
    throw Error(ErrorCode::kInvalidConfig, "no manifest configured");
  }
  RequireFeatures(split.train, cfg.mfcc);
  RequireFeatures(split.valid, cfg.mfcc);
  RequireFeatures(split.test, cfg.mfcc);
  return split;
}

TrainedRun TrainRun(const RunConfig& cfg, const DatasetSplit& split,
                    const EpochCallback& on_epoch) {
  cfg.train.Validate();
  ArchConfig arch = cfg.arch;
  arch.n_podcasts = static_cast<int>(DistinctPodcasts(split.train).size());
  if (!split.train.empty() && split.train.front().features &&
      split.train.front().features->rows() != arch.input_dim) {
    throw Error(ErrorCode::kInvalidConfig,
                "features have " + std::to_string(split.train.front().features->rows()) +
                    " coefficients but input_dim is " + std::to_string(arch.input_dim));
  }
  TrainedRun run;
  run.model = std::make_unique<Model<float>>(arch, cfg.train.seed);
  run.result = Train(*run.model, cfg.train, split.train, split.valid, on_epoch);
  return run;
}

MetricsReport EvaluateModel(Model<float>& model, std::span<const ClipRecord> records) {
  std::vector<StutterClass> truth;
  truth.reserve(records.size());
  for (const ClipRecord& r : records) truth.push_back(r.label);
  const std::vector<StutterClass> pred = PredictRecords(model, records);
  return Metrics(Confusion(truth, pred));
}

namespace {

void DropUnreadable(std::vector<ClipRecord>& records, const MfccConfig& mfcc, int* dropped) {
  std::vector<std::string> failures = LoadFeatures(records, mfcc);
  *dropped += static_cast<int>(failures.size());
  std::erase_if(records, [](const ClipRecord& r) { return !r.features; });
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace

ProtocolResult RunProtocol(const RunConfig& cfg, const ProtocolOptions& opts,
                           std::ostream* progress) {
  if (opts.runs < 1) throw Error(ErrorCode::kInvalidConfig, "runs must be at least 1");
  std::ifstream table(opts.labels_csv, std::ios::binary);
  if (!table) throw Error(ErrorCode::kIo, "cannot open " + opts.labels_csv);
  Sep28kResult adapted = AdaptSep28k(table, opts.sep28k);
  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);
  WriteExclusionReport((out_dir / "excluded.csv").string(), adapted.excluded);

  ProtocolResult result;
  result.n_excluded = static_cast<int>(adapted.excluded.size());
  DropUnreadable(adapted.records, cfg.mfcc, &result.n_dropped);
  result.n_records = static_cast<int>(adapted.records.size());
  WriteManifest((out_dir / "manifest.csv").string(), adapted.records);

  DatasetSplit podcast_split = SplitByPodcast(adapted.records, cfg.split.ratios, cfg.split.seed);
  result.podcast_counts = {static_cast<int>(DistinctPodcasts(podcast_split.train).size()),
                           static_cast<int>(DistinctPodcasts(podcast_split.valid).size()),
                           static_cast<int>(DistinctPodcasts(podcast_split.test).size())};
  DatasetSplit split = podcast_split;
  if (cfg.train.mode != TrainMode::kBaseline) {
    std::vector<ClipRecord> pooled = podcast_split.train;
    pooled.insert(pooled.end(), podcast_split.valid.begin(), podcast_split.valid.end());
    split = SplitWithinPodcast(pooled, cfg.split.valid_fraction, cfg.split.seed,
                               podcast_split.test);
  }
  if (progress) {
    *progress << "records " << result.n_records << " (excluded " << result.n_excluded
              << ", unreadable " << result.n_dropped << "), podcasts "
              << result.podcast_counts[0] << "/" << result.podcast_counts[1] << "/"
              << result.podcast_counts[2] << ", clips " << split.train.size() << "/"
              << split.valid.size() << "/" << split.test.size() << "\n";
  }
  if (split.test.empty()) throw Error(ErrorCode::kEmptySubset, "test set is empty");

  for (int run = 0; run < opts.runs; ++run) {
    RunConfig rc = cfg;
    rc.train.seed = cfg.train.seed + static_cast<uint64_t>(run);
    TrainedRun trained = TrainRun(rc, split);
    MetricsReport report = EvaluateModel(*trained.model, split.test);
    const fs::path run_dir = out_dir / ("run" + std::to_string(run));
    fs::create_directories(run_dir);
    WriteEpochLog((run_dir / "epochs.csv").string(), trained.result.log);
    WriteText(run_dir / "report.json", ToJson(report).dump(2) + "\n");
    SaveCheckpoint((run_dir / "model.snck").string(), *trained.model, trained.result.podcasts,
                   {{"mode", TrainModeName(rc.train.mode)}, {"seed", rc.train.seed}});
    if (progress) {
      *progress << "run " << run << ": epochs " << trained.result.log.size() << ", TA "
                << report.ta << ", SA " << report.sa << "\n";
    }
    result.reports.push_back(std::move(report));
  }
  result.aggregate = Aggregate(result.reports);
  WriteText(out_dir / "aggregate.json", ToJson(result.aggregate).dump(2) + "\n");
  WriteText(out_dir / "aggregate.txt", FormatTable(result.aggregate));
  WriteText(out_dir / "config.txt", cfg.ToText());
  return result;
}

}  // namespace mbtdnn
