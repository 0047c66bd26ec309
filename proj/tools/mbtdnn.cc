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

// mbtdnn: feature extraction, training, evaluation and analysis of the
// multi-branch TDNN stuttering classifier.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mbtdnn/cli/checkpoint.h"
#include "mbtdnn/cli/pipeline.h"
#include "mbtdnn/cli/run_config.h"
#include "mbtdnn/eval/embeddings.h"
#include "mbtdnn/eval/metrics.h"
#include "mbtdnn/eval/probe.h"
#include "mbtdnn/training/batching.h"

namespace fs = std::filesystem;
using namespace mbtdnn;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
};

void AddConfigOptions(CLI::App* cmd, ConfigArgs* args) {
  cmd->add_option("--config", args->file, "Key-value config file");
  cmd->add_option("--set", args->overrides, "Override a config key (key=value), repeatable");
}

RunConfig BuildConfig(const ConfigArgs& args) {
  RunConfig cfg;
  if (!args.file.empty()) cfg.Load(args.file);
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "--set expects key=value, got '" + kv + "'");
    }
    cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void PrintEpoch(const EpochLog& e) {
  std::printf("epoch %3d  %-12s  lambda %.4g  fluent %.4f  disfluent %.4f  speaker %.4f  "
              "total %.4f  valid %.4f  train_acc %.3f  valid_acc %.3f\n",
              e.epoch, StageName(e.stage), e.lambda, e.l_fluent, e.l_disfluent, e.l_speaker,
              e.l_total, e.valid_stutter_loss, e.train_acc, e.valid_acc);
  std::fflush(stdout);
}

int CmdFeatures(const ConfigArgs& ca, const std::string& manifest, const std::string& out_dir) {
  const RunConfig cfg = BuildConfig(ca);
  cfg.mfcc.Validate(16000);
  std::vector<ClipRecord> records = LoadManifest(manifest);
  const std::vector<std::string> failures = LoadFeatures(records, cfg.mfcc);
  std::vector<ClipRecord> ok;
  for (const ClipRecord& r : records) {
    if (r.features) ok.push_back(r);
  }
  WriteFeatureDataset(out_dir, ok);
  std::printf("wrote %zu feature file(s) to %s\n", ok.size(), out_dir.c_str());
  for (const std::string& f : failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  return failures.empty() ? kExitOk : kExitData;
}

struct TrainArgs {
  std::string manifest, mode, out;
  std::optional<double> lambda;
  std::optional<uint64_t> seed;
  std::optional<int> max_epochs;
  bool quiet = false;
};

int CmdTrain(const ConfigArgs& ca, const TrainArgs& ta) {
  RunConfig cfg = BuildConfig(ca);
  if (!ta.manifest.empty()) cfg.Set("manifest", ta.manifest);
  if (!ta.mode.empty()) cfg.Set("mode", ta.mode);
  if (ta.lambda) cfg.train.lambda = *ta.lambda;
  if (ta.seed) cfg.train.seed = *ta.seed;
  if (ta.max_epochs) cfg.train.max_epochs = *ta.max_epochs;
  cfg.train.Validate();
  cfg.arch.Validate();

  std::vector<std::string> warnings;
  const DatasetSplit split = LoadRunData(cfg, &warnings);
  for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("mode %s, clips %zu train / %zu valid / %zu test\n", TrainModeName(cfg.train.mode),
              split.train.size(), split.valid.size(), split.test.size());

  TrainedRun run = TrainRun(cfg, split, ta.quiet ? EpochCallback{} : EpochCallback(PrintEpoch));
  const fs::path out(ta.out);
  fs::create_directories(out);
  SaveCheckpoint((out / "model.snck").string(), *run.model, run.result.podcasts,
                 {{"mode", TrainModeName(cfg.train.mode)},
                  {"seed", cfg.train.seed},
                  {"best_epoch", run.result.best_epoch},
                  {"mfcc",
                   {{"n_mfcc", cfg.mfcc.n_mfcc},
                    {"window_ms", cfg.mfcc.window_ms},
                    {"hop_ms", cfg.mfcc.hop_ms},
                    {"n_mels", cfg.mfcc.n_mels},
                    {"fft_size", cfg.mfcc.fft_size}}}});
  WriteEpochLog((out / "epochs.csv").string(), run.result.log);
  WriteText(out / "config.txt", cfg.ToText());
  std::printf("epochs run %zu, best epoch %d, best valid stutter loss %.6f%s\n",
              run.result.log.size(), run.result.best_epoch, run.result.best_valid_loss,
              run.result.stopped_early ? " (early stop)" : "");
  if (!split.test.empty()) {
    const MetricsReport report = EvaluateModel(*run.model, split.test);
    WriteText(out / "test_report.json", ToJson(report).dump(2) + "\n");
    std::printf("test set\n%s", FormatTable(report).c_str());
  }
  std::printf("checkpoint %s\n", (out / "model.snck").string().c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, manifest, report, embeddings;
};

int CmdEval(const ConfigArgs& ca, const EvalArgs& ea) {
  const RunConfig cfg = BuildConfig(ca);
  LoadedCheckpoint ckpt = LoadCheckpoint(ea.checkpoint);
  std::vector<ClipRecord> records = LoadManifest(ea.manifest);
  RequireFeatures(records, cfg.mfcc);
  if (records.empty()) throw Error(ErrorCode::kEmptySubset, "manifest has no clips");
  for (const ClipRecord& r : records) {
    if (r.features->rows() != ckpt.header.arch.input_dim) {
      throw Error(ErrorCode::kInvalidConfig,
                  "clip " + r.clip_id + " has " + std::to_string(r.features->rows()) +
                      " coefficients, the checkpoint expects " +
                      std::to_string(ckpt.header.arch.input_dim));
    }
  }
  const MetricsReport report = EvaluateModel(*ckpt.model, records);
  const std::string table = FormatTable(report);
  std::printf("%s", table.c_str());
  if (!ea.report.empty()) {
    WriteText(ea.report, ToJson(report).dump(2) + "\n");
    WriteText(ea.report + ".txt", table);
  }
  if (!ea.embeddings.empty()) {
    WriteEmbeddings(ea.embeddings, ComputeEmbeddings(*ckpt.model, records));
  }
  return kExitOk;
}

int CmdSynth(const ConfigArgs& ca, const std::string& out_dir) {
  const RunConfig cfg = BuildConfig(ca);
  const std::vector<ClipRecord> records = GenerateSynthetic(cfg.synth);
  WriteFeatureDataset(out_dir, records);
  std::printf("wrote %zu synthetic clip(s) to %s\n", records.size(), out_dir.c_str());
  return kExitOk;
}

int CmdProbe(const std::string& path, const ProbeConfig& pc) {
  const EmbeddingTable t = ReadEmbeddings(path);
  const ProbeResult r = SpeakerProbe(t.values, t.podcast_ids, pc);
  std::printf("probe accuracy %.4f (majority %.4f, %d podcasts, %d train / %d test)\n",
              r.accuracy, r.majority_rate, r.n_podcasts, r.n_train, r.n_test);
  return kExitOk;
}

int CmdInspect(const std::string& path) {
  std::printf("%s", DescribeCheckpoint(InspectCheckpoint(path)).c_str());
  return kExitOk;
}

int CmdAdapt(const std::string& labels, const Sep28kOptions& opts, const std::string& out,
             const std::string& exclusions) {
  std::ifstream in(labels, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + labels);
  const Sep28kResult r = AdaptSep28k(in, opts);
  WriteManifest(out, r.records);
  if (!exclusions.empty()) WriteExclusionReport(exclusions, r.excluded);
  std::printf("kept %zu clip(s), excluded %zu\n", r.records.size(), r.excluded.size());
  for (StutterClass c : kAllClasses) {
    std::printf("  %-13s %d\n", ClassName(c), r.class_counts[ClassIndex(c)]);
  }
  return kExitOk;
}

int CmdProtocol(const ConfigArgs& ca, const ProtocolOptions& po) {
  const RunConfig cfg = BuildConfig(ca);
  cfg.train.Validate();
  const ProtocolResult r = RunProtocol(cfg, po, &std::cout);
  std::printf("%s", FormatTable(r.aggregate).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-branch TDNN stuttering detection"};
  app.require_subcommand(1);

  ConfigArgs ca;
  std::string manifest, out_dir;

  CLI::App* features = app.add_subcommand("features", "Extract MFCC features for a manifest");
  AddConfigOptions(features, &ca);
  features->add_option("--manifest", manifest, "Clip manifest (CSV)")->required();
  features->add_option("--out-dir", out_dir, "Output directory")->required();

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "Train a model");
  AddConfigOptions(train, &ca);
  train->add_option("--manifest", ta.manifest, "Manifest to split");
  train->add_option("--mode", ta.mode, "baseline, mtl or adv");
  train->add_option("--lambda", ta.lambda, "Loss weight");
  train->add_option("--seed", ta.seed, "Training seed");
  train->add_option("--max-epochs", ta.max_epochs, "Epoch limit");
  train->add_option("--out", ta.out, "Output directory")->required();
  train->add_flag("--quiet", ta.quiet, "Do not print per-epoch lines");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  AddConfigOptions(eval, &ca);
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval->add_option("--manifest,--features", ea.manifest, "Clip manifest")->required();
  eval->add_option("--report", ea.report, "Metrics JSON path (table goes to <path>.txt)");
  eval->add_option("--export-embeddings", ea.embeddings, "Embedding CSV path");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic feature dataset");
  AddConfigOptions(synth, &ca);
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  std::string emb_path;
  ProbeConfig pc;
  CLI::App* probe = app.add_subcommand("probe", "Podcast probe on exported embeddings");
  probe->add_option("--embeddings", emb_path, "Embedding CSV")->required();
  probe->add_option("--seed", pc.seed, "Split and init seed");
  probe->add_option("--steps", pc.steps, "Adam steps");
  probe->add_option("--lr", pc.lr, "Learning rate");
  probe->add_option("--hidden", pc.hidden, "Hidden layer widths")->delimiter(',');

  std::string ckpt_path;
  CLI::App* inspect = app.add_subcommand("inspect", "Print a checkpoint header");
  inspect->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();

  std::string labels, exclusions;
  Sep28kOptions so;
  CLI::App* adapt = app.add_subcommand("adapt", "Convert a SEP-28k label table to a manifest");
  adapt->add_option("--labels", labels, "SEP-28k label CSV")->required();
  adapt->add_option("--audio-root", so.audio_root, "Directory of clip WAVs");
  adapt->add_option("--flag-threshold", so.flag_threshold, "Votes that exclude a clip");
  adapt->add_option("--out", out_dir, "Manifest path")->required();
  adapt->add_option("--exclusions", exclusions, "Exclusion report path");

  ProtocolOptions po;
  CLI::App* protocol = app.add_subcommand("protocol", "Label table to averaged test metrics");
  AddConfigOptions(protocol, &ca);
  protocol->add_option("--labels", po.labels_csv, "SEP-28k label CSV")->required();
  protocol->add_option("--audio-root", po.sep28k.audio_root, "Directory of clip WAVs");
  protocol->add_option("--flag-threshold", po.sep28k.flag_threshold, "Votes that exclude a clip");
  protocol->add_option("--runs", po.runs, "Seeded runs to average");
  protocol->add_option("--out-dir", po.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*features) return CmdFeatures(ca, manifest, out_dir);
    if (*train) return CmdTrain(ca, ta);
    if (*eval) return CmdEval(ca, ea);
    if (*synth) return CmdSynth(ca, out_dir);
    if (*probe) return CmdProbe(emb_path, pc);
    if (*inspect) return CmdInspect(ckpt_path);
    if (*adapt) return CmdAdapt(labels, so, out_dir, exclusions);
    if (*protocol) return CmdProtocol(ca, po);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitConfig;
}
