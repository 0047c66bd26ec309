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

#include <sys/wait.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "grad_suite.h"
#include "mbtdnn/cli/checkpoint.h"
#include "mbtdnn/cli/pipeline.h"
#include "mbtdnn/cli/run_config.h"
#include "oracles.h"
#include "test_util.h"

namespace mbtdnn {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Spit(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

Model<float> TrainedLooking(uint64_t seed) {
  gradsuite::ModelFixture<float> f(seed);
  // A train-mode pass moves the batch-norm running statistics off their
  // initial values.
  f.model.Forward(f.batch.x, nn::Mode::kTrain);
  return std::move(f.model);
}

TEST(Checkpoint, BitExactRoundTrip) {
  Model<float> m = TrainedLooking(3);
  oracle::TempDir dir("ckpt");
  const std::vector<std::string> pods = {"a", "b", "c"};
  SaveCheckpoint(dir / "m.snck", m, pods, {{"seed", 3}});
  LoadedCheckpoint back = LoadCheckpoint(dir / "m.snck");
  EXPECT_EQ(back.header.podcasts, pods);
  EXPECT_EQ(back.header.meta["seed"].get<int>(), 3);
  EXPECT_EQ(back.header.arch.channels, gradsuite::SmallArch().channels);
  auto a = m.AllParams();
  auto b = back.model->AllParams();
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    ASSERT_EQ(a[i]->value.size(), b[i]->value.size());
    EXPECT_EQ(std::memcmp(a[i]->value.data(), b[i]->value.data(),
                          sizeof(float) * a[i]->value.size()),
              0)
        << a[i]->name;
  }
  gradsuite::ModelFixture<float> f(3);
  const auto pa = m.Predict(f.batch.x);
  const auto pb = back.model->Predict(f.batch.x);
  EXPECT_EQ(pa, pb);
  SaveCheckpoint(dir / "again.snck", *back.model, pods, {{"seed", 3}});
  EXPECT_EQ(Slurp(dir / "m.snck"), Slurp(dir / "again.snck"));
}

TEST(Checkpoint, CorruptionIsDetected) {
  Model<float> m = TrainedLooking(4);
  oracle::TempDir dir("ckpt");
  SaveCheckpoint(dir / "m.snck", m, {"a", "b", "c"});
  const std::string bytes = Slurp(dir / "m.snck");
  for (size_t cut : {size_t{2}, size_t{6}, size_t{40}, bytes.size() - 1}) {
    Spit(dir / "t.snck", bytes.substr(0, cut));
    EXPECT_MBTDNN_ERROR(LoadCheckpoint(dir / "t.snck"), kCorruptCheckpoint);
  }
  std::string bad = bytes;
  bad[0] = 'X';
  Spit(dir / "magic.snck", bad);
  EXPECT_MBTDNN_ERROR(LoadCheckpoint(dir / "magic.snck"), kCorruptCheckpoint);
  bad = bytes;
  bad[4] = 9;
  Spit(dir / "v.snck", bad);
  EXPECT_MBTDNN_ERROR(InspectCheckpoint(dir / "v.snck"), kVersionMismatch);
  EXPECT_MBTDNN_ERROR(LoadCheckpoint(dir / "none.snck"), kIo);
}

TEST(Checkpoint, PodcastMapMustMatchHead) {
  Model<float> m = TrainedLooking(4);
  oracle::TempDir dir("ckpt");
  EXPECT_MBTDNN_ERROR(SaveCheckpoint(dir / "m.snck", m, {"a"}), kInvalidConfig);
}

TEST(Checkpoint, Inspect) {
  Model<float> m = TrainedLooking(5);
  oracle::TempDir dir("ckpt");
  SaveCheckpoint(dir / "m.snck", m, {"a", "b", "c"});
  const CheckpointHeader h = InspectCheckpoint(dir / "m.snck");
  EXPECT_EQ(h.version, kCheckpointVersion);
  EXPECT_EQ(h.tensors.size(), m.AllParams().size());
  const std::string text = DescribeCheckpoint(h);
  EXPECT_NE(text.find("tensors " + std::to_string(h.tensors.size())), std::string::npos);
  EXPECT_EQ(ArchFromJson(ArchToJson(h.arch)).head_hidden, h.arch.head_hidden);
}

TEST(RunConfig, ParseAndErrors) {
  RunConfig c;
  c.Parse("mode = adv  # comment\nlambda=0.4\nchannels = 8,8,8,8,8\n\nstage_boundaries=3,6,9\n");
  EXPECT_EQ(c.train.mode, TrainMode::kAdv);
  EXPECT_DOUBLE_EQ(c.train.lambda, 0.4);
  EXPECT_EQ(c.arch.channels, (std::vector<int>{8, 8, 8, 8, 8}));
  EXPECT_EQ(c.train.stage_boundaries, (std::array<int, 3>{3, 6, 9}));
  EXPECT_MBTDNN_ERROR(c.Parse("no_such_key = 1"), kInvalidConfig);
  EXPECT_MBTDNN_ERROR(c.Parse("lambda = 0.1\nlambda = 0.2"), kInvalidConfig);
  EXPECT_MBTDNN_ERROR(c.Parse("lambda"), kInvalidConfig);
  EXPECT_MBTDNN_ERROR(c.Parse("batch_size = many"), kInvalidConfig);
  EXPECT_MBTDNN_ERROR(c.Parse("mode = fancy"), kInvalidConfig);
  EXPECT_MBTDNN_ERROR(c.Load("/nonexistent/run.cfg"), kInvalidConfig);
  try {
    c.Parse("\n\nbogus = 1", "run.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos);
  }
}

TEST(RunConfig, TextRoundTrip) {
  RunConfig c;
  c.Parse("mode = mtl\nlambda = 0.35\nhead_hidden = 16,8\nseed = 77\nsplit_ratios = 0.7,0.2,0.1\n"
          "synth_noise = 0.25\nmanifest = data/m.csv\n");
  RunConfig d;
  d.Parse(c.ToText());
  EXPECT_EQ(d.ToText(), c.ToText());
  EXPECT_EQ(d.train.seed, 77u);
  EXPECT_EQ(d.arch.head_hidden, (std::vector<int>{16, 8}));
  EXPECT_EQ(d.manifest, "data/m.csv");
  for (const std::string& k : RunConfig::Keys()) {
    EXPECT_NE(c.ToText().find(k + " = "), std::string::npos) << k;
  }
}

TEST(Pipeline, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kInvalidConfig), kExitConfig);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kNumericFailure), kExitNumeric);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kCorruptCheckpoint), kExitData);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kIo), kExitData);
}

class Binary : public ::testing::Test {
 protected:
  int Run(const std::string& args) {
    const std::string cmd = std::string(MBTDNN_CLI_PATH) + " " + args + " > " +
                            (dir / "out.txt") + " 2>&1";
    const int status = std::system(cmd.c_str());
    output = Slurp(dir / "out.txt");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  oracle::TempDir dir{"cli"};
  std::string output;
};

TEST_F(Binary, EndToEnd) {
  Spit(dir / "run.cfg",
       "synth_podcasts = 3\nsynth_class_counts = 12,12,12,12,12\nsynth_frames = 24\n"
       "synth_dim = 8\nsynth_noise = 0.2\ninput_dim = 8\nchannels = 8,8,8,8,8\n"
       "head_hidden = 8,8\nbatch_size = 16\nsplit = within_podcast\nvalid_fraction = 0.2\n");
  const std::string cfg = "--config " + (dir / "run.cfg");
  ASSERT_EQ(Run("synth " + cfg + " --out-dir " + (dir / "data")), 0) << output;
  ASSERT_TRUE(fs::exists(dir / "data/manifest.csv"));
  ASSERT_EQ(Run("train " + cfg + " --manifest " + (dir / "data/manifest.csv") +
                " --mode mtl --lambda 0.3 --max-epochs 3 --quiet --out " + (dir / "run")),
            0)
      << output;
  EXPECT_TRUE(fs::exists(dir / "run/model.snck"));
  EXPECT_TRUE(fs::exists(dir / "run/epochs.csv"));
  EXPECT_TRUE(fs::exists(dir / "run/config.txt"));
  ASSERT_EQ(Run("inspect --checkpoint " + (dir / "run/model.snck")), 0) << output;
  ASSERT_EQ(Run("eval " + cfg + " --checkpoint " + (dir / "run/model.snck") + " --manifest " +
                (dir / "data/manifest.csv") + " --report " + (dir / "rep.json") +
                " --export-embeddings " + (dir / "emb.csv")),
            0)
      << output;
  const nlohmann::json rep = nlohmann::json::parse(Slurp(dir / "rep.json"));
  EXPECT_EQ(rep["columns"].size(), 7u);
  EXPECT_TRUE(fs::exists(dir / "rep.json.txt"));
  ASSERT_EQ(Run("probe --embeddings " + (dir / "emb.csv") + " --steps 50"), 0) << output;
  EXPECT_NE(output.find("probe accuracy"), std::string::npos);
}

TEST_F(Binary, ErrorsMapToExitCodes) {
  EXPECT_EQ(Run("inspect --checkpoint " + (dir / "missing.snck")), kExitData);
  Spit(dir / "junk.snck", "not a checkpoint");
  EXPECT_EQ(Run("inspect --checkpoint " + (dir / "junk.snck")), kExitData);
  EXPECT_NE(output.find("CorruptCheckpoint"), std::string::npos) << output;
  Spit(dir / "bad.cfg", "lambda = 0.1\nwat = 2\n");
  EXPECT_EQ(Run("synth --config " + (dir / "bad.cfg") + " --out-dir " + (dir / "x")),
            kExitConfig);
  EXPECT_EQ(Run("train --out " + (dir / "x") + " --mode mtl --lambda 1.5"), kExitConfig);
  EXPECT_EQ(Run("frobnicate"), kExitConfig);
  EXPECT_EQ(Run("--help"), 0);
}

}  // namespace
}  // namespace mbtdnn
