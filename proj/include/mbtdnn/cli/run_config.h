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

#ifndef MBTDNN_CLI_RUN_CONFIG_H_
#define MBTDNN_CLI_RUN_CONFIG_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mbtdnn/data/dataset.h"
#include "mbtdnn/dsp/mfcc.h"
#include "mbtdnn/model/model.h"
#include "mbtdnn/training/trainer.h"

namespace mbtdnn {

struct SplitConfig {
  SplitMode mode = SplitMode::kByPodcast;
  std::array<double, 3> ratios = {0.8, 0.1, 0.1};
  double valid_fraction = 0.1;
  int folds = 10;
  uint64_t seed = 0;
};

// Every setting of a run in one place. The text form is one `key = value`
// per line; '#' starts a comment. Lists are comma separated.
struct RunConfig {
  TrainConfig train;
  ArchConfig arch;
  MfccConfig mfcc;
  SplitConfig split;
  SyntheticConfig synth;
  // Single manifest to be split, or explicit train/valid/test manifests.
  std::string manifest;
  std::string train_manifest;
  std::string valid_manifest;
  std::string test_manifest;

  // Throws InvalidConfig for unknown keys and malformed values.
  void Set(const std::string& key, const std::string& value);
  // `source` names the text in error messages.
  void Parse(const std::string& text, const std::string& source = "config");
  void Load(const std::string& path);
  std::string ToText() const;

  static const std::vector<std::string>& Keys();
};

}  // namespace mbtdnn

#endif  // MBTDNN_CLI_RUN_CONFIG_H_
