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

#ifndef MBTDNN_CLI_CHECKPOINT_H_
#define MBTDNN_CLI_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbtdnn/model/model.h"

namespace mbtdnn {

// File layout, all integers little-endian:
//   "SNCK" | u32 version | u32 header bytes | JSON header | f32 payload
// The header carries the architecture, the class and podcast maps, free
// form metadata and a directory of (name, shape, offset) where offset is
// the byte position of the tensor within the payload.
inline constexpr char kCheckpointMagic[4] = {'S', 'N', 'C', 'K'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct TensorEntry {
  std::string name;
  std::vector<int> shape;
  uint64_t offset = 0;
};

struct CheckpointHeader {
  uint32_t version = kCheckpointVersion;
  ArchConfig arch;
  std::vector<std::string> classes;
  std::vector<std::string> podcasts;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<TensorEntry> tensors;
  uint64_t payload_bytes = 0;
};

struct LoadedCheckpoint {
  CheckpointHeader header;
  std::unique_ptr<Model<float>> model;
};

nlohmann::json ArchToJson(const ArchConfig& arch);
// Throws CorruptCheckpoint on missing or mistyped fields.
ArchConfig ArchFromJson(const nlohmann::json& j);

void SaveCheckpoint(const std::string& path, Model<float>& model,
                    const std::vector<std::string>& podcasts,
                    const nlohmann::json& meta = nlohmann::json::object());

// Reads the header without touching the payload. Throws CorruptCheckpoint
// and VersionMismatch.
CheckpointHeader InspectCheckpoint(const std::string& path);
LoadedCheckpoint LoadCheckpoint(const std::string& path);

std::string DescribeCheckpoint(const CheckpointHeader& header);

}  // namespace mbtdnn

#endif  // MBTDNN_CLI_CHECKPOINT_H_
