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

#include "mbtdnn/cli/checkpoint.h"

#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mbtdnn/byte_io.h"
#include "mbtdnn/error.h"

namespace mbtdnn {

using byte_io::ReadF32Array;
using byte_io::ReadU32;
using byte_io::WriteF32Array;
using byte_io::WriteU32;

namespace {

[[noreturn]] void Corrupt(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kCorruptCheckpoint, path + ": " + msg);
}

struct RawHeader {
  CheckpointHeader header;
  uint64_t payload_start = 0;
  uint64_t file_size = 0;
};

RawHeader ReadHeader(std::ifstream& in, const std::string& path) {
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  if (end < 0) Corrupt(path, "cannot determine file size");
  in.seekg(0);
  RawHeader raw;
  raw.file_size = static_cast<uint64_t>(end);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    Corrupt(path, "not a checkpoint (bad magic)");
  }
  uint32_t version = 0, header_len = 0;
  if (!ReadU32(in, &version)) Corrupt(path, "truncated before version");
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, path + ": checkpoint version " +
                                                 std::to_string(version) + ", expected " +
                                                 std::to_string(kCheckpointVersion));
  }
  if (!ReadU32(in, &header_len)) Corrupt(path, "truncated before header length");
  if (12 + static_cast<uint64_t>(header_len) > raw.file_size) Corrupt(path, "truncated header");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) Corrupt(path, "truncated header");
  raw.payload_start = 12 + static_cast<uint64_t>(header_len);

  CheckpointHeader& h = raw.header;
  h.version = version;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    h.arch = ArchFromJson(j.at("arch"));
    h.classes = j.at("classes").get<std::vector<std::string>>();
    h.podcasts = j.at("podcasts").get<std::vector<std::string>>();
    h.meta = j.value("meta", nlohmann::json::object());
    h.payload_bytes = j.at("payload_bytes").get<uint64_t>();
    for (const auto& t : j.at("tensors")) {
      h.tensors.push_back({t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>(),
                           t.at("offset").get<uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    Corrupt(path, std::string("bad header: ") + e.what());
  }
  return raw;
}

}  // namespace

nlohmann::json ArchToJson(const ArchConfig& a) {
  return {{"input_dim", a.input_dim},
          {"channels", a.channels},
          {"head_hidden", a.head_hidden},
          {"n_fluent", a.n_fluent},
          {"n_disfluent", a.n_disfluent},
          {"n_podcasts", a.n_podcasts},
          {"dropout", a.dropout},
          {"bn_order", a.bn_order == BnOrder::kReluThenBn ? "relu_bn" : "bn_relu"}};
}

ArchConfig ArchFromJson(const nlohmann::json& j) {
  ArchConfig a;
  try {
    a.input_dim = j.at("input_dim").get<int>();
    a.channels = j.at("channels").get<std::vector<int>>();
    a.head_hidden = j.at("head_hidden").get<std::vector<int>>();
    a.n_fluent = j.at("n_fluent").get<int>();
    a.n_disfluent = j.at("n_disfluent").get<int>();
    a.n_podcasts = j.at("n_podcasts").get<int>();
    a.dropout = j.at("dropout").get<double>();
    const std::string order = j.at("bn_order").get<std::string>();
    if (order == "relu_bn") {
      a.bn_order = BnOrder::kReluThenBn;
    } else if (order == "bn_relu") {
      a.bn_order = BnOrder::kBnThenRelu;
    } else {
      throw Error(ErrorCode::kCorruptCheckpoint, "unknown bn_order '" + order + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptCheckpoint, std::string("bad architecture: ") + e.what());
  }
  return a;
}

void SaveCheckpoint(const std::string& path, Model<float>& model,
                    const std::vector<std::string>& podcasts, const nlohmann::json& meta) {
  if (static_cast<int>(podcasts.size()) != model.arch().n_podcasts) {
    throw Error(ErrorCode::kInvalidConfig, "podcast map does not match the speaker head");
  }
  const std::vector<nn::Param<float>*> params = model.AllParams();
  nlohmann::json tensors = nlohmann::json::array();
  uint64_t offset = 0;
  for (const nn::Param<float>* p : params) {
    tensors.push_back({{"name", p->name}, {"shape", p->shape}, {"offset", offset}});
    offset += static_cast<uint64_t>(p->numel()) * 4;
  }
  std::vector<std::string> classes;
  for (StutterClass c : kAllClasses) classes.push_back(ClassName(c));
  const nlohmann::json header = {{"arch", ArchToJson(model.arch())},
                                 {"classes", classes},
                                 {"podcasts", podcasts},
                                 {"meta", meta},
                                 {"tensors", tensors},
                                 {"payload_bytes", offset}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(kCheckpointMagic, 4);
  WriteU32(out, kCheckpointVersion);
  WriteU32(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const nn::Param<float>* p : params) {
    WriteF32Array(out, p->value.data(), static_cast<size_t>(p->numel()));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

CheckpointHeader InspectCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return ReadHeader(in, path).header;
}

LoadedCheckpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  RawHeader raw = ReadHeader(in, path);
  const CheckpointHeader& h = raw.header;
  if (raw.payload_start + h.payload_bytes != raw.file_size) {
    Corrupt(path, "payload holds " + std::to_string(raw.file_size - raw.payload_start) +
                      " bytes, header declares " + std::to_string(h.payload_bytes));
  }
  if (static_cast<int>(h.podcasts.size()) != h.arch.n_podcasts) {
    Corrupt(path, "podcast map does not match the architecture");
  }
  try {
    h.arch.Validate();
  } catch (const Error& e) {
    Corrupt(path, e.what());
  }

  LoadedCheckpoint out;
  out.header = h;
  out.model = std::make_unique<Model<float>>(h.arch, 0);
  std::map<std::string, nn::Param<float>*> by_name;
  for (nn::Param<float>* p : out.model->AllParams()) by_name[p->name] = p;
  std::set<std::string> seen;
  for (const TensorEntry& t : h.tensors) {
    auto it = by_name.find(t.name);
    if (it == by_name.end()) Corrupt(path, "unknown tensor " + t.name);
    if (!seen.insert(t.name).second) Corrupt(path, "duplicate tensor " + t.name);
    nn::Param<float>& p = *it->second;
    if (t.shape != p.shape) Corrupt(path, "shape mismatch for " + t.name);
    const uint64_t bytes = static_cast<uint64_t>(p.numel()) * 4;
    if (t.offset % 4 != 0 || t.offset + bytes > h.payload_bytes) {
      Corrupt(path, "tensor " + t.name + " lies outside the payload");
    }
    in.seekg(static_cast<std::streamoff>(raw.payload_start + t.offset));
    if (!ReadF32Array(in, p.value.data(), static_cast<size_t>(p.numel()))) {
      Corrupt(path, "truncated tensor " + t.name);
    }
  }
  if (seen.size() != by_name.size()) {
    for (const auto& [name, p] : by_name) {
      if (!seen.contains(name)) Corrupt(path, "missing tensor " + name);
    }
  }
  return out;
}

std::string DescribeCheckpoint(const CheckpointHeader& h) {
  std::ostringstream out;
  out << "version " << h.version << "\n";
  out << "arch " << ArchToJson(h.arch).dump() << "\n";
  out << "classes";
  for (const std::string& c : h.classes) out << " " << c;
  out << "\npodcasts " << h.podcasts.size() << "\n";
  int64_t total = 0;
  for (const TensorEntry& t : h.tensors) {
    int64_t n = 1;
    for (int d : t.shape) n *= d;
    total += n;
  }
  out << "tensors " << h.tensors.size() << " (" << total << " values, " << h.payload_bytes
      << " bytes)\n";
  if (!h.meta.empty()) out << "meta " << h.meta.dump() << "\n";
  return out.str();
}

}  // namespace mbtdnn
