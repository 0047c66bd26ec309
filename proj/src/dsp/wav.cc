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

#include "mbtdnn/dsp/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mbtdnn/error.h"

namespace mbtdnn {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void PutU16(std::string* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xFF));
  out->push_back(static_cast<char>(v >> 8));
}

void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

void AudioClip::Validate() const {
  if (samples.empty()) throw Error(ErrorCode::kInvalidConfig, "empty audio clip");
  if (sample_rate <= 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "sample rate must be positive, got " + std::to_string(sample_rate));
  }
}

AudioClip ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kIo, path + " is not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    uint32_t size = ReadU32(chunk + 4);
    size_t body = pos + 8;
    size_t avail = std::min<size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw Error(ErrorCode::kIo, path + ": short fmt chunk");
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 26) throw Error(ErrorCode::kIo, path + ": short extensible fmt");
        format = ReadU16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (data == nullptr || rate == 0) {
    throw Error(ErrorCode::kIo, path + ": missing fmt or data chunk");
  }
  if (channels != 1) {
    throw Error(ErrorCode::kIo, path + ": expected mono audio, got " +
                                    std::to_string(channels) + " channels");
  }

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    size_t n = data_size / 2;
    clip.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      auto v = static_cast<int16_t>(ReadU16(data + 2 * i));
      clip.samples[i] = static_cast<float>(v) / 32768.0f;
    }
  } else if (format == kFormatFloat && bits == 32) {
    size_t n = data_size / 4;
    clip.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = ReadU32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, sizeof(f));
      clip.samples[i] = f;
    }
  } else {
    throw Error(ErrorCode::kIo, path + ": unsupported sample format " +
                                    std::to_string(format) + "/" +
                                    std::to_string(bits) + " bits");
  }
  return clip;
}

void WriteWav(const std::string& path, const AudioClip& clip) {
  const auto n = static_cast<uint32_t>(clip.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  PutU32(&out, 36 + 2 * n);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, kFormatPcm);
  PutU16(&out, 1);
  PutU32(&out, static_cast<uint32_t>(clip.sample_rate));
  PutU32(&out, static_cast<uint32_t>(clip.sample_rate) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, 2 * n);
  for (float s : clip.samples) {
    float c = std::clamp(s, -1.0f, 1.0f);
    auto v = static_cast<int16_t>(std::lround(c * 32767.0f));
    PutU16(&out, static_cast<uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path);
}

AudioClip SliceClip(const AudioClip& clip, double start_ms, double stop_ms) {
  auto to_index = [&](double ms) {
    double idx = std::round(ms * clip.sample_rate / 1000.0);
    return static_cast<size_t>(std::clamp(idx, 0.0, static_cast<double>(clip.samples.size())));
  };
  size_t begin = to_index(start_ms);
  size_t end = stop_ms < 0 ? clip.samples.size() : to_index(stop_ms);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  if (end > begin) {
    out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       clip.samples.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace mbtdnn
