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

#ifndef MBTDNN_BYTE_IO_H_
#define MBTDNN_BYTE_IO_H_

// Little-endian helpers shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace mbtdnn {
namespace byte_io {

inline void WriteU32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool ReadU32(std::istream& is, uint32_t* v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  *v = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
       (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  return true;
}

inline void WriteF32(std::ostream& os, float f) {
  uint32_t u;
  std::memcpy(&u, &f, 4);
  WriteU32(os, u);
}

inline bool ReadF32(std::istream& is, float* f) {
  uint32_t u;
  if (!ReadU32(is, &u)) return false;
  std::memcpy(f, &u, 4);
  return true;
}

// Bulk variants; on little-endian hosts these are plain copies.
inline void WriteF32Array(std::ostream& os, const float* data, size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data),
             static_cast<std::streamsize>(n * sizeof(float)));
  } else {
    for (size_t i = 0; i < n; ++i) WriteF32(os, data[i]);
  }
}

inline bool ReadF32Array(std::istream& is, float* data, size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(data),
                                     static_cast<std::streamsize>(n * sizeof(float))));
  } else {
    for (size_t i = 0; i < n; ++i) {
      if (!ReadF32(is, data + i)) return false;
    }
    return true;
  }
}

}  // namespace byte_io
}  // namespace mbtdnn

#endif  // MBTDNN_BYTE_IO_H_
