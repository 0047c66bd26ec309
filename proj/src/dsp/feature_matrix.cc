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

#include "mbtdnn/dsp/feature_matrix.h"

#include <fstream>
#include <vector>

#include "mbtdnn/byte_io.h"
#include "mbtdnn/error.h"

namespace mbtdnn {

void WriteFeatureMatrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os.write("FMAT", 4);
  byte_io::WriteU32(os, static_cast<uint32_t>(m.coeffs.rows()));
  byte_io::WriteU32(os, static_cast<uint32_t>(m.coeffs.cols()));
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m.coeffs;
  byte_io::WriteF32Array(os, rm.data(), static_cast<size_t>(rm.size()));
  if (!os) throw Error(ErrorCode::kIo, "short write to " + path);
}

FeatureMatrix ReadFeatureMatrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "FMAT") {
    throw Error(ErrorCode::kIo, path + ": bad FMAT magic");
  }
  uint32_t rows = 0, cols = 0;
  if (!byte_io::ReadU32(is, &rows) || !byte_io::ReadU32(is, &cols)) {
    throw Error(ErrorCode::kIo, path + ": truncated FMAT header");
  }
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  if (!byte_io::ReadF32Array(is, rm.data(), static_cast<size_t>(rm.size()))) {
    throw Error(ErrorCode::kIo, path + ": truncated FMAT payload");
  }
  FeatureMatrix m;
  m.coeffs = rm;
  return m;
}

}  // namespace mbtdnn
