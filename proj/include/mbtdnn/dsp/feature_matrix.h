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

#ifndef MBTDNN_DSP_FEATURE_MATRIX_H_
#define MBTDNN_DSP_FEATURE_MATRIX_H_

#include <string>

#include <Eigen/Core>

namespace mbtdnn {

// MFCC features for one clip: rows are cepstral coefficients, columns are
// frames.
struct FeatureMatrix {
  Eigen::MatrixXf coeffs;

  int rows() const { return static_cast<int>(coeffs.rows()); }
  int frames() const { return static_cast<int>(coeffs.cols()); }
  bool AllFinite() const { return coeffs.allFinite(); }
};

// FMAT layout: the 4 bytes "FMAT", u32 rows, u32 cols, then rows*cols
// little-endian f32 values in row-major order.
void WriteFeatureMatrix(const std::string& path, const FeatureMatrix& m);
FeatureMatrix ReadFeatureMatrix(const std::string& path);

}  // namespace mbtdnn

#endif  // MBTDNN_DSP_FEATURE_MATRIX_H_
