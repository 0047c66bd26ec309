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

#include "mbtdnn/error.h"

namespace mbtdnn {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInputTooShort: return "InputTooShort";
    case ErrorCode::kDegenerateBatch: return "DegenerateBatch";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonDeterministicLoss: return "NonDeterministicLoss";
    case ErrorCode::kInvalidArch: return "InvalidArch";
    case ErrorCode::kEmptySubset: return "EmptySubset";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kTooFewPodcasts: return "TooFewPodcasts";
    case ErrorCode::kEmptyPodcast: return "EmptyPodcast";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kNumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

}  // namespace mbtdnn
