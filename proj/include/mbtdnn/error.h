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

#ifndef MBTDNN_ERROR_H_
#define MBTDNN_ERROR_H_

#include <stdexcept>
#include <string>

namespace mbtdnn {

enum class ErrorCode {
  kClipTooShort,
  kInvalidConfig,
  kInputTooShort,
  kDegenerateBatch,
  kInvalidRate,
  kIndexOutOfRange,
  kShapeMismatch,
  kNonDeterministicLoss,
  kInvalidArch,
  kEmptySubset,
  kParseError,
  kUnknownLabel,
  kMalformedRow,
  kTooFewPodcasts,
  kEmptyPodcast,
  kEmptyBatch,
  kLengthMismatch,
  kEmptyMatrix,
  kIo,
  kCorruptCheckpoint,
  kVersionMismatch,
  kNumericFailure,
};

const char* ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries a code so that callers (the
// command-line tool in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const { return code_; }
  // The message without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace mbtdnn

#endif  // MBTDNN_ERROR_H_
