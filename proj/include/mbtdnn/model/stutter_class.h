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

#ifndef MBTDNN_MODEL_STUTTER_CLASS_H_
#define MBTDNN_MODEL_STUTTER_CLASS_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace mbtdnn {

// Fixed class <-> index mapping used everywhere, including checkpoints.
enum class StutterClass : int {
  kFluent = 0,
  kRepetition = 1,
  kProlongation = 2,
  kBlock = 3,
  kInterjection = 4,
};

inline constexpr int kNumClasses = 5;
inline constexpr int kNumDisfluentClasses = 4;

inline constexpr std::array<StutterClass, kNumClasses> kAllClasses = {
    StutterClass::kFluent, StutterClass::kRepetition, StutterClass::kProlongation,
    StutterClass::kBlock, StutterClass::kInterjection};

// Binary target of the fluent branch: every disfluent class collapses into
// one pseudo label.
enum class FluentLabel : int { kFluent = 0, kDisfluent = 1 };

const char* ClassName(StutterClass c);
// F, R, P, B or I.
char ClassLetter(StutterClass c);
// Accepts the full names (case-insensitive) or the single-letter codes.
std::optional<StutterClass> ParseClass(std::string_view text);

inline int ClassIndex(StutterClass c) { return static_cast<int>(c); }
inline FluentLabel PseudoLabel(StutterClass c) {
  return c == StutterClass::kFluent ? FluentLabel::kFluent : FluentLabel::kDisfluent;
}
// Index into the four-way disfluent head, or -1 for Fluent.
inline int DisfluentIndex(StutterClass c) { return static_cast<int>(c) - 1; }
inline StutterClass FromDisfluentIndex(int i) { return static_cast<StutterClass>(i + 1); }

}  // namespace mbtdnn

#endif  // MBTDNN_MODEL_STUTTER_CLASS_H_
