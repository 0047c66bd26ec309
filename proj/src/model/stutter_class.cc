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

#include "mbtdnn/model/stutter_class.h"

#include <algorithm>
#include <cctype>

namespace mbtdnn {

const char* ClassName(StutterClass c) {
  switch (c) {
    case StutterClass::kFluent: return "Fluent";
    case StutterClass::kRepetition: return "Repetition";
    case StutterClass::kProlongation: return "Prolongation";
    case StutterClass::kBlock: return "Block";
    case StutterClass::kInterjection: return "Interjection";
  }
  return "?";
}

char ClassLetter(StutterClass c) { return ClassName(c)[0]; }

std::optional<StutterClass> ParseClass(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (StutterClass c : kAllClasses) {
    std::string name = ClassName(c);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == name) return c;
    if (lower.size() == 1 && lower[0] == name[0]) return c;
  }
  return std::nullopt;
}

}  // namespace mbtdnn
