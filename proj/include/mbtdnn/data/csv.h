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

#ifndef MBTDNN_DATA_CSV_H_
#define MBTDNN_DATA_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace mbtdnn {

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
// Surrounding whitespace of unquoted fields is trimmed.
std::vector<std::string> SplitCsvLine(std::string_view line);

// Quotes the field if it contains a comma, quote or newline.
std::string CsvEscape(const std::string& field);

std::string Trim(std::string_view s);

}  // namespace mbtdnn

#endif  // MBTDNN_DATA_CSV_H_
