// Copyright 2026 The kgdsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgdsel::csv {

/// Splits on commas and trims whitespace. No quoting support; none of the
/// schemas here need it.
std::vector<std::string> split_line(std::string_view line);

std::optional<double> parse_double(std::string_view field);

/// Shortest round-trippable text for a double.
std::string format_double(double value);

}  // namespace kgdsel::csv
