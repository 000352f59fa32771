// Copyright 2026 The llpbag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace llpbag {

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

// "%.17g": fixed 17 significant digits, also round-trips exactly.
std::string FormatDouble17(double v);

// Strict full-string parse; throws std::invalid_argument on trailing junk.
double ParseDouble(std::string_view s);
long long ParseInt(std::string_view s);
unsigned long long ParseUnsigned(std::string_view s);

std::vector<std::string_view> SplitFields(std::string_view line, char sep);
std::string_view Trim(std::string_view s);

}  // namespace llpbag
