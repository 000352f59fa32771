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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "llpbag/experiments.h"
#include "llpbag/trainer.h"

namespace llpbag::cli {

// Fully resolved settings for one invocation. Every field maps to one
// `key = value` line of the config file.
struct RunConfig {
  std::uint64_t seed = 1;
  DatasetConfig data;
  TrainConfig train;
  std::vector<std::size_t> sample_sizes{12, 25, 50, 100, 150, 200};
  std::size_t draws_per_point = 100;
  std::vector<Method> methods;
  std::size_t num_seeds = 5;
  std::size_t histogram_bins = 20;
  bool include_degenerate = false;
};

RunConfig DefaultRunConfig();

// Flat `key = value` lines; '#' starts a comment. Unknown keys, repeated
// keys and unparsable values throw ConfigError naming the key.
RunConfig ParseConfig(std::istream& is);

// Cross-field checks for `subcommand`; throws ConfigError.
void ValidateRunConfig(const RunConfig& config, const std::string& subcommand);

// Config text that ParseConfig reads back to the same RunConfig.
std::string FormatConfig(const RunConfig& config);

// Entry point shared by main() and the tests. Returns the process exit
// status; diagnostics go to `err`.
int ParseAndDispatch(const std::vector<std::string>& args, std::ostream& out,
                     std::ostream& err);

}  // namespace llpbag::cli
