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

#include "llpbag/proportion.h"

#include <cmath>
#include <string>

#include "llpbag/errors.h"

namespace llpbag {

ProportionVector::ProportionVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("proportion vector is empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ArgumentError("proportion entry outside [0, 1]: " +
                          std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ArgumentError("proportions sum to " + std::to_string(sum));
  }
}

ProportionVector ProportionVector::FromCounts(const ClassCountVector& counts) {
  if (counts.total() == 0) {
    throw ArgumentError("cannot form proportions from an all-zero count");
  }
  std::vector<double> v(counts.num_classes());
  const auto total = static_cast<double>(counts.total());
  for (std::size_t c = 0; c < v.size(); ++c) {
    v[c] = static_cast<double>(counts[c]) / total;
  }
  return ProportionVector(std::move(v));
}

ProportionVector ProportionVector::Uniform(std::size_t num_classes) {
  return ProportionVector(
      std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes)));
}

}  // namespace llpbag
