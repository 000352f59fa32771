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

#include <span>
#include <vector>

#include "llpbag/hypergeom.h"

namespace llpbag {

// Class fractions in [0, 1] summing to 1 within kSumTolerance.
class ProportionVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ProportionVector() = default;
  explicit ProportionVector(std::vector<double> values);

  // counts / counts.total(); throws ArgumentError for an all-zero vector.
  static ProportionVector FromCounts(const ClassCountVector& counts);
  static ProportionVector Uniform(std::size_t num_classes);

  std::size_t num_classes() const { return values_.size(); }
  double operator[](std::size_t c) const { return values_[c]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const ProportionVector&,
                         const ProportionVector&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace llpbag
