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
#include <span>
#include <utility>
#include <vector>

#include "llpbag/rng.h"

namespace llpbag {

// ln C(n, k) via log-gamma. Requires 0 <= k <= n.
double LogChoose(std::int64_t n, std::int64_t k);

// Per-class instance counts. Length >= 1, every entry >= 0.
class ClassCountVector {
 public:
  ClassCountVector() = default;
  explicit ClassCountVector(std::vector<std::int64_t> counts);
  ClassCountVector(std::initializer_list<std::int64_t> counts)
      : ClassCountVector(std::vector<std::int64_t>(counts)) {}

  std::size_t num_classes() const { return counts_.size(); }
  std::int64_t operator[](std::size_t c) const { return counts_[c]; }
  std::span<const std::int64_t> values() const { return counts_; }
  std::int64_t total() const { return total_; }

  friend bool operator==(const ClassCountVector&,
                         const ClassCountVector&) = default;
  friend auto operator<=>(const ClassCountVector& a,
                          const ClassCountVector& b) {
    return a.counts_ <=> b.counts_;
  }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Number of successes in `draws` draws without replacement from a population
// of `population` items of which `successes` are marked.
class UnivariateHypergeometric {
 public:
  UnivariateHypergeometric(std::int64_t population, std::int64_t successes,
                           std::int64_t draws);

  std::int64_t population() const { return population_; }
  std::int64_t successes() const { return successes_; }
  std::int64_t draws() const { return draws_; }

  std::int64_t min_support() const;
  std::int64_t max_support() const;
  std::int64_t mode() const;
  double mean() const;
  double variance() const;

  double LogPmf(std::int64_t k) const;
  double Pmf(std::int64_t k) const;

  // Inverse-CDF draw. The cumulative sum starts at the mode and grows
  // outward, always taking the heavier neighbour next; neighbouring
  // probabilities come from the pmf ratio recurrence. Consumes no randomness
  // when the support is a single point.
  std::int64_t Sample(Rng& rng) const;

  friend bool operator==(const UnivariateHypergeometric&,
                         const UnivariateHypergeometric&) = default;

 private:
  std::int64_t population_;
  std::int64_t successes_;
  std::int64_t draws_;
};

// Joint law of per-class counts when `draws` items are taken without
// replacement from a population with per-class counts K. Immutable.
class MultivariateHypergeometric {
 public:
  static constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

  MultivariateHypergeometric(ClassCountVector population, std::int64_t draws);

  const ClassCountVector& population() const { return population_; }
  std::int64_t population_size() const { return population_.total(); }
  std::int64_t draws() const { return draws_; }
  std::size_t num_classes() const { return population_.num_classes(); }

  // K_c / N. For N == 0 every proportion is reported as 0.
  double proportion(std::size_t c) const;

  bool InSupport(const ClassCountVector& k) const;

  // ln P(X = k); -infinity outside the support. Throws DimensionError on
  // a class-count length mismatch.
  double LogPmf(const ClassCountVector& k) const;
  double Pmf(const ClassCountVector& k) const;

  // Product over classes of (min(K_c, n) + 1), saturating at SIZE_MAX.
  std::size_t SupportBound() const;

  // Every support point with its probability, in lexicographic order.
  // Throws CapacityError when SupportBound() exceeds `cap`.
  std::vector<std::pair<ClassCountVector, double>> EnumerateSupport(
      std::size_t cap = kDefaultEnumerationCap) const;

  // Sequential conditional draws: class c is drawn from the univariate law
  // over what remains, the last class takes the remainder.
  ClassCountVector Sample(Rng& rng) const;

  // Exact marginal law of X_c. Throws ArgumentError for a bad index.
  UnivariateHypergeometric Marginal(std::size_t class_index) const;

 private:
  ClassCountVector population_;
  std::int64_t draws_;
  double log_total_;  // ln C(N, n)
};

}  // namespace llpbag
