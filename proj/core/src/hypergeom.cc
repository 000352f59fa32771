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

#include "llpbag/hypergeom.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "llpbag/errors.h"

namespace llpbag {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// std::lgamma writes the global signgam; the reentrant form keeps
// distributions shareable across threads.
double LogGamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

}  // namespace

double LogChoose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) {
    throw ArgumentError("LogChoose requires 0 <= k <= n");
  }
  if (k == 0 || k == n) return 0.0;
  return LogGamma(static_cast<double>(n) + 1.0) -
         LogGamma(static_cast<double>(k) + 1.0) -
         LogGamma(static_cast<double>(n - k) + 1.0);
}

ClassCountVector::ClassCountVector(std::vector<std::int64_t> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) {
    throw DimensionError("class count vector must have at least one class");
  }
  for (std::int64_t c : counts_) {
    if (c < 0) throw ArgumentError("class counts must be nonnegative");
    total_ += c;
  }
}

// ---------------------------------------------------------------------------

UnivariateHypergeometric::UnivariateHypergeometric(std::int64_t population,
                                                   std::int64_t successes,
                                                   std::int64_t draws)
    : population_(population), successes_(successes), draws_(draws) {
  if (population < 0 || successes < 0 || draws < 0 ||
      successes > population || draws > population) {
    throw ArgumentError("hypergeometric parameters need 0 <= K, n <= N");
  }
}

std::int64_t UnivariateHypergeometric::min_support() const {
  return std::max<std::int64_t>(0, draws_ - (population_ - successes_));
}

std::int64_t UnivariateHypergeometric::max_support() const {
  return std::min(successes_, draws_);
}

std::int64_t UnivariateHypergeometric::mode() const {
  const double m = static_cast<double>(draws_ + 1) *
                   static_cast<double>(successes_ + 1) /
                   static_cast<double>(population_ + 2);
  return std::clamp(static_cast<std::int64_t>(std::floor(m)), min_support(),
                    max_support());
}

double UnivariateHypergeometric::mean() const {
  if (population_ == 0) return 0.0;
  return static_cast<double>(draws_) * static_cast<double>(successes_) /
         static_cast<double>(population_);
}

double UnivariateHypergeometric::variance() const {
  if (population_ <= 1) return 0.0;
  const double N = static_cast<double>(population_);
  const double K = static_cast<double>(successes_);
  const double n = static_cast<double>(draws_);
  return n * (K / N) * ((N - K) / N) * ((N - n) / (N - 1.0));
}

double UnivariateHypergeometric::LogPmf(std::int64_t k) const {
  if (k < min_support() || k > max_support()) return kNegInf;
  return LogChoose(successes_, k) +
         LogChoose(population_ - successes_, draws_ - k) -
         LogChoose(population_, draws_);
}

double UnivariateHypergeometric::Pmf(std::int64_t k) const {
  const double lp = LogPmf(k);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

std::int64_t UnivariateHypergeometric::Sample(Rng& rng) const {
  const std::int64_t lo_bound = min_support();
  const std::int64_t hi_bound = max_support();
  if (lo_bound == hi_bound) return lo_bound;

  const double N = static_cast<double>(population_);
  const double K = static_cast<double>(successes_);
  const double n = static_cast<double>(draws_);
  // p(k+1) / p(k)
  auto up_ratio = [&](std::int64_t k) {
    const double kd = static_cast<double>(k);
    return (K - kd) * (n - kd) / ((kd + 1.0) * (N - K - n + kd + 1.0));
  };

  const std::int64_t m = mode();
  const double p_mode = Pmf(m);
  double u = UniformUnit(rng) - p_mode;
  if (u < 0.0) return m;

  std::int64_t lo = m;
  std::int64_t hi = m;
  double p_lo = p_mode;
  double p_hi = p_mode;
  while (true) {
    const bool can_down = lo > lo_bound;
    const bool can_up = hi < hi_bound;
    if (!can_down && !can_up) break;
    const double next_down = can_down ? p_lo / up_ratio(lo - 1) : -1.0;
    const double next_up = can_up ? p_hi * up_ratio(hi) : -1.0;
    if (next_up >= next_down) {
      ++hi;
      p_hi = next_up;
      u -= p_hi;
      if (u < 0.0) return hi;
    } else {
      --lo;
      p_lo = next_down;
      u -= p_lo;
      if (u < 0.0) return lo;
    }
  }
  // Only reachable through rounding in the accumulated mass.
  return m;
}

// ---------------------------------------------------------------------------

MultivariateHypergeometric::MultivariateHypergeometric(
    ClassCountVector population, std::int64_t draws)
    : population_(std::move(population)), draws_(draws) {
  if (population_.num_classes() == 0) {
    throw DimensionError("population must have at least one class");
  }
  if (draws < 0 || draws > population_.total()) {
    throw ArgumentError("draws must lie in [0, N], got " +
                        std::to_string(draws));
  }
  log_total_ = LogChoose(population_.total(), draws_);
}

double MultivariateHypergeometric::proportion(std::size_t c) const {
  if (population_.total() == 0) return 0.0;
  return static_cast<double>(population_[c]) /
         static_cast<double>(population_.total());
}

bool MultivariateHypergeometric::InSupport(const ClassCountVector& k) const {
  if (k.num_classes() != num_classes()) {
    throw DimensionError("count vector has " +
                         std::to_string(k.num_classes()) +
                         " classes, distribution has " +
                         std::to_string(num_classes()));
  }
  if (k.total() != draws_) return false;
  for (std::size_t c = 0; c < num_classes(); ++c) {
    if (k[c] > population_[c]) return false;
  }
  return true;
}

double MultivariateHypergeometric::LogPmf(const ClassCountVector& k) const {
  if (!InSupport(k)) return kNegInf;
  double acc = -log_total_;
  for (std::size_t c = 0; c < num_classes(); ++c) {
    acc += LogChoose(population_[c], k[c]);
  }
  return acc;
}

double MultivariateHypergeometric::Pmf(const ClassCountVector& k) const {
  const double lp = LogPmf(k);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

std::size_t MultivariateHypergeometric::SupportBound() const {
  std::size_t bound = 1;
  for (std::int64_t kc : population_.values()) {
    const auto width = static_cast<std::size_t>(std::min(kc, draws_)) + 1;
    if (bound > std::numeric_limits<std::size_t>::max() / width) {
      return std::numeric_limits<std::size_t>::max();
    }
    bound *= width;
  }
  return bound;
}

std::vector<std::pair<ClassCountVector, double>>
MultivariateHypergeometric::EnumerateSupport(std::size_t cap) const {
  const std::size_t bound = SupportBound();
  if (bound > cap) {
    throw CapacityError("support bound " + std::to_string(bound) +
                        " exceeds enumeration cap " + std::to_string(cap));
  }
  const std::size_t C = num_classes();
  // Largest count still placeable in classes c..C-1.
  std::vector<std::int64_t> tail_capacity(C + 1, 0);
  for (std::size_t c = C; c-- > 0;) {
    tail_capacity[c] = tail_capacity[c + 1] + population_[c];
  }

  std::vector<std::pair<ClassCountVector, double>> out;
  std::vector<std::int64_t> k(C, 0);
  auto recurse = [&](auto&& self, std::size_t c, std::int64_t remaining,
                     double log_acc) -> void {
    if (c + 1 == C) {
      if (remaining > population_[c]) return;
      k[c] = remaining;
      out.emplace_back(ClassCountVector(k),
                       std::exp(log_acc + LogChoose(population_[c], remaining) -
                                log_total_));
      return;
    }
    const std::int64_t lo =
        std::max<std::int64_t>(0, remaining - tail_capacity[c + 1]);
    const std::int64_t hi = std::min(population_[c], remaining);
    for (std::int64_t v = hi; v >= lo; --v) {
      k[c] = v;
      self(self, c + 1, remaining - v,
           log_acc + LogChoose(population_[c], v));
    }
  };
  recurse(recurse, 0, draws_, 0.0);
  std::reverse(out.begin(), out.end());
  return out;
}

ClassCountVector MultivariateHypergeometric::Sample(Rng& rng) const {
  const std::size_t C = num_classes();
  std::vector<std::int64_t> k(C, 0);
  std::int64_t remaining_population = population_.total();
  std::int64_t remaining_draws = draws_;
  for (std::size_t c = 0; c + 1 < C && remaining_draws > 0; ++c) {
    const UnivariateHypergeometric step(remaining_population, population_[c],
                                        remaining_draws);
    k[c] = step.Sample(rng);
    remaining_population -= population_[c];
    remaining_draws -= k[c];
  }
  k[C - 1] += remaining_draws;
  return ClassCountVector(std::move(k));
}

UnivariateHypergeometric MultivariateHypergeometric::Marginal(
    std::size_t class_index) const {
  if (class_index >= num_classes()) {
    throw ArgumentError("class index " + std::to_string(class_index) +
                        " out of range");
  }
  return UnivariateHypergeometric(population_.total(), population_[class_index],
                                  draws_);
}

}  // namespace llpbag
