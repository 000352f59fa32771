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

#include "llpbag/losses.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "llpbag/errors.h"

namespace llpbag {
namespace {

void CheckSameLength(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionError("proportion lengths differ: " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

double ProportionLoss(const ProportionVector& predicted,
                      const ProportionVector& target) {
  CheckSameLength(predicted.num_classes(), target.num_classes());
  double loss = 0.0;
  for (std::size_t c = 0; c < target.num_classes(); ++c) {
    if (target[c] == 0.0) continue;
    loss -= target[c] * std::log(std::clamp(predicted[c], kLogClamp, 1.0));
  }
  return loss;
}

double Entropy(const ProportionVector& p) { return ProportionLoss(p, p); }

ProportionVector PredictBagProportion(const Eigen::MatrixXd& confidences) {
  if (confidences.rows() == 0 || confidences.cols() == 0) {
    throw ArgumentError("confidence matrix is empty");
  }
  const Eigen::RowVectorXd mean = confidences.colwise().mean();
  return ProportionVector(std::vector<double>(mean.data(), mean.data() + mean.size()));
}

PerturbedSupervision PerturbSupervision(const ClassCountVector& class_counts,
                                        std::size_t n, Rng& rng) {
  if (n == 0 || static_cast<std::int64_t>(n) > class_counts.total()) {
    throw ArgumentError("sample size " + std::to_string(n) +
                        " outside [1, " + std::to_string(class_counts.total()) +
                        "]");
  }
  const MultivariateHypergeometric dist(class_counts,
                                        static_cast<std::int64_t>(n));
  ClassCountVector k = dist.Sample(rng);
  const double pmf = dist.Pmf(k);
  ProportionVector q = ProportionVector::FromCounts(k);
  return PerturbedSupervision{std::move(q), std::move(k), pmf};
}

PerturbedSupervision PerturbSupervision(const Bag& bag, std::size_t n,
                                        Rng& rng) {
  return PerturbSupervision(bag.class_counts(), n, rng);
}

double Median(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("median of an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[m];
  return 0.5 * (sorted[m - 1] + sorted[m]);
}

std::vector<double> NormalizeWeights(std::span<const double> raw) {
  if (raw.empty()) throw ArgumentError("cannot normalise an empty batch");
  bool any_positive = false;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ArgumentError("raw weights must be finite and nonnegative");
    }
    any_positive = any_positive || v > 0.0;
  }
  if (!any_positive) throw DegenerateWeightsError("every raw weight is zero");
  const double median = Median(raw);
  if (median <= 0.0) {
    throw DegenerateWeightsError("batch median of raw weights is zero");
  }
  std::vector<double> out(raw.begin(), raw.end());
  for (double& v : out) v /= median;
  return out;
}

double WeightedBatchLoss(std::span<const WeightedEntry> entries) {
  double total = 0.0;
  for (const WeightedEntry& e : entries) {
    total += e.weight * ProportionLoss(e.predicted, e.target);
  }
  return total;
}

double WeightedBatchLoss(std::span<const WeightedBagLoss> losses) {
  double total = 0.0;
  for (const WeightedBagLoss& l : losses) total += l.weight * l.per_bag_loss;
  return total;
}

ProportionVector GaussianPerturbSupervision(const ProportionVector& p,
                                            double sd, Rng& rng,
                                            int max_retries) {
  if (!(sd >= 0.0)) throw ArgumentError("sd must be >= 0");
  if (sd == 0.0) return p;
  std::normal_distribution<double> noise(0.0, sd);
  std::vector<double> q(p.num_classes());
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    double sum = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) {
      q[c] = std::clamp(p[c] + noise(rng), 0.0, 1.0);
      sum += q[c];
    }
    if (sum > 0.0) {
      for (double& v : q) v /= sum;
      return ProportionVector(q);
    }
  }
  return p;
}

ProportionVector GaussianPerturbSupervision(const Bag& bag, double sd,
                                            Rng& rng, int max_retries) {
  return GaussianPerturbSupervision(bag.proportion(), sd, rng, max_retries);
}

}  // namespace llpbag
