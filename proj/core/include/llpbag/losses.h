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

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "llpbag/bags.h"
#include "llpbag/hypergeom.h"
#include "llpbag/proportion.h"
#include "llpbag/rng.h"

namespace llpbag {

// Predicted proportions are clamped to [kLogClamp, 1] before the log.
inline constexpr double kLogClamp = 1e-12;

// Bag-level cross-entropy -sum_c target_c ln(predicted_c). Zero target
// entries contribute nothing.
double ProportionLoss(const ProportionVector& predicted,
                      const ProportionVector& target);

double Entropy(const ProportionVector& p);

// Column means of an n x C confidence matrix whose rows sum to 1.
ProportionVector PredictBagProportion(const Eigen::MatrixXd& confidences);

struct PerturbedSupervision {
  ProportionVector target;  // drawn counts / n
  ClassCountVector counts;
  double raw_pmf = 0.0;     // pmf of `counts`, before batch normalisation
};

// Draws counts from H(N, n, K) of the bag and returns them as a proportion.
PerturbedSupervision PerturbSupervision(const ClassCountVector& class_counts,
                                        std::size_t n, Rng& rng);
PerturbedSupervision PerturbSupervision(const Bag& bag, std::size_t n, Rng& rng);

// Divides by the batch median (mean of the two central values for an even
// batch). Throws DegenerateWeightsError if no value is positive.
std::vector<double> NormalizeWeights(std::span<const double> raw);

double Median(std::span<const double> values);

struct WeightedBagLoss {
  std::size_t bag_id = 0;
  double per_bag_loss = 0.0;
  double weight = 1.0;
};

struct WeightedEntry {
  ProportionVector predicted;
  ProportionVector target;
  double weight = 1.0;
};

// sum_i w_i * ProportionLoss(predicted_i, target_i).
double WeightedBatchLoss(std::span<const WeightedEntry> entries);
double WeightedBatchLoss(std::span<const WeightedBagLoss> losses);

// p + N(0, sd^2) per class, clipped to [0, 1], renormalised. A draw that
// clips to all zeros is retried up to `max_retries` times, then p is
// returned unchanged.
ProportionVector GaussianPerturbSupervision(const ProportionVector& p,
                                            double sd, Rng& rng,
                                            int max_retries = 100);
ProportionVector GaussianPerturbSupervision(const Bag& bag, double sd,
                                            Rng& rng, int max_retries = 100);

}  // namespace llpbag
