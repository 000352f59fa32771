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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "llpbag/bags.h"
#include "llpbag/model.h"

namespace llpbag {

enum class MethodKind {
  kPl,        // parent-bag proportion, weight 1
  kOurs,      // hypergeometric perturbation + median-normalised pmf weights
  kOursNoLw,  // hypergeometric perturbation, weight 1
  kGaussian,  // Gaussian perturbation of the parent proportion, weight 1
};

struct Method {
  MethodKind kind = MethodKind::kPl;
  double gaussian_sd = 0.0;

  // "PL", "OURS", "OURS_NO_LW", "GAUSSIAN:<sd>".
  std::string Name() const;
  // Inverse of Name(); case-insensitive. Throws ArgumentError.
  static Method Parse(std::string_view text);

  friend bool operator==(const Method&, const Method&) = default;
};

struct TrainConfig {
  Method method;
  std::size_t sample_size = 0;
  std::size_t batch_bags = 8;
  std::size_t epochs = 50;
  double learning_rate = 1e-4;
  double momentum = 0.0;
  std::size_t hidden = 64;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_prop_loss = 0.0;  // mean weighted per-bag loss over the epoch
  double val_prop_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double test_mdice = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based, minimal val_prop_loss, earliest tie
  // Largest |median(normalised weights) - 1| seen in any weighted batch.
  double max_weight_median_error = 0.0;
  std::size_t weighted_batches = 0;
};

struct TrainResult {
  ClassifierParams best_params;
  ClassifierParams final_params;
  TrainTrace trace;
};

// Median of normalised batch weights must equal 1 within this bound.
inline constexpr double kWeightMedianTolerance = 1e-12;

// Deterministic 4:1-style split by `validation_fraction`. Throws
// ArgumentError when either side would be empty.
struct BagSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
BagSplit SplitBags(std::size_t num_bags, double validation_fraction, Rng& rng);

// Checks the config against the bags. Throws ConfigError naming the key.
void ValidateTrainConfig(const TrainConfig& config, std::span<const Bag> bags);

// Optional per-iteration observer: (epoch, normalised batch weights).
using BatchObserver =
    std::function<void(std::size_t epoch, std::span<const double> weights)>;

// Each iteration takes `batch_bags` training bags in shuffled epoch order,
// draws a fresh mini-bag per bag and its supervision per `method`, and takes
// one optimiser step on the weighted batch loss. The returned best_params
// minimise the validation proportion loss over epochs.
//
// Validation uses one fixed mini-bag of size sample_size per validation bag,
// drawn once per run, with the parent proportion as target for every method.
TrainResult RunTraining(std::span<const Bag> bags, const InstancePool& heldout,
                        const TrainConfig& config,
                        const BatchObserver& observer = {});

// Fraction of argmax predictions equal to the label; ties go to the lower
// class index.
double EvaluateInstanceAccuracy(const ClassifierParams& params,
                                const InstancePool& instances);

// Mean over classes of 2TP / (2TP + FP + FN). A class absent from both
// predictions and labels scores 1.
double EvaluateMdice(const ClassifierParams& params,
                     const InstancePool& instances);

// Argmax per row, lowest index on ties.
std::vector<int> PredictClasses(const ClassifierParams& params,
                                const Eigen::MatrixXd& features);

// epoch,train_prop_loss,val_prop_loss,train_acc,test_acc,test_mdice
void WriteTraceCsv(std::ostream& os, const TrainTrace& trace);

}  // namespace llpbag
