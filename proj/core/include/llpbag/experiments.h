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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "llpbag/bags.h"
#include "llpbag/model.h"
#include "llpbag/trainer.h"

namespace llpbag {

struct MaeCurve {
  std::vector<std::size_t> sample_sizes;
  std::vector<double> mae;
  std::vector<double> sd;
};

// Per n: draws_per_point rounds, each drawing one mini-bag from every bag and
// scoring mean_c |true mini-bag proportion - bag proportion|. mae and sd are
// the mean and population standard deviation over all draws x bags.
// Reads hidden labels; callers need no scope of their own.
MaeCurve MaeVsSampleSize(std::span<const Bag> bags,
                         std::span<const std::size_t> sample_sizes,
                         std::size_t draws_per_point, Rng& rng);

// Counts of max-class confidences in `num_bins` equal bins over [0, 1].
std::vector<std::size_t> ConfidenceHistogram(const ClassifierParams& params,
                                             const Eigen::MatrixXd& features,
                                             std::size_t num_bins);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

// Reliability table over max-class confidence, one row per bin.
struct CalibrationTable {
  static constexpr double kBinWidth = 0.05;
  std::vector<CalibrationBin> bins;

  std::size_t total() const;
  // Mean |mean_confidence - accuracy| over occupied bins.
  double MeanGap() const;
  // Count-weighted gap (expected calibration error).
  double ExpectedCalibrationError() const;
};

CalibrationTable CalibrationCurve(const ClassifierParams& params,
                                  const InstancePool& instances);

// Synthetic data and bag construction settings shared by every experiment.
struct DatasetConfig {
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t instances_per_class = 1000;
  std::size_t test_instances_per_class = 200;
  double separation = 4.0;
  std::size_t num_bags = 100;
  std::size_t bag_size = 200;
  double proportion_sd = 0.1;
};

struct ExperimentData {
  SyntheticDataset dataset;
  std::vector<Bag> bags;
  InstancePool heldout;
};

// Everything derives from `seed` through tagged streams ("data.*").
ExperimentData BuildExperimentData(const DatasetConfig& config,
                                   std::uint64_t seed);

struct AblationRow {
  Method method;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
  double test_acc = 0.0;    // selected (best-validation) model
  double test_mdice = 0.0;  // selected model
  double final_val_loss = 0.0;  // last epoch
  TrainTrace trace;
};

struct AblationSummaryRow {
  Method method;
  std::size_t sample_size = 0;
  std::size_t num_seeds = 0;
  double mean_test_acc = 0.0;
  double mean_test_mdice = 0.0;
};

struct AblationOptions {
  // Perturbation is degenerate at n == bag size; such cells are skipped for
  // perturbing methods unless this is set.
  bool include_degenerate = false;
  // Called after each finished cell.
  std::function<void(const AblationRow&)> on_cell;
};

// Data for a seed is shared by every (method, n) cell of that seed, and the
// training streams depend only on the seed, so methods see identical splits,
// initialisations and mini-bags.
std::vector<AblationRow> AblationGrid(const DatasetConfig& data_config,
                                      std::span<const Method> methods,
                                      std::span<const std::size_t> sample_sizes,
                                      std::span<const std::uint64_t> seeds,
                                      const TrainConfig& base,
                                      const AblationOptions& options = {});

// Rows ordered by first appearance of (method, n).
std::vector<AblationSummaryRow> SummarizeAblation(std::span<const AblationRow> rows);

// method,sample_size,seed,test_acc,test_mdice,final_val_loss
void WriteAblationCsv(std::ostream& os, std::span<const AblationRow> rows);
// method,sample_size,num_seeds,mean_test_acc,mean_test_mdice
void WriteAblationSummaryCsv(std::ostream& os,
                             std::span<const AblationSummaryRow> rows);
// sample_size,mae,sd
void WriteMaeCsv(std::ostream& os, const MaeCurve& curve);
// bin_lower,bin_upper,count,mean_confidence,accuracy
void WriteCalibrationCsv(std::ostream& os, const CalibrationTable& table);
// bin_lower,bin_upper,count
void WriteHistogramCsv(std::ostream& os, std::span<const std::size_t> counts);

}  // namespace llpbag
