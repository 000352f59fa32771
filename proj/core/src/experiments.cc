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

#include "llpbag/experiments.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "llpbag/errors.h"
#include "llpbag/text_io.h"

namespace llpbag {

MaeCurve MaeVsSampleSize(std::span<const Bag> bags,
                         std::span<const std::size_t> sample_sizes,
                         std::size_t draws_per_point, Rng& rng) {
  if (bags.empty()) throw ArgumentError("no bags");
  if (draws_per_point == 0) throw ArgumentError("draws_per_point must be >= 1");
  std::size_t min_size = bags.front().size();
  for (const Bag& b : bags) min_size = std::min(min_size, b.size());

  MaeCurve curve;
  LabelAccessScope scope;
  for (std::size_t n : sample_sizes) {
    if (n < 1 || n > min_size) {
      throw ArgumentError("sample_size " + std::to_string(n) +
                          " outside [1, " + std::to_string(min_size) + "]");
    }
    // Welford accumulation over draws x bags.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (std::size_t d = 0; d < draws_per_point; ++d) {
      for (const Bag& bag : bags) {
        const ProportionVector truth = TrueMiniBagProportion(bag, SampleMiniBag(bag, n, rng));
        double gap = 0.0;
        for (std::size_t c = 0; c < truth.num_classes(); ++c) {
          gap += std::abs(truth[c] - bag.proportion()[c]);
        }
        gap /= static_cast<double>(truth.num_classes());
        ++count;
        const double delta = gap - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (gap - mean);
      }
    }
    curve.sample_sizes.push_back(n);
    curve.mae.push_back(mean);
    curve.sd.push_back(std::sqrt(std::max(0.0, m2 / static_cast<double>(count))));
  }
  return curve;
}

std::vector<std::size_t> ConfidenceHistogram(const ClassifierParams& params,
                                             const Eigen::MatrixXd& features,
                                             std::size_t num_bins) {
  if (num_bins < 1) throw ArgumentError("num_bins must be >= 1");
  std::vector<std::size_t> counts(num_bins, 0);
  const Eigen::MatrixXd f = Confidences(params, features);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double top = f.row(i).maxCoeff();
    const auto bin = std::min(
        num_bins - 1,
        static_cast<std::size_t>(std::floor(top * static_cast<double>(num_bins))));
    ++counts[bin];
  }
  return counts;
}

std::size_t CalibrationTable::total() const {
  std::size_t n = 0;
  for (const CalibrationBin& b : bins) n += b.count;
  return n;
}

double CalibrationTable::MeanGap() const {
  double sum = 0.0;
  std::size_t occupied = 0;
  for (const CalibrationBin& b : bins) {
    if (b.count == 0) continue;
    sum += std::abs(b.mean_confidence - b.accuracy);
    ++occupied;
  }
  return occupied == 0 ? 0.0 : sum / static_cast<double>(occupied);
}

double CalibrationTable::ExpectedCalibrationError() const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (const CalibrationBin& b : bins) {
    sum += static_cast<double>(b.count) * std::abs(b.mean_confidence - b.accuracy);
  }
  return sum / static_cast<double>(n);
}

CalibrationTable CalibrationCurve(const ClassifierParams& params,
                                  const InstancePool& instances) {
  if (instances.size() == 0) throw ArgumentError("no instances to calibrate on");
  constexpr std::size_t kBins = 20;  // 1 / kBinWidth
  CalibrationTable table;
  table.bins.resize(kBins);
  for (std::size_t b = 0; b < kBins; ++b) {
    table.bins[b].lower = static_cast<double>(b) * CalibrationTable::kBinWidth;
    table.bins[b].upper = static_cast<double>(b + 1) * CalibrationTable::kBinWidth;
  }
  const Eigen::MatrixXd f = Confidences(params, instances.features());
  const std::vector<int> pred = PredictClasses(params, instances.features());
  std::vector<double> conf_sum(kBins, 0.0);
  std::vector<std::size_t> correct(kBins, 0);
  LabelAccessScope scope;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double top = f(i, pred[idx]);
    const auto bin = std::min(kBins - 1,
                              static_cast<std::size_t>(std::floor(top * kBins)));
    ++table.bins[bin].count;
    conf_sum[bin] += top;
    correct[bin] += pred[idx] == instances.label(idx) ? 1 : 0;
  }
  for (std::size_t b = 0; b < kBins; ++b) {
    CalibrationBin& bin = table.bins[b];
    if (bin.count == 0) continue;
    bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
    bin.accuracy = static_cast<double>(correct[b]) / static_cast<double>(bin.count);
  }
  return table;
}

// ---------------------------------------------------------------------------

ExperimentData BuildExperimentData(const DatasetConfig& config,
                                   std::uint64_t seed) {
  Rng data_rng = MakeStream(seed, "data.pool");
  Rng bag_rng = MakeStream(seed, "data.bags");
  Rng heldout_rng = MakeStream(seed, "data.heldout");
  SyntheticDataset dataset =
      GenerateSyntheticDataset(config.classes, config.dim,
                               config.instances_per_class, config.separation,
                               data_rng);
  std::vector<Bag> bags = MakeBags(dataset.pool, config.num_bags,
                                   config.bag_size, config.proportion_sd, bag_rng);
  InstancePool heldout =
      dataset.model.SamplePool(config.test_instances_per_class, heldout_rng);
  return ExperimentData{std::move(dataset), std::move(bags), std::move(heldout)};
}

std::vector<AblationRow> AblationGrid(const DatasetConfig& data_config,
                                      std::span<const Method> methods,
                                      std::span<const std::size_t> sample_sizes,
                                      std::span<const std::uint64_t> seeds,
                                      const TrainConfig& base,
                                      const AblationOptions& options) {
  std::vector<AblationRow> rows;
  for (std::uint64_t seed : seeds) {
    const ExperimentData data = BuildExperimentData(data_config, seed);
    for (std::size_t n : sample_sizes) {
      for (const Method& method : methods) {
        const bool perturbs = method.kind == MethodKind::kOurs ||
                              method.kind == MethodKind::kOursNoLw;
        if (perturbs && n >= data_config.bag_size && !options.include_degenerate) {
          continue;
        }
        TrainConfig cfg = base;
        cfg.method = method;
        cfg.sample_size = n;
        cfg.seed = seed;
        TrainResult result = RunTraining(data.bags, data.heldout, cfg);
        AblationRow row;
        row.method = method;
        row.sample_size = n;
        row.seed = seed;
        row.test_acc = EvaluateInstanceAccuracy(result.best_params, data.heldout);
        row.test_mdice = EvaluateMdice(result.best_params, data.heldout);
        row.final_val_loss = result.trace.epochs.back().val_prop_loss;
        row.trace = std::move(result.trace);
        if (options.on_cell) options.on_cell(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<AblationSummaryRow> SummarizeAblation(std::span<const AblationRow> rows) {
  std::vector<AblationSummaryRow> out;
  for (const AblationRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AblationSummaryRow& s) {
      return s.method == r.method && s.sample_size == r.sample_size;
    });
    if (it == out.end()) {
      out.push_back(AblationSummaryRow{r.method, r.sample_size, 0, 0.0, 0.0});
      it = std::prev(out.end());
    }
    ++it->num_seeds;
    it->mean_test_acc += r.test_acc;
    it->mean_test_mdice += r.test_mdice;
  }
  for (AblationSummaryRow& s : out) {
    s.mean_test_acc /= static_cast<double>(s.num_seeds);
    s.mean_test_mdice /= static_cast<double>(s.num_seeds);
  }
  return out;
}

void WriteAblationCsv(std::ostream& os, std::span<const AblationRow> rows) {
  os << "method,sample_size,seed,test_acc,test_mdice,final_val_loss\n";
  for (const AblationRow& r : rows) {
    os << r.method.Name() << ',' << r.sample_size << ',' << r.seed << ','
       << FormatDouble(r.test_acc) << ',' << FormatDouble(r.test_mdice) << ','
       << FormatDouble(r.final_val_loss) << '\n';
  }
}

void WriteAblationSummaryCsv(std::ostream& os,
                             std::span<const AblationSummaryRow> rows) {
  os << "method,sample_size,num_seeds,mean_test_acc,mean_test_mdice\n";
  for (const AblationSummaryRow& r : rows) {
    os << r.method.Name() << ',' << r.sample_size << ',' << r.num_seeds << ','
       << FormatDouble(r.mean_test_acc) << ',' << FormatDouble(r.mean_test_mdice)
       << '\n';
  }
}

void WriteMaeCsv(std::ostream& os, const MaeCurve& curve) {
  os << "sample_size,mae,sd\n";
  for (std::size_t i = 0; i < curve.sample_sizes.size(); ++i) {
    os << curve.sample_sizes[i] << ',' << FormatDouble(curve.mae[i]) << ','
       << FormatDouble(curve.sd[i]) << '\n';
  }
}

void WriteCalibrationCsv(std::ostream& os, const CalibrationTable& table) {
  os << "bin_lower,bin_upper,count,mean_confidence,accuracy\n";
  for (const CalibrationBin& b : table.bins) {
    os << FormatDouble(b.lower) << ',' << FormatDouble(b.upper) << ',' << b.count
       << ',' << FormatDouble(b.mean_confidence) << ',' << FormatDouble(b.accuracy)
       << '\n';
  }
}

void WriteHistogramCsv(std::ostream& os, std::span<const std::size_t> counts) {
  os << "bin_lower,bin_upper,count\n";
  const auto bins = static_cast<double>(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    os << FormatDouble(static_cast<double>(b) / bins) << ','
       << FormatDouble(static_cast<double>(b + 1) / bins) << ',' << counts[b]
       << '\n';
  }
}

}  // namespace llpbag
