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

#include "llpbag/trainer.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "llpbag/errors.h"
#include "llpbag/losses.h"
#include "llpbag/text_io.h"

namespace llpbag {

std::string Method::Name() const {
  switch (kind) {
    case MethodKind::kPl:
      return "PL";
    case MethodKind::kOurs:
      return "OURS";
    case MethodKind::kOursNoLw:
      return "OURS_NO_LW";
    case MethodKind::kGaussian:
      return "GAUSSIAN:" + FormatDouble(gaussian_sd);
  }
  return "?";
}

Method Method::Parse(std::string_view text) {
  std::string upper(Trim(text));
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "PL") return Method{MethodKind::kPl, 0.0};
  if (upper == "OURS") return Method{MethodKind::kOurs, 0.0};
  if (upper == "OURS_NO_LW") return Method{MethodKind::kOursNoLw, 0.0};
  constexpr std::string_view kGaussian = "GAUSSIAN:";
  if (upper.starts_with(kGaussian)) {
    double sd = 0.0;
    try {
      sd = ParseDouble(std::string_view(upper).substr(kGaussian.size()));
    } catch (const std::invalid_argument&) {
      throw ArgumentError("bad Gaussian sd in method '" + std::string(text) + "'");
    }
    if (!(sd >= 0.0)) throw ArgumentError("Gaussian sd must be >= 0");
    return Method{MethodKind::kGaussian, sd};
  }
  throw ArgumentError("unknown method '" + std::string(text) +
                      "' (expected PL, OURS, OURS_NO_LW or GAUSSIAN:<sd>)");
}

BagSplit SplitBags(std::size_t num_bags, double validation_fraction, Rng& rng) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("validation fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(num_bags);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto num_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(num_bags)));
  if (num_val == 0 || num_val >= num_bags) {
    throw ArgumentError("split of " + std::to_string(num_bags) +
                        " bags leaves an empty train or validation set");
  }
  BagSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(num_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(num_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

void ValidateTrainConfig(const TrainConfig& config, std::span<const Bag> bags) {
  if (bags.empty()) throw ConfigError("num_bags", "no bags to train on");
  std::size_t min_size = std::numeric_limits<std::size_t>::max();
  for (const Bag& b : bags) min_size = std::min(min_size, b.size());
  if (config.sample_size < 1 || config.sample_size > min_size) {
    throw ConfigError("sample_size",
                      "sample_size " + std::to_string(config.sample_size) +
                          " must lie in [1, " + std::to_string(min_size) + "]");
  }
  if (config.batch_bags < 1) throw ConfigError("batch_bags", "must be >= 1");
  if (config.epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning_rate", "must be finite and >= 0");
  }
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) {
    throw ConfigError("momentum", "must lie in [0, 1)");
  }
  if (!(config.validation_fraction > 0.0 && config.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction", "must lie in (0, 1)");
  }
  const auto num_val = std::llround(config.validation_fraction *
                                    static_cast<double>(bags.size()));
  if (num_val == 0 || static_cast<std::size_t>(num_val) >= bags.size()) {
    throw ConfigError("validation_fraction",
                      "leaves an empty train or validation split");
  }
  if (config.method.kind == MethodKind::kGaussian &&
      !(config.method.gaussian_sd >= 0.0)) {
    throw ConfigError("method", "Gaussian sd must be >= 0");
  }
}

namespace {

struct ValidationSet {
  std::vector<BatchEntry> entries;

  double MeanLoss(const ClassifierParams& params) const {
    double total = 0.0;
    for (const BatchEntry& e : entries) {
      total += ProportionLoss(PredictBagProportion(Confidences(params, e.features)),
                              e.target);
    }
    return total / static_cast<double>(entries.size());
  }
};

InstancePool TrainingInstances(std::span<const Bag> bags,
                               std::span<const std::size_t> train) {
  std::vector<std::size_t> rows;
  for (std::size_t b : train) {
    rows.insert(rows.end(), bags[b].members().begin(), bags[b].members().end());
  }
  return bags.front().pool().Subset(rows);
}

}  // namespace

TrainResult RunTraining(std::span<const Bag> bags, const InstancePool& heldout,
                        const TrainConfig& config,
                        const BatchObserver& observer) {
  ValidateTrainConfig(config, bags);
  const std::size_t n = config.sample_size;
  const ModelShape shape{bags.front().dim(), config.hidden,
                         bags.front().num_classes()};
  if (heldout.dim() != shape.input_dim ||
      heldout.num_classes() != shape.num_classes) {
    throw DimensionError("held-out data does not match the bag feature space");
  }

  Rng split_rng = MakeStream(config.seed, "train.split");
  Rng init_rng = MakeStream(config.seed, "train.init");
  Rng order_rng = MakeStream(config.seed, "train.order");
  Rng minibag_rng = MakeStream(config.seed, "train.minibag");
  Rng perturb_rng = MakeStream(config.seed, "train.perturb");
  Rng val_rng = MakeStream(config.seed, "train.validation");

  const BagSplit split = SplitBags(bags.size(), config.validation_fraction, split_rng);

  ValidationSet validation;
  for (std::size_t b : split.validation) {
    const Bag& bag = bags[b];
    const MiniBag mb = SampleMiniBag(bag, std::min(n, bag.size()), val_rng);
    validation.entries.push_back(
        BatchEntry{bag.GatherFeatures(mb.positions), bag.proportion(), 1.0});
  }
  const InstancePool train_instances = TrainingInstances(bags, split.train);

  TrainResult result;
  ClassifierParams params = InitParams(shape, init_rng);
  SgdOptimizer optimizer(config.learning_rate, config.momentum);
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order = split.train;
  std::vector<BatchEntry> batch;
  std::vector<double> raw_weights;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_bags) {
      const std::size_t stop = std::min(order.size(), start + config.batch_bags);
      batch.clear();
      raw_weights.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const Bag& bag = bags[order[i]];
        const MiniBag mb = SampleMiniBag(bag, n, minibag_rng);
        BatchEntry entry{bag.GatherFeatures(mb.positions), bag.proportion(), 1.0};
        switch (config.method.kind) {
          case MethodKind::kPl:
            break;
          case MethodKind::kOurs:
          case MethodKind::kOursNoLw: {
            PerturbedSupervision s = PerturbSupervision(bag, n, perturb_rng);
            entry.target = std::move(s.target);
            raw_weights.push_back(s.raw_pmf);
            break;
          }
          case MethodKind::kGaussian:
            entry.target = GaussianPerturbSupervision(
                bag, config.method.gaussian_sd, perturb_rng);
            break;
        }
        batch.push_back(std::move(entry));
      }

      if (config.method.kind == MethodKind::kOurs) {
        const std::vector<double> w = NormalizeWeights(raw_weights);
        const double err = std::abs(Median(w) - 1.0);
        if (err > kWeightMedianTolerance) {
          throw std::logic_error("normalised weight median drifted from 1 by " +
                                 FormatDouble(err));
        }
        result.trace.max_weight_median_error =
            std::max(result.trace.max_weight_median_error, err);
        ++result.trace.weighted_batches;
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i].weight = w[i];
      }
      if (observer) {
        std::vector<double> w(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) w[i] = batch[i].weight;
        observer(epoch, w);
      }

      const LossAndGradient lg = BatchGradient(params, batch);
      loss_sum += lg.loss;
      optimizer.Step(params, lg.gradient);
      if (!params.AllFinite()) {
        throw std::runtime_error("parameters became non-finite in epoch " +
                                 std::to_string(epoch));
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_prop_loss = loss_sum / static_cast<double>(order.size());
    rec.val_prop_loss = validation.MeanLoss(params);
    rec.train_acc = EvaluateInstanceAccuracy(params, train_instances);
    rec.test_acc = EvaluateInstanceAccuracy(params, heldout);
    rec.test_mdice = EvaluateMdice(params, heldout);
    result.trace.epochs.push_back(rec);
    if (rec.val_prop_loss < best_val) {
      best_val = rec.val_prop_loss;
      result.trace.best_epoch = epoch;
      result.best_params = params;
    }
  }
  if (result.trace.best_epoch == 0) {
    // Every validation loss was NaN; fall back to the last epoch.
    result.trace.best_epoch = config.epochs;
    result.best_params = params;
  }
  result.final_params = std::move(params);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<int> PredictClasses(const ClassifierParams& params,
                                const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd z = Logits(params, features);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < z.cols(); ++c) {
      if (z(i, c) > z(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double EvaluateInstanceAccuracy(const ClassifierParams& params,
                                const InstancePool& instances) {
  if (instances.size() == 0) return 0.0;
  const std::vector<int> pred = PredictClasses(params, instances.features());
  LabelAccessScope scope;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    correct += pred[i] == instances.label(i) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double EvaluateMdice(const ClassifierParams& params,
                     const InstancePool& instances) {
  const std::size_t C = instances.num_classes();
  if (instances.size() == 0) return 0.0;
  const std::vector<int> pred = PredictClasses(params, instances.features());
  std::vector<std::size_t> tp(C, 0), fp(C, 0), fn(C, 0);
  LabelAccessScope scope;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto p = static_cast<std::size_t>(pred[i]);
    const auto y = static_cast<std::size_t>(instances.label(i));
    if (p == y) {
      ++tp[y];
    } else {
      ++fp[p];
      ++fn[y];
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    const double denom = 2.0 * static_cast<double>(tp[c]) +
                         static_cast<double>(fp[c] + fn[c]);
    sum += denom == 0.0 ? 1.0 : 2.0 * static_cast<double>(tp[c]) / denom;
  }
  return sum / static_cast<double>(C);
}

void WriteTraceCsv(std::ostream& os, const TrainTrace& trace) {
  os << "epoch,train_prop_loss,val_prop_loss,train_acc,test_acc,test_mdice\n";
  for (const EpochRecord& r : trace.epochs) {
    os << r.epoch << ',' << FormatDouble(r.train_prop_loss) << ','
       << FormatDouble(r.val_prop_loss) << ',' << FormatDouble(r.train_acc)
       << ',' << FormatDouble(r.test_acc) << ',' << FormatDouble(r.test_mdice)
       << '\n';
  }
}

}  // namespace llpbag
