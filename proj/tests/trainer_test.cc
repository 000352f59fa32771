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

#include <gtest/gtest.h>

#include <sstream>

#include "llpbag/errors.h"
#include "llpbag/experiments.h"
#include "llpbag/losses.h"

namespace llpbag {
namespace {

DatasetConfig SmallData() {
  DatasetConfig d;
  d.classes = 3;
  d.dim = 4;
  d.instances_per_class = 200;
  d.test_instances_per_class = 100;
  d.separation = 4.0;
  d.num_bags = 20;
  d.bag_size = 30;
  d.proportion_sd = 0.15;
  return d;
}

TrainConfig SmallTrain(Method method, std::size_t n) {
  TrainConfig t;
  t.method = method;
  t.sample_size = n;
  t.epochs = 6;
  t.learning_rate = 0.05;
  t.hidden = 8;
  t.seed = 3;
  return t;
}

const Method kPl{MethodKind::kPl, 0.0};
const Method kOurs{MethodKind::kOurs, 0.0};
const Method kOursNoLw{MethodKind::kOursNoLw, 0.0};

TEST(MethodTest, NameParseRoundTrip) {
  for (const Method& m : {kPl, kOurs, kOursNoLw, Method{MethodKind::kGaussian, 0.15}}) {
    EXPECT_EQ(Method::Parse(m.Name()), m);
  }
  EXPECT_EQ(Method::Parse("ours_no_lw"), kOursNoLw);
  EXPECT_EQ(Method::Parse("gaussian:0.05").gaussian_sd, 0.05);
  EXPECT_THROW(Method::Parse("SGD"), ArgumentError);
  EXPECT_THROW(Method::Parse("GAUSSIAN:-1"), ArgumentError);
  EXPECT_THROW(Method::Parse("GAUSSIAN:x"), ArgumentError);
}

TEST(SplitBagsTest, FourToOne) {
  Rng rng = MakeStream(1, "split");
  const BagSplit s = SplitBags(100, 0.2, rng);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.validation.size(), 20u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.validation.begin(), s.validation.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_THROW(SplitBags(2, 0.1, rng), ArgumentError);
}

std::string ErrorKey(const TrainConfig& config, std::span<const Bag> bags) {
  try {
    ValidateTrainConfig(config, bags);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(ValidateTrainConfigTest, NamesOffendingKey) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  const TrainConfig ok = SmallTrain(kPl, 10);
  EXPECT_EQ(ErrorKey(ok, data.bags), "");
  TrainConfig c = ok;
  c.sample_size = 31;
  EXPECT_EQ(ErrorKey(c, data.bags), "sample_size");
  c = ok;
  c.sample_size = 0;
  EXPECT_EQ(ErrorKey(c, data.bags), "sample_size");
  c = ok;
  c.batch_bags = 0;
  EXPECT_EQ(ErrorKey(c, data.bags), "batch_bags");
  c = ok;
  c.epochs = 0;
  EXPECT_EQ(ErrorKey(c, data.bags), "epochs");
  c = ok;
  c.validation_fraction = 0.0;
  EXPECT_EQ(ErrorKey(c, data.bags), "validation_fraction");
  c = ok;
  c.learning_rate = -1.0;
  EXPECT_EQ(ErrorKey(c, data.bags), "learning_rate");
  EXPECT_EQ(ErrorKey(ok, std::span<const Bag>{}), "num_bags");
}

TEST(RunTrainingTest, TraceLengthAndDeterminism) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  for (const Method& m : {kPl, kOurs, kOursNoLw, Method{MethodKind::kGaussian, 0.1}}) {
    const TrainConfig c = SmallTrain(m, 10);
    const TrainResult a = RunTraining(data.bags, data.heldout, c);
    const TrainResult b = RunTraining(data.bags, data.heldout, c);
    ASSERT_EQ(a.trace.epochs.size(), c.epochs);
    std::ostringstream ta, tb;
    WriteTraceCsv(ta, a.trace);
    WriteTraceCsv(tb, b.trace);
    EXPECT_EQ(ta.str(), tb.str()) << m.Name();
    EXPECT_EQ(a.best_params, b.best_params);
    for (std::size_t e = 0; e < c.epochs; ++e) EXPECT_EQ(a.trace.epochs[e].epoch, e + 1);
  }
}

TEST(RunTrainingTest, TraceCsvHeader) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  std::ostringstream os;
  WriteTraceCsv(os, RunTraining(data.bags, data.heldout, SmallTrain(kPl, 10)).trace);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "epoch,train_prop_loss,val_prop_loss,train_acc,test_acc,test_mdice");
}

TEST(RunTrainingTest, OursAtFullBagEqualsPl) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  const TrainResult pl = RunTraining(data.bags, data.heldout, SmallTrain(kPl, 30));
  const TrainResult ours = RunTraining(data.bags, data.heldout, SmallTrain(kOurs, 30));
  std::ostringstream a, b;
  WriteTraceCsv(a, pl.trace);
  WriteTraceCsv(b, ours.trace);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(pl.best_params, ours.best_params);
}

TEST(RunTrainingTest, BestEpochIsEarliestMinimum) {
  const ExperimentData data = BuildExperimentData(SmallData(), 2);
  TrainConfig c = SmallTrain(kOursNoLw, 5);
  c.epochs = 12;
  const TrainResult r = RunTraining(data.bags, data.heldout, c);
  std::size_t expect = 1;
  for (std::size_t e = 1; e <= r.trace.epochs.size(); ++e) {
    if (r.trace.epochs[e - 1].val_prop_loss < r.trace.epochs[expect - 1].val_prop_loss) {
      expect = e;
    }
  }
  EXPECT_EQ(r.trace.best_epoch, expect);
}

TEST(RunTrainingTest, WeightMedianIsOneInEveryBatch) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  std::size_t batches = 0;
  double worst = 0.0;
  const TrainResult r = RunTraining(
      data.bags, data.heldout, SmallTrain(kOurs, 5),
      [&](std::size_t, std::span<const double> w) {
        ++batches;
        worst = std::max(worst, std::abs(Median(w) - 1.0));
      });
  EXPECT_EQ(batches, 6u * 2);  // 16 training bags in batches of 8
  EXPECT_EQ(r.trace.weighted_batches, batches);
  EXPECT_LE(worst, kWeightMedianTolerance);
  EXPECT_LE(r.trace.max_weight_median_error, kWeightMedianTolerance);
}

TEST(RunTrainingTest, UnweightedMethodsUseUnitWeights) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  for (const Method& m : {kPl, kOursNoLw, Method{MethodKind::kGaussian, 0.05}}) {
    RunTraining(data.bags, data.heldout, SmallTrain(m, 5),
                [](std::size_t, std::span<const double> w) {
                  for (double x : w) EXPECT_EQ(x, 1.0);
                });
  }
}

TEST(RunTrainingTest, TrainingPathReadsNoLabels) {
  const ExperimentData data = BuildExperimentData(SmallData(), 1);
  ResetLabelAudit();
  for (const Method& m : {kPl, kOurs, kOursNoLw, Method{MethodKind::kGaussian, 0.1}}) {
    RunTraining(data.bags, data.heldout, SmallTrain(m, 10));
  }
  EXPECT_EQ(UnscopedLabelReads(), 0u);
}

TEST(RunTrainingTest, FullBagPlFitsSeparableData) {
  DatasetConfig d = SmallData();
  d.separation = 6.0;
  const ExperimentData data = BuildExperimentData(d, 4);
  TrainConfig c = SmallTrain(kPl, d.bag_size);
  c.epochs = 200;
  c.learning_rate = 0.1;
  const TrainResult r = RunTraining(data.bags, data.heldout, c);

  Rng split_rng = MakeStream(c.seed, "train.split");
  const BagSplit split = SplitBags(data.bags.size(), c.validation_fraction, split_rng);
  double entropy = 0.0;
  for (std::size_t b : split.train) entropy += Entropy(data.bags[b].proportion());
  entropy /= static_cast<double>(split.train.size());

  const EpochRecord& last = r.trace.epochs.back();
  EXPECT_LT(last.train_prop_loss, entropy + 0.05);
  EXPECT_GT(last.train_acc, 1.0 / 3.0 + 0.2);
  // Non-increasing up to optimiser noise: compare means of 10-epoch windows.
  std::vector<double> window_means;
  for (std::size_t start = 0; start < r.trace.epochs.size(); start += 10) {
    double sum = 0.0;
    for (std::size_t e = start; e < start + 10; ++e) sum += r.trace.epochs[e].val_prop_loss;
    window_means.push_back(sum / 10.0);
  }
  for (std::size_t w = 1; w < window_means.size(); ++w) {
    EXPECT_LE(window_means[w], window_means[w - 1] + 1e-3) << "window " << w;
  }
}

TEST(PerturbationVariesTest, DrawsDifferAtLeastAsOftenAsModeBound) {
  const ClassCountVector k({12, 10, 8});
  constexpr std::size_t n = 6;
  const MultivariateHypergeometric h(k, n);
  double mode_pmf = 0.0;
  for (const auto& [x, p] : h.EnumerateSupport()) mode_pmf = std::max(mode_pmf, p);
  Rng rng = MakeStream(5, "vary");
  constexpr int kPairs = 20'000;
  int differ = 0;
  for (int i = 0; i < kPairs; ++i) {
    if (PerturbSupervision(k, n, rng).counts != PerturbSupervision(k, n, rng).counts) ++differ;
  }
  EXPECT_GE(static_cast<double>(differ) / kPairs, 1.0 - mode_pmf - 0.01);
}

InstancePool OneHotPool(const std::vector<int>& labels, std::size_t classes) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                            static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    f(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return InstancePool(f, labels, classes);
}

TEST(EvaluateTest, PerfectClassifier) {
  const InstancePool pool = OneHotPool({0, 2, 1, 1, 0, 2}, 3);
  ClassifierParams p = ClassifierParams::Zeros({3, 0, 3});
  p.out_w = 5.0 * Eigen::MatrixXd::Identity(3, 3);
  EXPECT_EQ(EvaluateInstanceAccuracy(p, pool), 1.0);
  EXPECT_EQ(EvaluateMdice(p, pool), 1.0);
  ClassifierParams scaled = p;
  scaled.out_w *= 0.01;
  scaled.out_b.array() += 3.0;
  EXPECT_EQ(EvaluateInstanceAccuracy(scaled, pool), 1.0);
}

TEST(EvaluateTest, ConstantPredictionMdice) {
  const InstancePool pool = OneHotPool({0, 1, 0, 1, 0, 1, 0, 1}, 2);
  ClassifierParams p = ClassifierParams::Zeros({2, 0, 2});
  EXPECT_EQ(PredictClasses(p, pool.features())[0], 0);  // tie -> class 0
  EXPECT_DOUBLE_EQ(EvaluateInstanceAccuracy(p, pool), 0.5);
  EXPECT_DOUBLE_EQ(EvaluateMdice(p, pool), 1.0 / 3.0);
}

TEST(EvaluateTest, AbsentClassScoresOne) {
  const InstancePool pool = OneHotPool({0, 1, 0, 1}, 3);
  ClassifierParams p = ClassifierParams::Zeros({3, 0, 3});
  p.out_w = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_DOUBLE_EQ(EvaluateMdice(p, pool), 1.0);
}

TEST(EvaluateTest, RandomGuessIsChance) {
  // With zero separation the features carry no label information.
  Rng rng = MakeStream(6, "guess");
  const SyntheticDataset d = GenerateSyntheticDataset(10, 5, 1000, 0.0, rng);
  const ClassifierParams p = InitParams({5, 16, 10}, rng);
  EXPECT_NEAR(EvaluateInstanceAccuracy(p, *d.pool), 0.1, 0.03);
}

}  // namespace
}  // namespace llpbag
