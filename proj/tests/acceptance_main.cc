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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "llpbag/experiments.h"
#include "llpbag/hypergeom.h"
#include "llpbag/model.h"
#include "llpbag/trainer.h"
#include "oracles.h"

namespace llpbag {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<std::int64_t> Vec(const ClassCountVector& k) {
  return {k.values().begin(), k.values().end()};
}

Outcome ExactDistribution() {
  const auto start = Clock::now();
  Rng rng = MakeStream(2026, "acceptance.exact");
  constexpr int kCases = 40;
  double worst_prob = 0.0;
  double worst_sum = 0.0;
  std::size_t points = 0;
  for (int trial = 0; trial < kCases; ++trial) {
    const std::size_t classes = 1 + rng() % 4;
    std::vector<std::int64_t> counts(classes, 0);
    const std::int64_t total = 1 + static_cast<std::int64_t>(rng() % 15);
    for (std::int64_t i = 0; i < total; ++i) ++counts[rng() % classes];
    const std::int64_t n = static_cast<std::int64_t>(rng() % (total + 1));
    const MultivariateHypergeometric h(ClassCountVector(counts), n);
    const oracle::CountPmf exact = oracle::SubsetEnumerationPmf(counts, n);

    // Every count vector in the box [0, n]^C: both support and non-support.
    std::vector<std::int64_t> k(classes, 0);
    while (true) {
      const auto it = exact.find(k);
      const double want = it == exact.end() ? 0.0 : it->second;
      const ClassCountVector kv(k);
      worst_prob = std::max(worst_prob, std::abs(h.Pmf(kv) - want));
      worst_prob = std::max(worst_prob, std::abs(std::exp(h.LogPmf(kv)) - want));
      ++points;
      std::size_t c = 0;
      while (c < classes && ++k[c] > n) k[c++] = 0;
      if (c == classes) break;
    }
    double sum = 0.0;
    for (const auto& [kv, p] : h.EnumerateSupport()) sum += p;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const double secs = Seconds(start);
  return {worst_prob <= 1e-10 && worst_sum <= 1e-9 && secs < 5.0,
          Fmt("%d cases, %zu points, max|dprob|=%.2e, max|sum-1|=%.2e, %.2fs", kCases,
              points, worst_prob, worst_sum, secs)};
}

Outcome SamplerFidelity() {
  const auto start = Clock::now();
  const std::vector<std::int64_t> pop = {10, 6, 4};
  constexpr std::int64_t n = 7;
  constexpr std::size_t kDraws = 200'000;
  const MultivariateHypergeometric h(ClassCountVector(pop), n);
  Rng rng = MakeStream(2026, "acceptance.sampler");
  std::map<std::vector<std::int64_t>, double> emp;
  std::vector<std::vector<double>> marg(pop.size(), std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < kDraws; ++i) {
    const ClassCountVector k = h.Sample(rng);
    emp[Vec(k)] += 1.0 / kDraws;
    for (std::size_t c = 0; c < pop.size(); ++c) {
      marg[c][static_cast<std::size_t>(k[c])] += 1.0 / kDraws;
    }
  }
  const double tv = oracle::TotalVariation(oracle::SubsetEnumerationPmf(pop, n), emp);
  double worst_z = 0.0;
  for (std::size_t c = 0; c < pop.size(); ++c) {
    const UnivariateHypergeometric m = h.Marginal(c);
    for (std::int64_t x = 0; x <= n; ++x) {
      const double p = m.Pmf(x);
      const double se = std::sqrt(p * (1.0 - p) / kDraws);
      const double gap = std::abs(marg[c][static_cast<std::size_t>(x)] - p);
      if (se > 0.0) {
        worst_z = std::max(worst_z, gap / se);
      } else if (gap > 0.0) {
        worst_z = INFINITY;
      }
    }
  }
  const double secs = Seconds(start);
  return {tv <= 0.02 && worst_z <= 3.0 && secs < 10.0,
          Fmt("TV=%.4f, max marginal |z|=%.2f, %.2fs", tv, worst_z, secs)};
}

Outcome GradientCorrectness() {
  const auto start = Clock::now();
  Rng rng = MakeStream(2026, "acceptance.gradient");
  std::normal_distribution<double> normal;
  constexpr int kConfigs = 60;
  double worst = 0.0;
  for (int trial = 0; trial < kConfigs; ++trial) {
    const std::size_t classes = std::vector<std::size_t>{2, 3, 10}[trial % 3];
    const std::size_t n = std::vector<std::size_t>{1, 5, 50}[(trial / 3) % 3];
    const std::size_t hidden = std::vector<std::size_t>{0, 3, 8}[(trial / 9) % 3];
    const std::size_t dim = 2 + rng() % 5;
    const std::size_t bags = 1 + rng() % 3;
    const bool weighted = trial % 2 == 1;
    const ModelShape shape{dim, hidden, classes};
    const ClassifierParams params = InitParams(shape, rng);
    std::vector<BatchEntry> batch;
    for (std::size_t b = 0; b < bags; ++b) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
      std::vector<std::int64_t> k(classes, 0);
      for (std::size_t j = 0; j < n; ++j) ++k[rng() % classes];
      batch.push_back({x, ProportionVector::FromCounts(ClassCountVector(k)),
                       weighted ? 3.0 * UniformUnit(rng) : 1.0});
    }
    const Eigen::VectorXd analytic = BatchGradient(params, batch).gradient.Flatten();
    const Eigen::VectorXd numeric = oracle::FiniteDifferenceGradient(params, batch, 1e-5);
    worst = std::max(worst, oracle::RelativeError(analytic, numeric));
  }
  const double secs = Seconds(start);
  return {worst <= 1e-5 && secs < 30.0,
          Fmt("%d configs, max relative error %.2e, %.2fs", kConfigs, worst, secs)};
}

Outcome MaeReproduction() {
  const auto start = Clock::now();
  DatasetConfig d;
  d.classes = 10;
  d.dim = 16;
  d.num_bags = 250;
  d.bag_size = 200;
  const ExperimentData data = BuildExperimentData(d, 2026);
  Rng rng = MakeStream(2026, "acceptance.mae");
  const std::vector<std::size_t> sizes = {12, 25, 50, 100, 150, 200};
  const MaeCurve curve = MaeVsSampleSize(data.bags, sizes, 100, rng);
  bool decreasing = true;
  for (std::size_t i = 1; i + 1 < sizes.size(); ++i) {
    decreasing = decreasing && curve.mae[i] < curve.mae[i - 1];
  }
  const bool zero_at_full = curve.mae.back() == 0.0 && curve.sd.back() == 0.0;

  std::vector<int> labels(7, 0);
  labels.insert(labels.end(), 3, 1);
  auto pool = std::make_shared<const InstancePool>(Eigen::MatrixXd::Zero(10, 2), labels, 2);
  const std::vector<Bag> small = {Bag(0, pool, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9})};
  const std::vector<std::size_t> three = {3};
  const double mc = MaeVsSampleSize(small, three, 100'000, rng).mae[0];
  const double exact = oracle::ExactMiniBagMae(std::vector<std::int64_t>{7, 3}, 3);

  std::string curve_text;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    curve_text += Fmt("%s%zu:%.4f", i ? " " : "", sizes[i], curve.mae[i]);
  }
  const double secs = Seconds(start);
  return {decreasing && zero_at_full && std::abs(mc - exact) <= 0.005 && secs < 60.0,
          Fmt("MAE [%s], small bag MC %.4f vs exact %.4f, %.2fs", curve_text.c_str(), mc,
              exact, secs)};
}

// Pinned learning experiment shared by criteria 5-8.
struct GridResults {
  std::vector<AblationRow> rows;
  double seconds = 0.0;
  bool completed = false;
  std::string error;

  std::vector<const AblationRow*> Cells(const std::string& method, std::size_t n) const {
    std::vector<const AblationRow*> out;
    for (const AblationRow& r : rows) {
      if (r.method.Name() == method && r.sample_size == n) out.push_back(&r);
    }
    return out;
  }
  double MeanAcc(const std::string& method, std::size_t n) const {
    const auto cells = Cells(method, n);
    double s = 0.0;
    for (const AblationRow* r : cells) s += r->test_acc;
    return cells.empty() ? NAN : s / static_cast<double>(cells.size());
  }
};

GridResults RunGrid() {
  DatasetConfig data;
  data.classes = 10;
  data.dim = 16;
  data.instances_per_class = 1000;
  data.test_instances_per_class = 200;
  data.separation = 4.0;
  data.num_bags = 100;
  data.bag_size = 200;
  data.proportion_sd = 0.1;
  TrainConfig base;
  base.batch_bags = 8;
  base.epochs = 50;
  base.learning_rate = 0.02;
  base.momentum = 0.0;
  base.hidden = 64;
  base.validation_fraction = 0.2;
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  GridResults out;
  const auto start = Clock::now();
  try {
    const std::vector<Method> small_methods = {
        Method::Parse("PL"), Method::Parse("OURS"), Method::Parse("OURS_NO_LW"),
        Method::Parse("GAUSSIAN:0.05"), Method::Parse("GAUSSIAN:0.15"),
        Method::Parse("GAUSSIAN:0.25")};
    const std::vector<std::size_t> small_n = {12, 25};
    out.rows = AblationGrid(data, small_methods, small_n, seeds, base);
    const std::vector<Method> full_methods = {Method::Parse("PL"), Method::Parse("OURS")};
    const std::vector<std::size_t> full_n = {200};
    AblationOptions degenerate;
    degenerate.include_degenerate = true;
    for (AblationRow& r : AblationGrid(data, full_methods, full_n, seeds, base, degenerate)) {
      out.rows.push_back(std::move(r));
    }
    out.completed = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = Seconds(start);
  return out;
}

Outcome MethodOrdering(const GridResults& g) {
  if (!g.completed) return {false, "grid aborted: " + g.error};
  bool ok = g.seconds < 600.0;
  std::string detail;
  for (std::size_t n : {12u, 25u}) {
    const double ours = g.MeanAcc("OURS", n);
    const double no_lw = g.MeanAcc("OURS_NO_LW", n);
    const double pl = g.MeanAcc("PL", n);
    ok = ok && ours > no_lw && no_lw > pl && ours - pl >= 0.03;
    detail += Fmt("n=%zu OURS %.4f OURS_NO_LW %.4f PL %.4f; ", n, ours, no_lw, pl);
  }
  const double ours_full = g.MeanAcc("OURS", 200);
  const double pl_full = g.MeanAcc("PL", 200);
  ok = ok && std::abs(ours_full - pl_full) <= 0.02;
  detail += Fmt("n=200 OURS %.4f PL %.4f; grid %.0fs", ours_full, pl_full, g.seconds);
  return {ok, detail};
}

Outcome GaussianOrdering(const GridResults& g) {
  if (!g.completed) return {false, "grid aborted: " + g.error};
  const double ours = g.MeanAcc("OURS", 12);
  double best = -1.0;
  std::string detail = Fmt("n=12 OURS %.4f;", ours);
  for (const char* m : {"GAUSSIAN:0.05", "GAUSSIAN:0.15", "GAUSSIAN:0.25"}) {
    const double acc = g.MeanAcc(m, 12);
    best = std::max(best, acc);
    detail += Fmt(" %s %.4f", m, acc);
  }
  return {ours >= best, detail};
}

Outcome OverfittingSignature(const GridResults& g) {
  if (!g.completed) return {false, "grid aborted: " + g.error};
  auto drop = [](const AblationRow& r) {
    double peak = 0.0;
    for (const EpochRecord& e : r.trace.epochs) peak = std::max(peak, e.train_acc);
    return peak - r.trace.epochs.back().train_acc;
  };
  int pl_degrades = 0;
  int ours_stable = 0;
  std::string pl_drops, ours_drops;
  for (const AblationRow* r : g.Cells("PL", 12)) {
    const double d = drop(*r);
    pl_degrades += d >= 0.02 ? 1 : 0;
    pl_drops += Fmt(" %.3f", d);
  }
  for (const AblationRow* r : g.Cells("OURS", 12)) {
    const double d = drop(*r);
    ours_stable += d <= 0.02 ? 1 : 0;
    ours_drops += Fmt(" %.3f", d);
  }
  return {pl_degrades >= 3 && ours_stable >= 3,
          Fmt("PL degraded on %d/5 (drops%s), OURS stable on %d/5 (drops%s)", pl_degrades,
              pl_drops.c_str(), ours_stable, ours_drops.c_str())};
}

Outcome WeightNormalization(const GridResults& g) {
  // RunTraining throws if any OURS batch violates the bound, so a completed
  // grid already implies the property; report the observed maximum too.
  if (!g.completed) return {false, "grid aborted: " + g.error};
  std::size_t batches = 0;
  double worst = 0.0;
  for (const AblationRow& r : g.rows) {
    if (r.method.kind != MethodKind::kOurs) continue;
    batches += r.trace.weighted_batches;
    worst = std::max(worst, r.trace.max_weight_median_error);
  }
  return {batches > 0 && worst <= kWeightMedianTolerance,
          Fmt("%zu OURS batches, max |median-1| = %.2e", batches, worst)};
}

Outcome CliDeterminism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "llpbag_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "run.cfg");
    cfg << "classes = 4\ndim = 5\ninstances_per_class = 150\ntest_instances_per_class = 50\n"
           "num_bags = 12\nbag_size = 30\nsample_size = 6\nepochs = 4\nlearning_rate = 0.05\n"
           "hidden = 8\nsample_sizes = 6, 15, 30\ndraws_per_point = 20\n"
           "methods = PL, OURS, OURS_NO_LW, GAUSSIAN:0.05\nnum_seeds = 2\n";
  }
  std::size_t compared = 0;
  std::string mismatch;
  for (const char* sub : {"gen-data", "train", "mae-curve", "ablation", "calibrate"}) {
    for (const char* run : {"a", "b"}) {
      std::ostringstream out, err;
      const std::vector<std::string> args = {"llpbag", sub, "--config",
                                             (root / "run.cfg").string(), "--out",
                                             (root / (std::string(sub) + run)).string(),
                                             "--seed", "17"};
      if (cli::ParseAndDispatch(args, out, err) != 0) {
        fs::remove_all(root);
        return {false, std::string(sub) + " failed: " + err.str()};
      }
    }
    const fs::path a = root / (std::string(sub) + "a");
    const fs::path b = root / (std::string(sub) + "b");
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      const fs::path rel = fs::relative(entry.path(), a);
      auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        return os.str();
      };
      if (slurp(entry.path()) != slurp(b / rel)) mismatch += " " + (a.filename() / rel).string();
      ++compared;
    }
  }
  fs::remove_all(root);
  return {mismatch.empty() && compared > 0,
          Fmt("%zu CSV files compared across 5 subcommands%s%s", compared,
              mismatch.empty() ? "" : ", mismatched:", mismatch.c_str())};
}

}  // namespace
}  // namespace llpbag

int main() {
  using namespace llpbag;
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  report(1, "exact distribution", ExactDistribution());
  report(2, "sampler fidelity", SamplerFidelity());
  report(3, "gradient correctness", GradientCorrectness());
  report(4, "MAE curve", MaeReproduction());
  const GridResults grid = RunGrid();
  report(5, "method ordering", MethodOrdering(grid));
  report(6, "Gaussian baseline ordering", GaussianOrdering(grid));
  report(7, "overfitting signature", OverfittingSignature(grid));
  report(8, "weight normalization", WeightNormalization(grid));
  report(9, "CLI determinism", CliDeterminism());
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures;
}
