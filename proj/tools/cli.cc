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

#include "cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "llpbag/errors.h"
#include "llpbag/svg.h"
#include "llpbag/text_io.h"

namespace llpbag::cli {
namespace fs = std::filesystem;

namespace {

template <typename T>
std::string JoinList(const std::vector<T>& items,
                     const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::size_t ToSize(std::string_view v) {
  return static_cast<std::size_t>(ParseUnsigned(v));
}

bool ToBool(std::string_view v) {
  v = Trim(v);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

template <typename T, typename F>
std::vector<T> ToList(std::string_view v, F parse) {
  std::vector<T> out;
  for (std::string_view item : SplitFields(Trim(v), ',')) {
    out.push_back(parse(Trim(item)));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& Setters() {
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"seed", [](RunConfig& c, std::string_view v) { c.seed = ParseUnsigned(v); }},
      {"classes", [](RunConfig& c, std::string_view v) { c.data.classes = ToSize(v); }},
      {"dim", [](RunConfig& c, std::string_view v) { c.data.dim = ToSize(v); }},
      {"instances_per_class",
       [](RunConfig& c, std::string_view v) { c.data.instances_per_class = ToSize(v); }},
      {"test_instances_per_class",
       [](RunConfig& c, std::string_view v) { c.data.test_instances_per_class = ToSize(v); }},
      {"separation", [](RunConfig& c, std::string_view v) { c.data.separation = ParseDouble(v); }},
      {"num_bags", [](RunConfig& c, std::string_view v) { c.data.num_bags = ToSize(v); }},
      {"bag_size", [](RunConfig& c, std::string_view v) { c.data.bag_size = ToSize(v); }},
      {"proportion_sd",
       [](RunConfig& c, std::string_view v) { c.data.proportion_sd = ParseDouble(v); }},
      {"method", [](RunConfig& c, std::string_view v) { c.train.method = Method::Parse(v); }},
      {"sample_size", [](RunConfig& c, std::string_view v) { c.train.sample_size = ToSize(v); }},
      {"batch_bags", [](RunConfig& c, std::string_view v) { c.train.batch_bags = ToSize(v); }},
      {"epochs", [](RunConfig& c, std::string_view v) { c.train.epochs = ToSize(v); }},
      {"learning_rate",
       [](RunConfig& c, std::string_view v) { c.train.learning_rate = ParseDouble(v); }},
      {"momentum", [](RunConfig& c, std::string_view v) { c.train.momentum = ParseDouble(v); }},
      {"hidden", [](RunConfig& c, std::string_view v) { c.train.hidden = ToSize(v); }},
      {"validation_fraction",
       [](RunConfig& c, std::string_view v) { c.train.validation_fraction = ParseDouble(v); }},
      {"sample_sizes",
       [](RunConfig& c, std::string_view v) { c.sample_sizes = ToList<std::size_t>(v, ToSize); }},
      {"draws_per_point",
       [](RunConfig& c, std::string_view v) { c.draws_per_point = ToSize(v); }},
      {"methods",
       [](RunConfig& c, std::string_view v) { c.methods = ToList<Method>(v, Method::Parse); }},
      {"num_seeds", [](RunConfig& c, std::string_view v) { c.num_seeds = ToSize(v); }},
      {"histogram_bins",
       [](RunConfig& c, std::string_view v) { c.histogram_bins = ToSize(v); }},
      {"include_degenerate",
       [](RunConfig& c, std::string_view v) { c.include_degenerate = ToBool(v); }},
  };
  return setters;
}

}  // namespace

RunConfig DefaultRunConfig() {
  RunConfig c;
  c.train.sample_size = 12;
  c.methods = {Method{MethodKind::kPl, 0.0}, Method{MethodKind::kOurs, 0.0},
               Method{MethodKind::kOursNoLw, 0.0}};
  return c;
}

RunConfig ParseConfig(std::istream& is) {
  RunConfig config = DefaultRunConfig();
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view body(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = Trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value'");
    }
    const std::string key(Trim(body.substr(0, eq)));
    const std::string_view value = Trim(body.substr(eq + 1));
    const auto it = Setters().find(key);
    if (it == Setters().end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "key given twice");
    try {
      it->second(config, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, "'" + std::string(value) + "': " + e.what());
    }
  }
  return config;
}

void ValidateRunConfig(const RunConfig& c, const std::string& subcommand) {
  if (c.data.classes < 2) throw ConfigError("classes", "must be >= 2");
  if (c.data.dim < 2) throw ConfigError("dim", "must be >= 2");
  if (c.data.bag_size < 1) throw ConfigError("bag_size", "must be >= 1");
  if (c.data.num_bags < 1) throw ConfigError("num_bags", "must be >= 1");
  if (!(c.data.separation >= 0.0)) throw ConfigError("separation", "must be >= 0");
  if (!(c.data.proportion_sd >= 0.0)) throw ConfigError("proportion_sd", "must be >= 0");
  if (c.data.test_instances_per_class < 1) {
    throw ConfigError("test_instances_per_class", "must be >= 1");
  }
  if (c.data.instances_per_class < 1) {
    throw ConfigError("instances_per_class", "must be >= 1");
  }
  if (c.histogram_bins < 1) throw ConfigError("histogram_bins", "must be >= 1");

  auto check_n = [&](std::size_t n, const char* key) {
    if (n < 1 || n > c.data.bag_size) {
      throw ConfigError(key, "sample_size " + std::to_string(n) +
                                 " must lie in [1, bag_size = " +
                                 std::to_string(c.data.bag_size) + "]");
    }
  };
  if (subcommand == "train" || subcommand == "calibrate") {
    check_n(c.train.sample_size, "sample_size");
  }
  if (subcommand == "mae-curve" || subcommand == "ablation") {
    for (std::size_t n : c.sample_sizes) check_n(n, "sample_sizes");
  }
  if (subcommand == "mae-curve" && c.draws_per_point < 1) {
    throw ConfigError("draws_per_point", "must be >= 1");
  }
  if (subcommand == "ablation" && c.num_seeds < 1) {
    throw ConfigError("num_seeds", "must be >= 1");
  }
  if (subcommand == "train" || subcommand == "calibrate" || subcommand == "ablation") {
    if (c.train.batch_bags < 1) throw ConfigError("batch_bags", "must be >= 1");
    if (c.train.epochs < 1) throw ConfigError("epochs", "must be >= 1");
    if (!(c.train.learning_rate >= 0.0)) throw ConfigError("learning_rate", "must be >= 0");
    if (!(c.train.momentum >= 0.0 && c.train.momentum < 1.0)) {
      throw ConfigError("momentum", "must lie in [0, 1)");
    }
    const double fv = c.train.validation_fraction;
    if (!(fv > 0.0 && fv < 1.0)) {
      throw ConfigError("validation_fraction", "must lie in (0, 1)");
    }
    const auto num_val = std::llround(fv * static_cast<double>(c.data.num_bags));
    if (num_val == 0 || static_cast<std::size_t>(num_val) >= c.data.num_bags) {
      throw ConfigError("validation_fraction",
                        "leaves an empty train or validation split");
    }
  }
}

std::string FormatConfig(const RunConfig& c) {
  std::ostringstream os;
  os << "seed = " << c.seed << '\n'
     << "classes = " << c.data.classes << '\n'
     << "dim = " << c.data.dim << '\n'
     << "instances_per_class = " << c.data.instances_per_class << '\n'
     << "test_instances_per_class = " << c.data.test_instances_per_class << '\n'
     << "separation = " << FormatDouble(c.data.separation) << '\n'
     << "num_bags = " << c.data.num_bags << '\n'
     << "bag_size = " << c.data.bag_size << '\n'
     << "proportion_sd = " << FormatDouble(c.data.proportion_sd) << '\n'
     << "method = " << c.train.method.Name() << '\n'
     << "sample_size = " << c.train.sample_size << '\n'
     << "batch_bags = " << c.train.batch_bags << '\n'
     << "epochs = " << c.train.epochs << '\n'
     << "learning_rate = " << FormatDouble(c.train.learning_rate) << '\n'
     << "momentum = " << FormatDouble(c.train.momentum) << '\n'
     << "hidden = " << c.train.hidden << '\n'
     << "validation_fraction = " << FormatDouble(c.train.validation_fraction) << '\n'
     << "sample_sizes = "
     << JoinList<std::size_t>(c.sample_sizes,
                              [](const std::size_t& n) { return std::to_string(n); })
     << '\n'
     << "draws_per_point = " << c.draws_per_point << '\n'
     << "methods = "
     << JoinList<Method>(c.methods, [](const Method& m) { return m.Name(); }) << '\n'
     << "num_seeds = " << c.num_seeds << '\n'
     << "histogram_bins = " << c.histogram_bins << '\n'
     << "include_degenerate = " << (c.include_degenerate ? "true" : "false") << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

class OutputDir {
 public:
  OutputDir(const fs::path& root, bool force) : root_(root) {
    if (fs::exists(root_)) {
      if (!fs::is_directory(root_)) {
        throw std::runtime_error(root_.string() + " exists and is not a directory");
      }
      if (!force && !fs::is_empty(root_)) {
        throw std::runtime_error("output directory " + root_.string() +
                                 " is not empty; pass --force to overwrite");
      }
    }
    fs::create_directories(root_);
  }

  void Write(const fs::path& relative, const std::string& contents) const {
    const fs::path path = root_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << contents;
    if (!os) throw std::runtime_error("write failed for " + path.string());
  }

 private:
  fs::path root_;
};

std::string FileSafe(std::string name) {
  for (char& ch : name) {
    if (ch == ':' || ch == '/' || ch == ' ') ch = '_';
  }
  return name;
}

std::string Manifest(const Invocation& inv, const RunConfig& c) {
  std::ostringstream os;
  os << "# llpbag run manifest\n"
     << "# subcommand: " << inv.subcommand << '\n'
     << "# random streams derive from seed via tagged splitmix64:\n"
     << "#   data.pool, data.bags, data.heldout (dataset)\n"
     << "#   train.split, train.init, train.order, train.minibag, train.perturb,"
        " train.validation (training)\n"
     << "#   mae (mae-curve); ablation seeds are seed .. seed+num_seeds-1\n"
     << FormatConfig(c);
  return os.str();
}

LineChart TraceChart(const std::string& title, const TrainTrace& trace) {
  LineChart chart;
  chart.title = title;
  chart.x_label = "epoch";
  chart.y_label = "value";
  Series loss{"train prop. loss", {}, {}, {}, "#d62728", false};
  Series val{"val prop. loss", {}, {}, {}, "#ff7f0e", true};
  Series train_acc{"train accuracy", {}, {}, {}, "#1f77b4", false};
  Series test_acc{"test accuracy", {}, {}, {}, "#2ca02c", true};
  for (const EpochRecord& r : trace.epochs) {
    const auto e = static_cast<double>(r.epoch);
    loss.x.push_back(e);
    loss.y.push_back(r.train_prop_loss);
    val.x.push_back(e);
    val.y.push_back(r.val_prop_loss);
    train_acc.x.push_back(e);
    train_acc.y.push_back(r.train_acc);
    test_acc.x.push_back(e);
    test_acc.y.push_back(r.test_acc);
  }
  chart.series = {loss, val, train_acc, test_acc};
  return chart;
}

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

void RunGenData(const RunConfig& c, const OutputDir& out) {
  const ExperimentData data = BuildExperimentData(c.data, c.seed);
  std::ostringstream bags;
  WriteBagsCsv(bags, data.bags);
  out.Write("bags.csv", bags.str());
  std::ostringstream heldout;
  WritePoolCsv(heldout, data.heldout);
  out.Write("heldout.csv", heldout.str());
}

void RunTrain(const RunConfig& c, const OutputDir& out) {
  const ExperimentData data = BuildExperimentData(c.data, c.seed);
  TrainConfig tc = c.train;
  tc.seed = c.seed;
  const TrainResult result = RunTraining(data.bags, data.heldout, tc);
  std::ostringstream trace;
  WriteTraceCsv(trace, result.trace);
  out.Write("trace.csv", trace.str());
  std::ostringstream ckpt;
  WriteCheckpoint(ckpt, result.best_params,
                  CheckpointHeader{result.best_params.shape(), c.seed,
                                   result.trace.best_epoch});
  out.Write("params.txt", ckpt.str());
  out.Write("trace.svg",
            RenderSvg(TraceChart(tc.method.Name() + " n=" + std::to_string(tc.sample_size),
                                 result.trace)));
}

void RunMaeCurve(const RunConfig& c, const OutputDir& out) {
  const ExperimentData data = BuildExperimentData(c.data, c.seed);
  Rng rng = MakeStream(c.seed, "mae");
  const MaeCurve curve = MaeVsSampleSize(data.bags, c.sample_sizes, c.draws_per_point, rng);
  std::ostringstream csv;
  WriteMaeCsv(csv, curve);
  out.Write("mae.csv", csv.str());
  LineChart chart;
  chart.title = "Proportion MAE vs. sample size";
  chart.x_label = "sample size";
  chart.y_label = "MAE";
  Series s{"MAE", {}, curve.mae, curve.sd, kPalette[0], false};
  for (std::size_t n : curve.sample_sizes) s.x.push_back(static_cast<double>(n));
  chart.series = {s};
  out.Write("mae.svg", RenderSvg(chart));
}

void RunAblation(const RunConfig& c, const OutputDir& out) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < c.num_seeds; ++i) seeds.push_back(c.seed + i);
  AblationOptions options;
  options.include_degenerate = c.include_degenerate;
  const std::vector<AblationRow> rows =
      AblationGrid(c.data, c.methods, c.sample_sizes, seeds, c.train, options);
  std::ostringstream csv;
  WriteAblationCsv(csv, rows);
  out.Write("results.csv", csv.str());
  std::ostringstream summary;
  WriteAblationSummaryCsv(summary, SummarizeAblation(rows));
  out.Write("summary.csv", summary.str());
  for (const AblationRow& r : rows) {
    const std::string stem = FileSafe(r.method.Name()) + "_n" +
                             std::to_string(r.sample_size) + "_seed" +
                             std::to_string(r.seed);
    out.Write(fs::path("traces") / (stem + ".svg"),
              RenderSvg(TraceChart(r.method.Name() + " n=" + std::to_string(r.sample_size) +
                                       " seed=" + std::to_string(r.seed),
                                   r.trace)));
  }
}

void RunCalibrate(const RunConfig& c, const OutputDir& out) {
  const ExperimentData data = BuildExperimentData(c.data, c.seed);
  LineChart reliability;
  reliability.title = "Reliability diagram (n=" + std::to_string(c.train.sample_size) + ")";
  reliability.x_label = "confidence";
  reliability.y_label = "accuracy";
  reliability.x_min = reliability.y_min = 0.0;
  reliability.x_max = reliability.y_max = 1.0;
  reliability.series.push_back(Series{"perfect", {0.0, 1.0}, {0.0, 1.0}, {}, "#000000", true});
  LineChart hist_chart;
  hist_chart.title = "Max-confidence histogram";
  hist_chart.x_label = "confidence";
  hist_chart.y_label = "fraction of instances";

  std::size_t color = 0;
  for (const Method& m : c.methods) {
    TrainConfig tc = c.train;
    tc.method = m;
    tc.seed = c.seed;
    const TrainResult result = RunTraining(data.bags, data.heldout, tc);
    const CalibrationTable table = CalibrationCurve(result.best_params, data.heldout);
    const std::vector<std::size_t> hist =
        ConfidenceHistogram(result.best_params, data.heldout.features(), c.histogram_bins);
    const std::string stem = FileSafe(m.Name());
    std::ostringstream cal_csv;
    WriteCalibrationCsv(cal_csv, table);
    out.Write("calibration_" + stem + ".csv", cal_csv.str());
    std::ostringstream hist_csv;
    WriteHistogramCsv(hist_csv, hist);
    out.Write("histogram_" + stem + ".csv", hist_csv.str());

    const char* colour = kPalette[color++ % std::size(kPalette)];
    Series rel{m.Name(), {}, {}, {}, colour, false};
    for (const CalibrationBin& b : table.bins) {
      if (b.count == 0) continue;
      rel.x.push_back(b.mean_confidence);
      rel.y.push_back(b.accuracy);
    }
    reliability.series.push_back(rel);
    Series h{m.Name(), {}, {}, {}, colour, false};
    const double total = static_cast<double>(data.heldout.size());
    for (std::size_t b = 0; b < hist.size(); ++b) {
      h.x.push_back((static_cast<double>(b) + 0.5) / static_cast<double>(hist.size()));
      h.y.push_back(static_cast<double>(hist[b]) / total);
    }
    hist_chart.series.push_back(h);
  }
  out.Write("reliability.svg", RenderSvg(reliability));
  out.Write("histogram.svg", RenderSvg(hist_chart));
}

int Dispatch(const Invocation& inv, std::ostream& out) {
  std::ifstream cfg_stream(inv.config_path);
  if (!cfg_stream) {
    throw std::runtime_error("cannot open config file '" + inv.config_path + "'");
  }
  RunConfig config = ParseConfig(cfg_stream);
  if (inv.seed) config.seed = *inv.seed;
  ValidateRunConfig(config, inv.subcommand);

  const OutputDir dir(inv.out_dir, inv.force);
  if (inv.subcommand == "gen-data") {
    RunGenData(config, dir);
  } else if (inv.subcommand == "train") {
    RunTrain(config, dir);
  } else if (inv.subcommand == "mae-curve") {
    RunMaeCurve(config, dir);
  } else if (inv.subcommand == "ablation") {
    RunAblation(config, dir);
  } else if (inv.subcommand == "calibrate") {
    RunCalibrate(config, dir);
  }
  dir.Write("manifest.txt", Manifest(inv, config));
  out << inv.subcommand << ": wrote " << inv.out_dir << '\n';
  return 0;
}

}  // namespace

int ParseAndDispatch(const std::vector<std::string>& args, std::ostream& out,
                     std::ostream& err) {
  CLI::App app{"llpbag: learning from label proportions with mini-bag sampling"};
  app.require_subcommand(1);
  Invocation inv;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Generate a synthetic bag dataset snapshot (CSV)"},
      {"train", "Train one model and write its trace and checkpoint"},
      {"mae-curve", "Proportion MAE of sampled mini-bags vs. sample size"},
      {"ablation", "Method x sample size x seed accuracy grid"},
      {"calibrate", "Confidence histograms and reliability diagrams"},
  };
  std::uint64_t seed = 0;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "key = value config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", inv.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("--force", inv.force, "write into a non-empty output directory");
    sub->callback([&inv, &seed, sub, name = name] {
      inv.subcommand = name;
      if (sub->count("--seed") > 0) inv.seed = seed;
    });
  }

  // CLI11 consumes arguments from the back; args[0] is the program name.
  std::vector<std::string> reversed;
  for (std::size_t i = args.size(); i > 1; --i) reversed.push_back(args[i - 1]);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    return Dispatch(inv, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace llpbag::cli
