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

#include "llpbag/bags.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "llpbag/errors.h"
#include "llpbag/text_io.h"

namespace llpbag {
namespace {

thread_local int label_scope_depth = 0;
thread_local std::size_t unscoped_label_reads = 0;

// First `count` entries of `items` become a uniform sample without
// replacement (partial Fisher-Yates).
template <typename T>
void PartialShuffle(std::vector<T>& items, std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
}

ClassCountVector CountLabels(const InstancePool& pool,
                             std::span<const std::size_t> rows) {
  std::vector<std::int64_t> counts(pool.num_classes(), 0);
  LabelAccessScope scope;
  for (std::size_t r : rows) ++counts[static_cast<std::size_t>(pool.label(r))];
  return ClassCountVector(std::move(counts));
}

}  // namespace

LabelAccessScope::LabelAccessScope() { ++label_scope_depth; }
LabelAccessScope::~LabelAccessScope() { --label_scope_depth; }

std::size_t UnscopedLabelReads() { return unscoped_label_reads; }
void ResetLabelAudit() { unscoped_label_reads = 0; }

// ---------------------------------------------------------------------------

InstancePool::InstancePool(Eigen::MatrixXd features, std::vector<int> labels,
                           std::size_t num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      by_class_(num_classes) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw DimensionError("feature rows and label count differ");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int y = labels_[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes_) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes_) + ")");
    }
    by_class_[static_cast<std::size_t>(y)].push_back(i);
  }
}

int InstancePool::label(std::size_t i) const {
  if (label_scope_depth == 0) ++unscoped_label_reads;
  return labels_[i];
}

InstancePool InstancePool::Subset(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<int> y(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    f.row(static_cast<Eigen::Index>(i)) =
        features_.row(static_cast<Eigen::Index>(indices[i]));
    y[i] = labels_[indices[i]];
  }
  return InstancePool(std::move(f), std::move(y), num_classes_);
}

InstancePool ClusterModel::SamplePool(std::size_t per_class, Rng& rng) const {
  const auto C = static_cast<Eigen::Index>(num_classes());
  const auto D = static_cast<Eigen::Index>(dim());
  const auto per = static_cast<Eigen::Index>(per_class);
  Eigen::MatrixXd features(C * per, D);
  std::vector<int> labels(static_cast<std::size_t>(C * per));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Eigen::Index c = 0; c < C; ++c) {
    for (Eigen::Index i = 0; i < per; ++i) {
      const Eigen::Index row = c * per + i;
      for (Eigen::Index d = 0; d < D; ++d) {
        features(row, d) = means(c, d) + noise(rng);
      }
      labels[static_cast<std::size_t>(row)] = static_cast<int>(c);
    }
  }
  return InstancePool(std::move(features), std::move(labels), num_classes());
}

SyntheticDataset GenerateSyntheticDataset(std::size_t num_classes,
                                          std::size_t dim,
                                          std::size_t instances_per_class,
                                          double separation, Rng& rng) {
  if (num_classes < 2) throw ArgumentError("need at least 2 classes");
  if (dim < 2) throw ArgumentError("need at least 2 feature dimensions");
  if (!(separation >= 0.0)) throw ArgumentError("separation must be >= 0");

  ClusterModel model;
  model.means.resize(static_cast<Eigen::Index>(num_classes),
                     static_cast<Eigen::Index>(dim));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index c = 0; c < model.means.rows(); ++c) {
    Eigen::VectorXd dir(model.means.cols());
    do {
      for (Eigen::Index d = 0; d < dir.size(); ++d) dir(d) = gauss(rng);
    } while (dir.norm() < 1e-12);
    model.means.row(c) = dir.normalized().transpose() * separation;
  }
  auto pool = std::make_shared<const InstancePool>(
      model.SamplePool(instances_per_class, rng));
  return SyntheticDataset{std::move(model), std::move(pool)};
}

// ---------------------------------------------------------------------------

Bag::Bag(std::size_t id, std::shared_ptr<const InstancePool> pool,
         std::vector<std::size_t> members)
    : id_(id), pool_(std::move(pool)), members_(std::move(members)) {
  if (members_.empty()) throw ArgumentError("a bag needs at least one instance");
  for (std::size_t m : members_) {
    if (m >= pool_->size()) throw ArgumentError("bag member outside pool");
  }
  class_counts_ = CountLabels(*pool_, members_);
  proportion_ = ProportionVector::FromCounts(class_counts_);
}

Eigen::MatrixXd Bag::GatherFeatures(
    std::span<const std::size_t> positions) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(positions.size()),
                      pool_->features().cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features(positions[i]);
  }
  return out;
}

ProportionVector DrawBagProportion(std::size_t num_classes, double sd,
                                   Rng& rng) {
  const double mean = 1.0 / static_cast<double>(num_classes);
  std::vector<double> raw(num_classes, mean);
  if (sd > 0.0) {
    std::normal_distribution<double> gauss(mean, sd);
    double sum = 0.0;
    // An all-negative draw has no direction to renormalise; redraw it.
    do {
      sum = 0.0;
      for (double& v : raw) {
        v = std::max(0.0, gauss(rng));
        sum += v;
      }
    } while (sum <= 0.0);
    for (double& v : raw) v /= sum;
  }
  return ProportionVector(std::move(raw));
}

ClassCountVector LargestRemainderCounts(const ProportionVector& p,
                                        std::int64_t total) {
  const std::size_t C = p.num_classes();
  std::vector<std::int64_t> counts(C);
  std::vector<double> remainder(C);
  std::int64_t assigned = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const double exact = p[c] * static_cast<double>(total);
    counts[c] = static_cast<std::int64_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::vector<std::size_t> order(C);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  // The floors undershoot by fewer than C; hand out the deficit by
  // descending remainder.
  for (std::size_t i = 0; assigned < total; i = (i + 1) % C) {
    ++counts[order[i]];
    ++assigned;
  }
  return ClassCountVector(std::move(counts));
}

std::vector<Bag> MakeBags(const std::shared_ptr<const InstancePool>& pool,
                          std::size_t num_bags, std::size_t bag_size,
                          double proportion_sd, Rng& rng) {
  if (bag_size == 0) throw ArgumentError("bag size must be positive");
  if (!(proportion_sd >= 0.0)) throw ArgumentError("proportion sd must be >= 0");
  const std::size_t C = pool->num_classes();
  std::vector<Bag> bags;
  bags.reserve(num_bags);
  for (std::size_t b = 0; b < num_bags; ++b) {
    const ProportionVector p = DrawBagProportion(C, proportion_sd, rng);
    const ClassCountVector counts =
        LargestRemainderCounts(p, static_cast<std::int64_t>(bag_size));
    std::vector<std::size_t> members;
    members.reserve(bag_size);
    for (std::size_t c = 0; c < C; ++c) {
      const auto need = static_cast<std::size_t>(counts[c]);
      if (need == 0) continue;
      const auto available = pool->indices_of_class(c);
      if (available.size() < need) {
        throw DataError("bag " + std::to_string(b) + " needs " +
                        std::to_string(need) + " instances of class " +
                        std::to_string(c) + " but the pool has " +
                        std::to_string(available.size()));
      }
      std::vector<std::size_t> candidates(available.begin(), available.end());
      PartialShuffle(candidates, need, rng);
      members.insert(members.end(), candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(need));
    }
    PartialShuffle(members, members.size(), rng);
    bags.emplace_back(b, pool, std::move(members));
  }
  return bags;
}

MiniBag SampleMiniBag(const Bag& bag, std::size_t n, Rng& rng) {
  if (n < 1 || n > bag.size()) {
    throw ArgumentError("mini-bag size " + std::to_string(n) +
                        " outside [1, " + std::to_string(bag.size()) + "]");
  }
  std::vector<std::size_t> positions(bag.size());
  std::iota(positions.begin(), positions.end(), 0);
  PartialShuffle(positions, n, rng);
  positions.resize(n);
  return MiniBag{bag.id(), std::move(positions), std::nullopt};
}

ProportionVector TrueMiniBagProportion(const Bag& bag, const MiniBag& minibag) {
  std::vector<std::int64_t> counts(bag.num_classes(), 0);
  for (std::size_t pos : minibag.positions) {
    if (pos >= bag.size()) throw ArgumentError("mini-bag position out of range");
    ++counts[static_cast<std::size_t>(bag.true_label(pos))];
  }
  return ProportionVector::FromCounts(ClassCountVector(std::move(counts)));
}

// ---------------------------------------------------------------------------

namespace {

void WriteCsvHeader(std::ostream& os, std::size_t dim) {
  os << "bag_id,instance_id,class_label";
  for (std::size_t d = 0; d < dim; ++d) os << ",f" << d;
  os << '\n';
}

void WriteCsvRow(std::ostream& os, const std::string& bag_id,
                 std::size_t instance_id, int label,
                 const Eigen::Ref<const Eigen::RowVectorXd>& f) {
  os << bag_id << ',' << instance_id << ',' << label;
  for (Eigen::Index d = 0; d < f.size(); ++d) os << ',' << FormatDouble(f(d));
  os << '\n';
}

}  // namespace

void WriteBagsCsv(std::ostream& os, std::span<const Bag> bags) {
  if (bags.empty()) throw ArgumentError("no bags to write");
  WriteCsvHeader(os, bags.front().dim());
  LabelAccessScope scope;
  for (const Bag& bag : bags) {
    const std::string id = std::to_string(bag.id());
    for (std::size_t j = 0; j < bag.size(); ++j) {
      WriteCsvRow(os, id, bag.members()[j], bag.true_label(j), bag.features(j));
    }
  }
}

void WritePoolCsv(std::ostream& os, const InstancePool& pool) {
  WriteCsvHeader(os, pool.dim());
  LabelAccessScope scope;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    WriteCsvRow(os, "-1", i, pool.label(i),
                pool.features().row(static_cast<Eigen::Index>(i)));
  }
}

LoadedBags ReadBagsCsv(std::istream& is, std::size_t num_classes) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty bag CSV");
  const auto header = SplitFields(Trim(line), ',');
  if (header.size() < 4 || header[0] != "bag_id" ||
      header[1] != "instance_id" || header[2] != "class_label") {
    throw DataError("unexpected bag CSV header");
  }
  const std::size_t dim = header.size() - 3;
  for (std::size_t d = 0; d < dim; ++d) {
    if (header[3 + d] != "f" + std::to_string(d)) {
      throw DataError("unexpected feature column '" +
                      std::string(header[3 + d]) + "'");
    }
  }

  struct Row {
    std::vector<double> f;
    int label;
  };
  std::map<std::size_t, Row> instances;
  std::map<std::size_t, std::vector<std::size_t>> bag_members;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(Trim(line), ',');
    if (fields.size() != dim + 3) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim + 3) + " fields");
    }
    try {
      const auto bag_id = static_cast<std::size_t>(ParseUnsigned(fields[0]));
      const auto inst_id = static_cast<std::size_t>(ParseUnsigned(fields[1]));
      Row row{std::vector<double>(dim),
              static_cast<int>(ParseInt(fields[2]))};
      for (std::size_t d = 0; d < dim; ++d) row.f[d] = ParseDouble(fields[3 + d]);
      auto [it, inserted] = instances.emplace(inst_id, row);
      if (!inserted && (it->second.f != row.f || it->second.label != row.label)) {
        throw DataError("instance " + std::to_string(inst_id) +
                        " appears with conflicting values");
      }
      bag_members[bag_id].push_back(inst_id);
    } catch (const std::invalid_argument& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::map<std::size_t, std::size_t> row_of;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(instances.size()),
                           static_cast<Eigen::Index>(dim));
  std::vector<int> labels;
  labels.reserve(instances.size());
  for (const auto& [id, row] : instances) {
    const std::size_t r = labels.size();
    row_of[id] = r;
    for (std::size_t d = 0; d < dim; ++d) {
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = row.f[d];
    }
    labels.push_back(row.label);
  }
  auto pool = std::make_shared<const InstancePool>(std::move(features),
                                                   std::move(labels), num_classes);
  LoadedBags out{pool, {}};
  for (auto& [bag_id, ids] : bag_members) {
    std::vector<std::size_t> members;
    members.reserve(ids.size());
    for (std::size_t id : ids) members.push_back(row_of.at(id));
    out.bags.emplace_back(bag_id, pool, std::move(members));
  }
  return out;
}

}  // namespace llpbag
