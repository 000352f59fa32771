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

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "llpbag/hypergeom.h"
#include "llpbag/proportion.h"
#include "llpbag/rng.h"

namespace llpbag {

// Hidden instance labels are readable only while a LabelAccessScope is alive
// on the current thread. Reads outside a scope are counted so tests can
// assert that the training path never touches them.
class LabelAccessScope {
 public:
  LabelAccessScope();
  ~LabelAccessScope();
  LabelAccessScope(const LabelAccessScope&) = delete;
  LabelAccessScope& operator=(const LabelAccessScope&) = delete;
};

std::size_t UnscopedLabelReads();
void ResetLabelAudit();

// Labeled instances stored row-wise: row i of features() is instance i.
class InstancePool {
 public:
  InstancePool(Eigen::MatrixXd features, std::vector<int> labels,
               std::size_t num_classes);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t num_classes() const { return num_classes_; }
  const Eigen::MatrixXd& features() const { return features_; }

  // Audited; see LabelAccessScope.
  int label(std::size_t i) const;

  // Instances of class c, in pool order.
  std::span<const std::size_t> indices_of_class(std::size_t c) const {
    return by_class_[c];
  }

  // New pool holding rows `indices` (duplicates allowed).
  InstancePool Subset(std::span<const std::size_t> indices) const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  std::size_t num_classes_;
  std::vector<std::vector<std::size_t>> by_class_;
};

// Gaussian class clusters with identity covariance.
struct ClusterModel {
  Eigen::MatrixXd means;  // C x D

  std::size_t num_classes() const { return static_cast<std::size_t>(means.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }

  // `per_class` fresh instances of every class, grouped by class.
  InstancePool SamplePool(std::size_t per_class, Rng& rng) const;
};

struct SyntheticDataset {
  ClusterModel model;
  std::shared_ptr<const InstancePool> pool;
};

// Class means are uniform on the sphere of radius `separation`.
SyntheticDataset GenerateSyntheticDataset(std::size_t num_classes,
                                          std::size_t dim,
                                          std::size_t instances_per_class,
                                          double separation, Rng& rng);

// An original bag: distinct pool members plus their class counts.
class Bag {
 public:
  Bag(std::size_t id, std::shared_ptr<const InstancePool> pool,
      std::vector<std::size_t> members);

  std::size_t id() const { return id_; }
  std::size_t size() const { return members_.size(); }
  std::size_t num_classes() const { return pool_->num_classes(); }
  std::size_t dim() const { return pool_->dim(); }
  const ClassCountVector& class_counts() const { return class_counts_; }
  const ProportionVector& proportion() const { return proportion_; }
  std::span<const std::size_t> members() const { return members_; }
  const InstancePool& pool() const { return *pool_; }

  auto features(std::size_t j) const { return pool_->features().row(members_[j]); }

  // Rows for positions `positions` within this bag.
  Eigen::MatrixXd GatherFeatures(std::span<const std::size_t> positions) const;

  // Audited.
  int true_label(std::size_t j) const { return pool_->label(members_[j]); }

 private:
  std::size_t id_;
  std::shared_ptr<const InstancePool> pool_;
  std::vector<std::size_t> members_;
  ClassCountVector class_counts_;
  ProportionVector proportion_;
};

struct MiniBag {
  std::size_t parent_bag_id = 0;
  std::vector<std::size_t> positions;  // distinct, each < parent size
  std::optional<ProportionVector> supervision;

  std::size_t sample_size() const { return positions.size(); }
};

// Real-valued class proportions for one bag: mean 1/C Gaussian draws,
// clipped at zero and renormalised.
ProportionVector DrawBagProportion(std::size_t num_classes, double sd, Rng& rng);

// Integer counts summing to `total` by largest-remainder rounding; ties go
// to the lower class index.
ClassCountVector LargestRemainderCounts(const ProportionVector& p,
                                        std::int64_t total);

std::vector<Bag> MakeBags(const std::shared_ptr<const InstancePool>& pool,
                          std::size_t num_bags, std::size_t bag_size,
                          double proportion_sd, Rng& rng);

// n distinct positions, uniform without replacement.
MiniBag SampleMiniBag(const Bag& bag, std::size_t n, Rng& rng);

// Eval-only: reads hidden labels.
ProportionVector TrueMiniBagProportion(const Bag& bag, const MiniBag& minibag);

// CSV snapshot: bag_id,instance_id,class_label,f0..f{D-1}. instance_id is the
// pool row, so instances shared between bags keep one id.
void WriteBagsCsv(std::ostream& os, std::span<const Bag> bags);
void WritePoolCsv(std::ostream& os, const InstancePool& pool);

struct LoadedBags {
  std::shared_ptr<const InstancePool> pool;
  std::vector<Bag> bags;
};

// Inverse of WriteBagsCsv. Instance ids are compacted in order of first
// appearance; `num_classes` must cover every label.
LoadedBags ReadBagsCsv(std::istream& is, std::size_t num_classes);

}  // namespace llpbag
