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
#include <span>
#include <vector>

#include "llpbag/proportion.h"
#include "llpbag/rng.h"

namespace llpbag {

// Input dimension, hidden width (0 = softmax regression) and class count.
struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::size_t num_classes = 0;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// affine -> ReLU -> affine -> softmax. With hidden == 0 the first layer is
// absent and `out_w` maps inputs directly to logits.
template <typename Tag>
struct LayerTensors {
  Eigen::MatrixXd hidden_w;  // H x D
  Eigen::VectorXd hidden_b;  // H
  Eigen::MatrixXd out_w;     // C x H (or C x D)
  Eigen::VectorXd out_b;     // C

  static LayerTensors Zeros(const ModelShape& shape);

  ModelShape shape() const;
  std::size_t size() const;
  bool AllFinite() const;

  // Flat order: hidden_w (column-major), hidden_b, out_w, out_b.
  Eigen::VectorXd Flatten() const;
  static LayerTensors Unflatten(const ModelShape& shape,
                                const Eigen::VectorXd& flat);

  LayerTensors& operator*=(double s);
  LayerTensors& operator+=(const LayerTensors& other);

  friend bool operator==(const LayerTensors& a, const LayerTensors& b) {
    return a.hidden_w == b.hidden_w && a.hidden_b == b.hidden_b &&
           a.out_w == b.out_w && a.out_b == b.out_b;
  }
};

struct ParamsTag {};
struct GradientTag {};
using ClassifierParams = LayerTensors<ParamsTag>;
using GradientBundle = LayerTensors<GradientTag>;

extern template struct LayerTensors<ParamsTag>;
extern template struct LayerTensors<GradientTag>;

// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ClassifierParams InitParams(const ModelShape& shape, Rng& rng);

// Row-wise logits / softmax confidences for an n x D feature matrix.
Eigen::MatrixXd Logits(const ClassifierParams& params,
                       const Eigen::MatrixXd& features);
Eigen::MatrixXd Confidences(const ClassifierParams& params,
                            const Eigen::MatrixXd& features);

// Per-class confidence for one instance.
ProportionVector Forward(const ClassifierParams& params,
                         std::span<const double> features);

// One mini-bag of a training batch.
struct BatchEntry {
  Eigen::MatrixXd features;  // n x D
  ProportionVector target;
  double weight = 1.0;
};

struct LossAndGradient {
  double loss = 0.0;
  GradientBundle gradient;
};

// Value and exact gradient of sum_i w_i * ProportionLoss(mean softmax over
// entry i, target_i).
LossAndGradient BatchGradient(const ClassifierParams& params,
                              std::span<const BatchEntry> batch);

// Loss only; the same quantity BatchGradient returns.
double BatchLoss(const ClassifierParams& params,
                 std::span<const BatchEntry> batch);

// params - learning_rate * grads.
ClassifierParams SgdStep(const ClassifierParams& params,
                         const GradientBundle& grads, double learning_rate);

// Heavy-ball SGD: v <- momentum * v + g; params <- params - lr * v.
// momentum == 0 is plain gradient descent.
class SgdOptimizer {
 public:
  SgdOptimizer(double learning_rate, double momentum);

  void Step(ClassifierParams& params, const GradientBundle& grads);

 private:
  double learning_rate_;
  double momentum_;
  GradientBundle velocity_;
  bool has_velocity_ = false;
};

struct CheckpointHeader {
  ModelShape shape;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

// Text checkpoint: header lines then one line per matrix row in %.17g.
void WriteCheckpoint(std::ostream& os, const ClassifierParams& params,
                     const CheckpointHeader& header);
ClassifierParams ReadCheckpoint(std::istream& is, CheckpointHeader* header);

}  // namespace llpbag
