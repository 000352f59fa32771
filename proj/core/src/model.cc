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

#include "llpbag/model.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "llpbag/errors.h"
#include "llpbag/losses.h"
#include "llpbag/text_io.h"

namespace llpbag {

template <typename Tag>
LayerTensors<Tag> LayerTensors<Tag>::Zeros(const ModelShape& shape) {
  const auto D = static_cast<Eigen::Index>(shape.input_dim);
  const auto H = static_cast<Eigen::Index>(shape.hidden);
  const auto C = static_cast<Eigen::Index>(shape.num_classes);
  LayerTensors t;
  t.hidden_w = Eigen::MatrixXd::Zero(H, H > 0 ? D : 0);
  t.hidden_b = Eigen::VectorXd::Zero(H);
  t.out_w = Eigen::MatrixXd::Zero(C, H > 0 ? H : D);
  t.out_b = Eigen::VectorXd::Zero(C);
  return t;
}

template <typename Tag>
ModelShape LayerTensors<Tag>::shape() const {
  const bool has_hidden = hidden_w.rows() > 0;
  return ModelShape{
      static_cast<std::size_t>(has_hidden ? hidden_w.cols() : out_w.cols()),
      static_cast<std::size_t>(hidden_w.rows()),
      static_cast<std::size_t>(out_w.rows())};
}

template <typename Tag>
std::size_t LayerTensors<Tag>::size() const {
  return static_cast<std::size_t>(hidden_w.size() + hidden_b.size() +
                                  out_w.size() + out_b.size());
}

template <typename Tag>
bool LayerTensors<Tag>::AllFinite() const {
  return hidden_w.allFinite() && hidden_b.allFinite() && out_w.allFinite() &&
         out_b.allFinite();
}

template <typename Tag>
Eigen::VectorXd LayerTensors<Tag>::Flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(size()));
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    flat.segment(at, m.size()) = m.reshaped();
    at += m.size();
  };
  put(hidden_w);
  put(hidden_b);
  put(out_w);
  put(out_b);
  return flat;
}

template <typename Tag>
LayerTensors<Tag> LayerTensors<Tag>::Unflatten(const ModelShape& shape,
                                               const Eigen::VectorXd& flat) {
  LayerTensors t = Zeros(shape);
  if (static_cast<std::size_t>(flat.size()) != t.size()) {
    throw DimensionError("flat parameter vector has wrong length");
  }
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    m.reshaped() = flat.segment(at, m.size());
    at += m.size();
  };
  take(t.hidden_w);
  take(t.hidden_b);
  take(t.out_w);
  take(t.out_b);
  return t;
}

template <typename Tag>
LayerTensors<Tag>& LayerTensors<Tag>::operator*=(double s) {
  hidden_w *= s;
  hidden_b *= s;
  out_w *= s;
  out_b *= s;
  return *this;
}

template <typename Tag>
LayerTensors<Tag>& LayerTensors<Tag>::operator+=(const LayerTensors& other) {
  if (!(shape() == other.shape())) throw DimensionError("tensor shapes differ");
  hidden_w += other.hidden_w;
  hidden_b += other.hidden_b;
  out_w += other.out_w;
  out_b += other.out_b;
  return *this;
}

template struct LayerTensors<ParamsTag>;
template struct LayerTensors<GradientTag>;

// ---------------------------------------------------------------------------

ClassifierParams InitParams(const ModelShape& shape, Rng& rng) {
  if (shape.input_dim == 0 || shape.num_classes == 0) {
    throw ArgumentError("model needs positive input dim and class count");
  }
  ClassifierParams p = ClassifierParams::Zeros(shape);
  auto fill = [&rng](auto& m, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  };
  if (shape.hidden > 0) {
    fill(p.hidden_w, shape.input_dim);
    fill(p.hidden_b, shape.input_dim);
    fill(p.out_w, shape.hidden);
    fill(p.out_b, shape.hidden);
  } else {
    fill(p.out_w, shape.input_dim);
    fill(p.out_b, shape.input_dim);
  }
  return p;
}

namespace {

void CheckInputDim(const ClassifierParams& params, Eigen::Index cols) {
  if (static_cast<std::size_t>(cols) != params.shape().input_dim) {
    throw DimensionError("feature dimension " + std::to_string(cols) +
                         " does not match model input " +
                         std::to_string(params.shape().input_dim));
  }
}

// Hidden activations (ReLU) and their pre-activations.
struct HiddenPass {
  Eigen::MatrixXd pre;
  Eigen::MatrixXd act;
};

HiddenPass RunHidden(const ClassifierParams& params, const Eigen::MatrixXd& x) {
  HiddenPass h;
  h.pre = (x * params.hidden_w.transpose()).rowwise() +
          params.hidden_b.transpose();
  h.act = h.pre.cwiseMax(0.0);
  return h;
}

void SoftmaxRowsInPlace(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

}  // namespace

Eigen::MatrixXd Logits(const ClassifierParams& params,
                       const Eigen::MatrixXd& features) {
  CheckInputDim(params, features.cols());
  if (params.hidden_w.rows() == 0) {
    return (features * params.out_w.transpose()).rowwise() +
           params.out_b.transpose();
  }
  const HiddenPass h = RunHidden(params, features);
  return (h.act * params.out_w.transpose()).rowwise() + params.out_b.transpose();
}

Eigen::MatrixXd Confidences(const ClassifierParams& params,
                            const Eigen::MatrixXd& features) {
  Eigen::MatrixXd z = Logits(params, features);
  SoftmaxRowsInPlace(z);
  return z;
}

ProportionVector Forward(const ClassifierParams& params,
                         std::span<const double> features) {
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t d = 0; d < features.size(); ++d) {
    x(0, static_cast<Eigen::Index>(d)) = features[d];
  }
  const Eigen::MatrixXd f = Confidences(params, x);
  return ProportionVector(std::vector<double>(f.data(), f.data() + f.size()));
}

namespace {

// Gradient of -w * sum_c q_c ln(clamp(pbar_c)) with respect to pbar.
Eigen::RowVectorXd LossGradWrtMean(const Eigen::RowVectorXd& pbar,
                                   const ProportionVector& target,
                                   double weight, double* loss) {
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(pbar.size());
  double l = 0.0;
  for (Eigen::Index c = 0; c < pbar.size(); ++c) {
    const double q = target[static_cast<std::size_t>(c)];
    if (q == 0.0) continue;
    const double p = pbar(c);
    if (p > kLogClamp) {
      l -= q * std::log(p);
      g(c) = -weight * q / p;
    } else {
      l -= q * std::log(kLogClamp);
    }
  }
  *loss = weight * l;
  return g;
}

void CheckBatch(const ClassifierParams& params,
                std::span<const BatchEntry> batch) {
  if (batch.empty()) throw ArgumentError("empty batch");
  const std::size_t C = params.shape().num_classes;
  for (const BatchEntry& e : batch) {
    if (e.features.rows() == 0) throw ArgumentError("empty mini-bag in batch");
    CheckInputDim(params, e.features.cols());
    if (e.target.num_classes() != C) {
      throw DimensionError("target length does not match class count");
    }
  }
}

}  // namespace

LossAndGradient BatchGradient(const ClassifierParams& params,
                              std::span<const BatchEntry> batch) {
  CheckBatch(params, batch);
  const bool has_hidden = params.hidden_w.rows() > 0;
  LossAndGradient out{0.0, GradientBundle::Zeros(params.shape())};
  for (const BatchEntry& e : batch) {
    const Eigen::MatrixXd& x = e.features;
    const auto n = static_cast<double>(x.rows());
    HiddenPass h;
    Eigen::MatrixXd f;
    if (has_hidden) {
      h = RunHidden(params, x);
      f = (h.act * params.out_w.transpose()).rowwise() + params.out_b.transpose();
    } else {
      f = (x * params.out_w.transpose()).rowwise() + params.out_b.transpose();
    }
    SoftmaxRowsInPlace(f);

    const Eigen::RowVectorXd pbar = f.colwise().mean();
    double loss = 0.0;
    const Eigen::RowVectorXd g = LossGradWrtMean(pbar, e.target, e.weight, &loss);
    out.loss += loss;

    // dL/df_j = g / n for every instance; back through softmax:
    // dz_j = f_j * (dL/df_j - <dL/df_j, f_j>).
    const Eigen::VectorXd inner = (f * g.transpose()) / n;
    Eigen::MatrixXd dz = f.array() * ((Eigen::MatrixXd::Ones(f.rows(), 1) * g / n)
                                          .colwise() - inner).array();
    const Eigen::MatrixXd& prev = has_hidden ? h.act : x;
    out.gradient.out_w.noalias() += dz.transpose() * prev;
    out.gradient.out_b += dz.colwise().sum().transpose();
    if (has_hidden) {
      Eigen::MatrixXd da = dz * params.out_w;
      da.array() *= (h.pre.array() > 0.0).cast<double>();
      out.gradient.hidden_w.noalias() += da.transpose() * x;
      out.gradient.hidden_b += da.colwise().sum().transpose();
    }
  }
  return out;
}

double BatchLoss(const ClassifierParams& params,
                 std::span<const BatchEntry> batch) {
  CheckBatch(params, batch);
  double total = 0.0;
  for (const BatchEntry& e : batch) {
    const ProportionVector pbar = PredictBagProportion(Confidences(params, e.features));
    total += e.weight * ProportionLoss(pbar, e.target);
  }
  return total;
}

ClassifierParams SgdStep(const ClassifierParams& params,
                         const GradientBundle& grads, double learning_rate) {
  if (!(params.shape() == grads.shape())) {
    throw DimensionError("gradient shape does not match parameters");
  }
  ClassifierParams next = params;
  next.hidden_w -= learning_rate * grads.hidden_w;
  next.hidden_b -= learning_rate * grads.hidden_b;
  next.out_w -= learning_rate * grads.out_w;
  next.out_b -= learning_rate * grads.out_b;
  return next;
}

SgdOptimizer::SgdOptimizer(double learning_rate, double momentum)
    : learning_rate_(learning_rate), momentum_(momentum) {
  if (!(learning_rate >= 0.0)) throw ArgumentError("learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ArgumentError("momentum must lie in [0, 1)");
  }
}

void SgdOptimizer::Step(ClassifierParams& params, const GradientBundle& grads) {
  if (momentum_ == 0.0) {
    params = SgdStep(params, grads, learning_rate_);
    return;
  }
  if (!has_velocity_) {
    velocity_ = GradientBundle::Zeros(params.shape());
    has_velocity_ = true;
  }
  velocity_ *= momentum_;
  velocity_ += grads;
  params = SgdStep(params, velocity_, learning_rate_);
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCheckpointMagic = "llpbag-checkpoint 1";

void WriteMatrixRows(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ' ';
      os << FormatDouble17(m(r, c));
    }
    os << '\n';
  }
}

void ReadMatrixRows(std::istream& is, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("checkpoint truncated");
    const auto fields = SplitFields(Trim(line), ' ');
    if (static_cast<Eigen::Index>(fields.size()) != m.cols()) {
      throw DataError("checkpoint row has wrong width");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = ParseDouble(fields[static_cast<std::size_t>(c)]);
    }
  }
}

std::uint64_t ReadHeaderField(std::istream& is, std::string_view key) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("checkpoint header truncated");
  const auto fields = SplitFields(Trim(line), ' ');
  if (fields.size() != 2 || fields[0] != key) {
    throw DataError("expected checkpoint field '" + std::string(key) + "'");
  }
  return ParseUnsigned(fields[1]);
}

}  // namespace

void WriteCheckpoint(std::ostream& os, const ClassifierParams& params,
                     const CheckpointHeader& header) {
  const ModelShape s = params.shape();
  os << kCheckpointMagic << '\n'
     << "input_dim " << s.input_dim << '\n'
     << "hidden " << s.hidden << '\n'
     << "classes " << s.num_classes << '\n'
     << "seed " << header.seed << '\n'
     << "epoch " << header.epoch << '\n';
  // Biases are written as single-column matrices, one value per line.
  WriteMatrixRows(os, params.hidden_w);
  WriteMatrixRows(os, params.hidden_b);
  WriteMatrixRows(os, params.out_w);
  WriteMatrixRows(os, params.out_b);
}

ClassifierParams ReadCheckpoint(std::istream& is, CheckpointHeader* header) {
  std::string line;
  if (!std::getline(is, line) || Trim(line) != kCheckpointMagic) {
    throw DataError("not an llpbag checkpoint");
  }
  CheckpointHeader h;
  h.shape.input_dim = ReadHeaderField(is, "input_dim");
  h.shape.hidden = ReadHeaderField(is, "hidden");
  h.shape.num_classes = ReadHeaderField(is, "classes");
  h.seed = ReadHeaderField(is, "seed");
  h.epoch = ReadHeaderField(is, "epoch");
  ClassifierParams p = ClassifierParams::Zeros(h.shape);
  ReadMatrixRows(is, p.hidden_w);
  Eigen::MatrixXd hb(p.hidden_b.size(), 1);
  ReadMatrixRows(is, hb);
  p.hidden_b = hb.col(0);
  ReadMatrixRows(is, p.out_w);
  Eigen::MatrixXd ob(p.out_b.size(), 1);
  ReadMatrixRows(is, ob);
  p.out_b = ob.col(0);
  if (header != nullptr) *header = h;
  return p;
}

}  // namespace llpbag
