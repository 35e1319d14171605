/*
 * Copyright 2026 The vflcran Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "vflcran/core_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace vflcran {

std::size_t FeaturePartitionedDataset::total_dim() const {
  std::size_t d = 0;
  for (const auto& b : blocks) d += static_cast<std::size_t>(b.cols());
  return d;
}

Mat FeaturePartitionedDataset::Concatenated() const {
  Mat x(static_cast<Eigen::Index>(samples()),
        static_cast<Eigen::Index>(total_dim()));
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    x.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return x;
}

void FeaturePartitionedDataset::Validate() const {
  Require(!blocks.empty(), ErrorCode::kDataset, "dataset has no devices");
  Require(!labels.empty(), ErrorCode::kDataset, "dataset has no samples");
  Require(num_classes >= 2, ErrorCode::kDataset, "need at least two classes");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    Require(blocks[k].rows() == static_cast<Eigen::Index>(labels.size()),
            ErrorCode::kDataset,
            "device block " + std::to_string(k) + " has wrong row count");
    Require(blocks[k].cols() > 0, ErrorCode::kDataset,
            "device block " + std::to_string(k) + " is empty");
  }
  for (int y : labels) {
    Require(y >= 0 && y < num_classes, ErrorCode::kDataset,
            "label out of range: " + std::to_string(y));
  }
}

FeaturePartitionedDataset FeaturePartitionedDataset::FromMatrix(
    const Mat& features, std::vector<int> labels,
    std::span<const std::size_t> dims, int num_classes) {
  Require(features.rows() == static_cast<Eigen::Index>(labels.size()),
          ErrorCode::kDimensionMismatch, "feature rows != label count");
  std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{0});
  Require(total == static_cast<std::size_t>(features.cols()),
          ErrorCode::kDimensionMismatch, "sum of device dims != d");
  FeaturePartitionedDataset out;
  out.num_classes = num_classes;
  out.labels = std::move(labels);
  Eigen::Index col = 0;
  for (std::size_t dk : dims) {
    out.blocks.emplace_back(
        features.middleCols(col, static_cast<Eigen::Index>(dk)));
    col += static_cast<Eigen::Index>(dk);
  }
  out.Validate();
  return out;
}

void LossSpec::Validate() const {
  Require(lambda >= 0.0, ErrorCode::kInvalidArgument, "lambda must be >= 0");
  Require(learning_rate > 0.0, ErrorCode::kInvalidArgument,
          "learning rate must be > 0");
}

int StreamsPerSample(TaskKind task, int num_classes) {
  return task == TaskKind::kBinaryLogistic ? 1 : num_classes;
}

GlobalModel GlobalModel::Zeros(const FeaturePartitionedDataset& data,
                               TaskKind task) {
  GlobalModel m;
  const int s = StreamsPerSample(task, data.num_classes);
  for (const auto& b : data.blocks) m.submodels.push_back(Mat::Zero(b.cols(), s));
  return m;
}

Vec GlobalModel::Flatten() const {
  Eigen::Index n = 0;
  for (const auto& w : submodels) n += w.size();
  Vec out(n);
  Eigen::Index pos = 0;
  for (const auto& w : submodels) {
    out.segment(pos, w.size()) = w.reshaped();
    pos += w.size();
  }
  return out;
}

double LocalPredict(const Eigen::Ref<const Vec>& w_k,
                    const Eigen::Ref<const Vec>& x) {
  Require(w_k.size() == x.size(), ErrorCode::kDimensionMismatch,
          "submodel and feature row differ in length");
  return w_k.dot(x);
}

double AggregatePredictions(std::span<const double> local) {
  return std::accumulate(local.begin(), local.end(), 0.0);
}

double Sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

LossEval LossAndG(double s, int y) {
  // softplus(s) - y s == -y log sigma(s) - (1 - y) log(1 - sigma(s))
  const double softplus = std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s)));
  const double p = Sigmoid(s);
  const double q = Sigmoid(-s);  // 1 - p without cancellation
  LossEval out;
  out.loss = softplus - static_cast<double>(y) * s;
  out.g = y == 1 ? -q : p;
  out.g_prime = p * q;
  return out;
}

double SoftmaxLossAndG(const Eigen::Ref<const Vec>& s, int y, Vec* g,
                       Vec* g_prime) {
  const double mx = s.maxCoeff();
  Vec e = (s.array() - mx).exp();
  const double z = e.sum();
  Vec p = e / z;
  if (g != nullptr) {
    *g = p;
    (*g)(y) -= 1.0;
  }
  if (g_prime != nullptr) *g_prime = p.array() * (1.0 - p.array());
  return mx + std::log(z) - s(y);
}

Vec PartialGradient(double g, const Eigen::Ref<const Vec>& x) { return g * x; }

Mat GdStep(const Mat& w_k, const Mat& avg_gradient, double lambda, double mu) {
  Require(w_k.rows() == avg_gradient.rows() && w_k.cols() == avg_gradient.cols(),
          ErrorCode::kDimensionMismatch, "gradient shape != submodel shape");
  Require(mu > 0.0, ErrorCode::kInvalidArgument, "learning rate must be > 0");
  return w_k - mu * (avg_gradient + lambda * w_k);
}

Mat LocalPredictions(const GlobalModel& model,
                     const FeaturePartitionedDataset& data, std::size_t k) {
  Require(model.submodels.size() == data.devices(),
          ErrorCode::kDimensionMismatch, "model/dataset device count differ");
  Require(model.submodels[k].rows() == data.blocks[k].cols(),
          ErrorCode::kDimensionMismatch, "submodel dim != feature block dim");
  return data.blocks[k] * model.submodels[k];
}

Mat AggregateAll(const GlobalModel& model,
                 const FeaturePartitionedDataset& data) {
  Mat s = LocalPredictions(model, data, 0);
  for (std::size_t k = 1; k < data.devices(); ++k) {
    s += LocalPredictions(model, data, k);
  }
  return s;
}

PredictionBlock Auxiliary(const Mat& s, std::span<const int> labels,
                          TaskKind task) {
  Require(s.rows() == static_cast<Eigen::Index>(labels.size()),
          ErrorCode::kDimensionMismatch, "prediction rows != labels");
  PredictionBlock out;
  out.s = s;
  out.g.resize(s.rows(), s.cols());
  out.g_prime.resize(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (task == TaskKind::kBinaryLogistic) {
      const LossEval e = LossAndG(s(i, 0), labels[static_cast<std::size_t>(i)]);
      out.g(i, 0) = e.g;
      out.g_prime(i, 0) = e.g_prime;
    } else {
      Vec g, gp;
      SoftmaxLossAndG(s.row(i).transpose(), labels[static_cast<std::size_t>(i)],
                      &g, &gp);
      out.g.row(i) = g.transpose();
      out.g_prime.row(i) = gp.transpose();
    }
  }
  return out;
}

Mat AveragedPartialGradient(const Mat& block, const Mat& g) {
  Require(block.rows() == g.rows(), ErrorCode::kDimensionMismatch,
          "feature rows != auxiliary rows");
  return block.transpose() * g / static_cast<double>(block.rows());
}

double GlobalLoss(const GlobalModel& model,
                  const FeaturePartitionedDataset& data, const LossSpec& spec) {
  const Mat s = AggregateAll(model, data);
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const int y = data.labels[static_cast<std::size_t>(i)];
    if (spec.task == TaskKind::kBinaryLogistic) {
      total += LossAndG(s(i, 0), y).loss;
    } else {
      total += SoftmaxLossAndG(s.row(i).transpose(), y, nullptr, nullptr);
    }
  }
  double reg = 0.0;
  for (const auto& w : model.submodels) reg += 0.5 * w.squaredNorm();
  return total / static_cast<double>(s.rows()) + spec.lambda * reg;
}

double Accuracy(const GlobalModel& model,
                const FeaturePartitionedDataset& data, TaskKind task) {
  const Mat s = AggregateAll(model, data);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    int pred = 0;
    if (task == TaskKind::kBinaryLogistic) {
      pred = s(i, 0) > 0.0 ? 1 : 0;
    } else {
      s.row(i).maxCoeff(&pred);
    }
    if (pred == data.labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(s.rows());
}

std::vector<RoundTrace> TrainErrorFree(const FeaturePartitionedDataset& data,
                                       const LossSpec& spec, int rounds,
                                       GlobalModel* model,
                                       const FeaturePartitionedDataset* test) {
  data.Validate();
  spec.Validate();
  Require(rounds >= 0, ErrorCode::kInvalidArgument, "rounds must be >= 0");
  Require(model != nullptr, ErrorCode::kInvalidArgument, "model is null");
  std::vector<RoundTrace> trace;
  trace.reserve(static_cast<std::size_t>(rounds));
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < rounds; ++t) {
    const Mat s = AggregateAll(*model, data);
    const PredictionBlock aux = Auxiliary(s, data.labels, spec.task);
    for (std::size_t k = 0; k < data.devices(); ++k) {
      model->submodels[k] =
          GdStep(model->submodels[k], AveragedPartialGradient(data.blocks[k], aux.g),
                 spec.lambda, spec.learning_rate);
    }
    RoundTrace row;
    row.round = t + 1;
    row.loss = GlobalLoss(*model, data, spec);
    row.accuracy = Accuracy(*model, test != nullptr ? *test : data, spec.task);
    row.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    trace.push_back(row);
  }
  return trace;
}

}  // namespace vflcran
