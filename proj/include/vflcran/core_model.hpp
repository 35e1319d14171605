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
#ifndef VFLCRAN_CORE_MODEL_HPP_
#define VFLCRAN_CORE_MODEL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "vflcran/common.hpp"

namespace vflcran {

// Samples split column-wise across K devices; labels stay with the server.
// blocks[k] is L x d_k. Binary tasks use labels in {0, 1}; multiclass tasks
// use labels in [0, num_classes).
struct FeaturePartitionedDataset {
  std::vector<Mat> blocks;
  std::vector<int> labels;
  int num_classes = 2;

  std::size_t samples() const { return labels.size(); }
  std::size_t devices() const { return blocks.size(); }
  std::size_t dim(std::size_t k) const {
    return static_cast<std::size_t>(blocks[k].cols());
  }
  std::size_t total_dim() const;
  // Full L x d design matrix, device blocks in ascending order.
  Mat Concatenated() const;
  void Validate() const;

  static FeaturePartitionedDataset FromMatrix(const Mat& features,
                                              std::vector<int> labels,
                                              std::span<const std::size_t> dims,
                                              int num_classes = 2);
};

enum class TaskKind { kBinaryLogistic, kSoftmax };

struct LossSpec {
  TaskKind task = TaskKind::kBinaryLogistic;
  double lambda = 0.01;         // weight of r_k(w) = 0.5 |w_k|^2
  double learning_rate = 0.01;

  void Validate() const;
};

// Number of scalar streams per sample: 1 for binary, num_classes otherwise.
int StreamsPerSample(TaskKind task, int num_classes);

// Submodels are d_k x S; S = 1 for binary logistic regression.
struct GlobalModel {
  std::vector<Mat> submodels;

  static GlobalModel Zeros(const FeaturePartitionedDataset& data,
                           TaskKind task);
  // Stacks [w_1; ...; w_K] column by column.
  Vec Flatten() const;
};

// Per-sample aggregate predictions s(i) with G_i(s) and G'_i(s); L x S.
struct PredictionBlock {
  Mat s;
  Mat g;
  Mat g_prime;
};

struct LossEval {
  double loss = 0.0;
  double g = 0.0;
  double g_prime = 0.0;
};

struct RoundTrace {
  int round = 0;  // number of completed rounds
  double loss = 0.0;
  double accuracy = 0.0;
  double sigma2_ul = 0.0;
  double mean_sigma2_dl = 0.0;
  double gap = 0.0;  // B(t)
  double wall_seconds = 0.0;
};

double LocalPredict(const Eigen::Ref<const Vec>& w_k,
                    const Eigen::Ref<const Vec>& x);
double AggregatePredictions(std::span<const double> local);

// Binary cross-entropy with sigmoid link; y in {0, 1}.
LossEval LossAndG(double s, int y);
double Sigmoid(double s);

// Multiclass: loss, G = softmax(s) - onehot(y), G' = p (1 - p) per class.
double SoftmaxLossAndG(const Eigen::Ref<const Vec>& s, int y, Vec* g,
                       Vec* g_prime);

Vec PartialGradient(double g, const Eigen::Ref<const Vec>& x);
Mat GdStep(const Mat& w_k, const Mat& avg_gradient, double lambda, double mu);

// L x S local outputs g_k(w_k, x_{i,k}) of device k.
Mat LocalPredictions(const GlobalModel& model,
                     const FeaturePartitionedDataset& data, std::size_t k);
// L x S aggregate sum over devices.
Mat AggregateAll(const GlobalModel& model,
                 const FeaturePartitionedDataset& data);
PredictionBlock Auxiliary(const Mat& s, std::span<const int> labels,
                          TaskKind task);

// (1/L) X_k^T G; G is the (possibly noisy) L x S auxiliary block.
Mat AveragedPartialGradient(const Mat& block, const Mat& g);

double GlobalLoss(const GlobalModel& model,
                  const FeaturePartitionedDataset& data, const LossSpec& spec);
double Accuracy(const GlobalModel& model,
                const FeaturePartitionedDataset& data, TaskKind task);

// Vertical FL training with perfect links. The trace has one row per completed round.
std::vector<RoundTrace> TrainErrorFree(
    const FeaturePartitionedDataset& data, const LossSpec& spec, int rounds,
    GlobalModel* model, const FeaturePartitionedDataset* test = nullptr);

}  // namespace vflcran

#endif  // VFLCRAN_CORE_MODEL_HPP_
