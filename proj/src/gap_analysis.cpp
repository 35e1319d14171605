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
#include "vflcran/gap_analysis.hpp"

#include <cmath>
#include <random>

namespace vflcran {

NoiseFactors ComputeNoiseFactors(const FeaturePartitionedDataset& data,
                         const PredictionBlock& block) {
  const auto l = static_cast<Eigen::Index>(data.samples());
  Require(block.g_prime.rows() == l, ErrorCode::kDimensionMismatch,
          "prediction block length differs from sample count");
  const Vec gp2 = block.g_prime.cwiseAbs2().rowwise().sum();
  const auto streams = static_cast<double>(block.g_prime.cols());
  NoiseFactors factors;
  factors.ul_factor.resize(static_cast<Eigen::Index>(data.devices()));
  factors.dl_factor.resize(factors.ul_factor.size());
  for (std::size_t k = 0; k < data.devices(); ++k) {
    const Vec norms = data.blocks[k].rowwise().squaredNorm();
    factors.ul_factor(k) = gp2.dot(norms);
    factors.dl_factor(k) = streams * norms.sum();
  }
  return factors;
}

ConvergenceConstants ContractionConstants(const FeaturePartitionedDataset& data,
                                          double lambda, TaskKind task) {
  Require(data.samples() > 0 && data.devices() > 0, ErrorCode::kInvalidArgument,
          "empty dataset");
  Require(lambda > 0.0, ErrorCode::kInvalidArgument, "lambda must be positive");
  const Mat x = data.Concatenated();
  const Mat gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double curvature = task == TaskKind::kBinaryLogistic ? 4.0 : 2.0;
  ConvergenceConstants c;
  c.alpha = lambda;
  c.beta = top / (curvature * static_cast<double>(data.samples())) + lambda;
  c.rho = 1.0 - c.alpha / c.beta;
  c.mu = 1.0 / c.beta;
  return c;
}

double GapRound::Term() const {
  return sigma2_ul * ul_factor.sum() + dl_factor.dot(sigma2_dl);
}

double GapLedger::Append(GapRound round) {
  Require(round.ul_factor.size() == round.dl_factor.size() &&
              round.dl_factor.size() == round.sigma2_dl.size(),
          ErrorCode::kDimensionMismatch, "gap round sizes differ");
  const double previous = running_.empty() ? 0.0 : running_.back();
  running_.push_back(rho_ * previous + round.Term());
  rounds_.push_back(std::move(round));
  return running_.back();
}

double OptimalityGap(const GapLedger& ledger, double rho, int rounds) {
  Require(rounds >= 0 && static_cast<std::size_t>(rounds) <= ledger.rounds().size(),
          ErrorCode::kInvalidArgument, "ledger does not cover the requested rounds");
  double total = 0.0;
  for (int t = 0; t < rounds; ++t) {
    total += std::pow(rho, rounds - t - 1) * ledger.rounds()[t].Term();
  }
  return total;
}

ConvergenceBound ComputeConvergenceBound(double initial_gap,
                                         const ConvergenceConstants& constants,
                                         double gap_b, std::size_t samples, int rounds) {
  Require(initial_gap >= 0.0 && gap_b >= 0.0 && samples > 0,
          ErrorCode::kInvalidArgument, "bound inputs must be nonnegative");
  const double decay = std::pow(constants.rho, rounds) * initial_gap;
  const double l = static_cast<double>(samples);
  const double unit = gap_b / (2.0 * l * l * constants.beta);
  return {decay + 3.0 * unit, decay + unit};
}

std::vector<double> ActivationNoiseBias(const std::function<double(double)>& g,
                                        double s, const std::vector<double>& sigmas,
                                        int draws, std::uint64_t seed) {
  Require(draws > 0, ErrorCode::kInvalidArgument, "draws must be positive");
  const int pairs = (draws + 1) / 2;
  const double base = g(s);
  std::vector<double> bias;
  bias.reserve(sigmas.size());
  for (std::size_t j = 0; j < sigmas.size(); ++j) {
    Require(sigmas[j] >= 0.0, ErrorCode::kInvalidArgument, "negative sigma");
    std::mt19937_64 rng(DeriveSeed(seed, j));
    std::normal_distribution<double> normal(0.0, 1.0);
    double acc = 0.0;
    for (int i = 0; i < pairs; ++i) {
      const double n = sigmas[j] * normal(rng);
      acc += (g(s + n) - base) + (g(s - n) - base);
    }
    bias.push_back(acc / (2.0 * pairs));
  }
  return bias;
}

NoiseMoment EffectiveNoiseMoment(const FeaturePartitionedDataset& data,
                                 const PredictionBlock& block,
                                 const ChannelState& channels,
                                 const UplinkDesign& uplink,
                                 const DownlinkDesign& downlink, int draws,
                                 std::uint64_t seed) {
  Require(block.g_prime.cols() == 1, ErrorCode::kInvalidArgument,
          "noise moment check runs on the binary task");
  Require(draws > 0, ErrorCode::kInvalidArgument, "draws must be positive");
  const auto l = static_cast<Eigen::Index>(data.samples());
  const auto kc = static_cast<Eigen::Index>(data.devices());
  const Mat zero_signals = Mat::Zero(l, kc);
  const Vec zero_g = Vec::Zero(l);
  const Vec gp = block.g_prime.col(0);

  NoiseMoment out;
  out.monte_carlo = Vec::Zero(kc);
  for (int d = 0; d < draws; ++d) {
    const Vec n_ul = UplinkRound(zero_signals, uplink, channels.uplink,
                                 channels.noise_power, DeriveSeed(seed, d, 0));
    const Mat n_dl = DownlinkRound(zero_g, downlink, channels.downlink,
                                   channels.noise_power, DeriveSeed(seed, d, 1));
    const Vec ul_part = gp.cwiseProduct(n_ul);
    for (Eigen::Index k = 0; k < kc; ++k) {
      const Vec e = data.blocks[k].transpose() * (ul_part + n_dl.col(k)) /
                    static_cast<double>(l);
      out.monte_carlo(k) += e.squaredNorm();
    }
  }
  out.monte_carlo /= static_cast<double>(draws);

  const NoiseFactors factors = ComputeNoiseFactors(data, block);
  const double s2_ul = UplinkNoiseVariance(uplink.m, uplink.eta, uplink.q,
                                           channels.noise_power);
  out.closed_form.resize(kc);
  for (Eigen::Index k = 0; k < kc; ++k) {
    const double s2_dl = DownlinkNoiseVariance(
        downlink.b(k), channels.downlink.col(k), downlink.q, channels.noise_power);
    out.closed_form(k) = (factors.ul_factor(k) * s2_ul + factors.dl_factor(k) * s2_dl) /
                         static_cast<double>(l * l);
  }
  return out;
}

double SolveOptimum(const FeaturePartitionedDataset& data, const LossSpec& spec,
                    GlobalModel* optimum, double tolerance, int max_iterations) {
  data.Validate();
  spec.Validate();
  const ConvergenceConstants c = ContractionConstants(data, spec.lambda, spec.task);
  GlobalModel model = GlobalModel::Zeros(data, spec.task);
  bool converged = false;
  for (int it = 0; it < max_iterations; ++it) {
    const PredictionBlock aux = Auxiliary(AggregateAll(model, data), data.labels, spec.task);
    double norm2 = 0.0;
    std::vector<Mat> grads(data.devices());
    for (std::size_t k = 0; k < data.devices(); ++k) {
      grads[k] = AveragedPartialGradient(data.blocks[k], aux.g) +
                 spec.lambda * model.submodels[k];
      norm2 += grads[k].squaredNorm();
    }
    if (std::sqrt(norm2) < tolerance) {
      converged = true;
      break;
    }
    for (std::size_t k = 0; k < data.devices(); ++k) {
      model.submodels[k] -= c.mu * grads[k];
    }
  }
  Require(converged, ErrorCode::kNumerical, "optimum search did not converge");
  const double value = GlobalLoss(model, data, spec);
  if (optimum != nullptr) *optimum = std::move(model);
  return value;
}

}  // namespace vflcran
