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
#ifndef VFLCRAN_GAP_ANALYSIS_HPP_
#define VFLCRAN_GAP_ANALYSIS_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "vflcran/aircomp_link.hpp"
#include "vflcran/channel.hpp"
#include "vflcran/core_model.hpp"

namespace vflcran {

// Per-device data factors of the gap:
//   ul_factor_k = sum_i G'_i(s(i))^2 |x_{i,k}|^2,   dl_factor_k = sum_i |x_{i,k}|^2.
// Multiclass blocks sum over the class streams.
struct NoiseFactors {
  Vec ul_factor;
  Vec dl_factor;
};

NoiseFactors ComputeNoiseFactors(const FeaturePartitionedDataset& data,
                         const PredictionBlock& block);

struct ConvergenceConstants {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double mu = 0.0;  // 1 / beta
};

// beta = lambda_max(X^T X) / (4L) + lambda for the logistic task (/(2L) for
// softmax), alpha = lambda.
ConvergenceConstants ContractionConstants(const FeaturePartitionedDataset& data,
                                          double lambda,
                                          TaskKind task = TaskKind::kBinaryLogistic);

struct GapRound {
  double sigma2_ul = 0.0;
  Vec sigma2_dl;  // per device
  Vec ul_factor;
  Vec dl_factor;

  // sum_k ul_factor_k sigma2_ul + dl_factor_k sigma2_dl_k
  double Term() const;
};

class GapLedger {
 public:
  explicit GapLedger(double rho) : rho_(rho) {}

  // Appends a round and returns B(t + 1) = rho B(t) + term(t).
  double Append(GapRound round);

  const std::vector<GapRound>& rounds() const { return rounds_; }
  const std::vector<double>& running() const { return running_; }
  double rho() const { return rho_; }

 private:
  double rho_;
  std::vector<GapRound> rounds_;
  std::vector<double> running_;
};

// B(T) = sum_{t<T} rho^{T-t-1} term(t), evaluated directly.
double OptimalityGap(const GapLedger& ledger, double rho, int rounds);

// rho^T (F(w0) - F*) + c / (2 L^2 beta) B(T), reported for both constants
// that appear in the derivation.
struct ConvergenceBound {
  double loose = 0.0;  // c = 3
  double tight = 0.0;  // c = 1
};

ConvergenceBound ComputeConvergenceBound(double initial_gap,
                                         const ConvergenceConstants& constants,
                                         double gap_b, std::size_t samples, int rounds);

// Bias E[G(s + n)] - G(s) with n ~ N(0, sigma^2), one entry per sigma.
// Antithetic pairs (n, -n) are used, so draws is rounded up to even.
std::vector<double> ActivationNoiseBias(const std::function<double(double)>& g,
                                        double s, const std::vector<double>& sigmas,
                                        int draws, std::uint64_t seed);

struct NoiseMoment {
  Vec monte_carlo;  // per device
  Vec closed_form;  // (ul_factor sigma2_ul + dl_factor sigma2_dl_k) / L^2
};

// Second moment of the linearized gradient error
//   e_k = (1/L) sum_i (G'_i n_UL(i) + n_DL,k(i)) x_{i,k}
// with both noises drawn from the simulated links. Binary task only.
NoiseMoment EffectiveNoiseMoment(const FeaturePartitionedDataset& data,
                                 const PredictionBlock& block,
                                 const ChannelState& channels,
                                 const UplinkDesign& uplink,
                                 const DownlinkDesign& downlink, int draws,
                                 std::uint64_t seed);

// Minimizer of F by gradient descent with step 1/beta until the gradient norm
// is below tolerance. Returns F*.
double SolveOptimum(const FeaturePartitionedDataset& data, const LossSpec& spec,
                    GlobalModel* optimum = nullptr, double tolerance = 1e-10,
                    int max_iterations = 2000000);

}  // namespace vflcran

#endif  // VFLCRAN_GAP_ANALYSIS_HPP_
