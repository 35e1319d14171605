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
#ifndef VFLCRAN_AIRCOMP_LINK_HPP_
#define VFLCRAN_AIRCOMP_LINK_HPP_

#include <cstdint>
#include <vector>

#include "vflcran/common.hpp"

namespace vflcran {

// Receive beamformer, fronthaul quantization noise (diagonal of Q_UL, watts),
// power-control factor and zero-forcing transmit scalars.
struct UplinkDesign {
  CVec m;
  Vec q;
  double eta = 0.0;
  CVec b;
};

// Transmit beamformer, diagonal of Q_DL and per-device receive scalars.
struct DownlinkDesign {
  CVec u;
  Vec q;
  CVec b;
};

struct ZeroForcing {
  double eta = 0.0;
  CVec b;
};

// Threshold below which |m^H h_k| counts as orthogonal.
double ZeroForcingThreshold(const CVec& m, const CMat& channels);

// b_k = sqrt(eta) (m^H h_k)^* / |m^H h_k|^2 with eta = P min_k |m^H h_k|^2.
// channels holds h_k as columns.
ZeroForcing ZeroForcingUplink(const CVec& m, const CMat& channels, double p_ul);

// signals is L x K (slot i, device k). Returns the estimates
// Re(m^H y(i)) / sqrt(eta) where y carries AWGN and quantization noise.
Vec UplinkRound(const Mat& signals, const UplinkDesign& design,
                const CMat& channels, double noise_power, std::uint64_t seed);

// (1 / 2 eta) m^H (sigma_z^2 I + Q) m.
double UplinkNoiseVariance(const CVec& m, double eta, const Vec& q,
                           double noise_power);

// log2 det(P sum_k h_k h_k^H + sigma_z^2 I + Q) - log2 det Q.
double UplinkCapacityBits(const CMat& channels, double p_ul, const Vec& q,
                          double noise_power);

// b_k = (h_k^H u)^* / |h_k^H u|^2.
CVec DownlinkReceiveScalars(const CVec& u, const CMat& channels);

// g holds G_i per slot; returns the L x K device estimates
// Re(b_k (h_k^H (u G_i + q(i)) + z_k(i))). The quantization noise q(i) is
// common to all devices in a slot.
Mat DownlinkRound(const Vec& g, const DownlinkDesign& design,
                  const CMat& channels, double noise_power, std::uint64_t seed);

// (|b|^2 / 2) (sigma_z^2 + h^H Q h).
double DownlinkNoiseVariance(cplx b, const CVec& h, const Vec& q,
                             double noise_power);

// log2(1 + u^H Q^{-1} u), equal to log2 det(uu^H + Q) - log2 det Q.
double DownlinkCapacityBits(const CVec& u, const Vec& q);

double DownlinkPower(const CVec& u, const Vec& q);

// Stream normalization. Columns of a block are streams.
enum class NormMode {
  kPerStream,    // each stream zero mean, unit variance
  kSharedScale,  // per-stream offsets, one scale (largest stream std)
};

struct StreamNorm {
  double offset = 0.0;
  double scale = 1.0;
};

struct SignalBlock {
  Mat values;
  std::vector<StreamNorm> norms;
  NormMode mode = NormMode::kPerStream;
  bool constant = false;  // zero variance: passed through unchanged
};

SignalBlock NormalizeBlock(const Mat& raw, NormMode mode);
Mat DenormalizeBlock(const SignalBlock& block);
// Maps a received sum of normalized streams back to the raw sum. Needs the
// shared-scale mode (or a single stream).
Vec DenormalizeSum(const SignalBlock& block, const Vec& received);

}  // namespace vflcran

#endif  // VFLCRAN_AIRCOMP_LINK_HPP_
