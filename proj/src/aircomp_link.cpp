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
#include "vflcran/aircomp_link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vflcran/convex_kernel.hpp"

namespace vflcran {

namespace {

constexpr double kZfRelative = 1e-12;

void CheckQ(const Vec& q, Eigen::Index n) {
  Require(q.size() == n, ErrorCode::kDimensionMismatch,
          "quantization covariance has the wrong length");
  Require((q.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
          "quantization noise must be nonnegative");
}

}  // namespace

double ZeroForcingThreshold(const CVec& m, const CMat& channels) {
  return kZfRelative * m.norm() * channels.colwise().norm().maxCoeff();
}

ZeroForcing ZeroForcingUplink(const CVec& m, const CMat& channels, double p_ul) {
  Require(m.size() == channels.rows(), ErrorCode::kDimensionMismatch,
          "beamformer and channel lengths differ");
  Require(channels.cols() > 0, ErrorCode::kInvalidArgument, "no devices");
  Require(p_ul > 0.0, ErrorCode::kInvalidArgument, "uplink power must be positive");
  const double eps = ZeroForcingThreshold(m, channels);
  const CVec gains = channels.adjoint() * m;  // (h_k^H m) = (m^H h_k)^*
  double min_gain = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < gains.size(); ++k) {
    const double mag = std::abs(gains(k));
    Require(mag > eps && mag > 0.0, ErrorCode::kDegenerate,
            "beamformer is orthogonal to device " + std::to_string(k));
    min_gain = std::min(min_gain, mag * mag);
  }
  ZeroForcing zf;
  zf.eta = p_ul * min_gain;
  zf.b.resize(gains.size());
  const double root = std::sqrt(zf.eta);
  for (Eigen::Index k = 0; k < gains.size(); ++k) {
    // (m^H h_k)^* = h_k^H m
    zf.b(k) = root * gains(k) / std::norm(gains(k));
  }
  return zf;
}

Vec UplinkRound(const Mat& signals, const UplinkDesign& design,
                const CMat& channels, double noise_power, std::uint64_t seed) {
  const Eigen::Index n = channels.rows();
  Require(signals.cols() == channels.cols() && design.b.size() == channels.cols(),
          ErrorCode::kDimensionMismatch, "signal/device count mismatch");
  Require(design.m.size() == n, ErrorCode::kDimensionMismatch,
          "beamformer length");
  CheckQ(design.q, n);
  Require(design.eta > 0.0, ErrorCode::kInvalidArgument, "eta must be positive");

  // Noiseless part: Re(m^H H diag(b) s) / sqrt(eta).
  const CVec effective =
      (design.m.adjoint() * channels * design.b.asDiagonal()).transpose();
  const double inv_root = 1.0 / std::sqrt(design.eta);
  Vec out = (signals * effective.real()) * inv_root;

  const Vec z_std = Vec::Constant(n, std::sqrt(0.5 * noise_power));
  const Vec q_std = (0.5 * design.q).cwiseSqrt();
  const bool noisy = noise_power > 0.0 || design.q.maxCoeff() > 0.0;
  if (!noisy) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const CVec mc = design.m.conjugate();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double zr = z_std(j) * normal(rng);
      const double zi = z_std(j) * normal(rng);
      const double qr = q_std(j) * normal(rng);
      const double qi = q_std(j) * normal(rng);
      // Re(conj(m_j) * w_j)
      acc += mc(j).real() * (zr + qr) - mc(j).imag() * (zi + qi);
    }
    out(i) += acc * inv_root;
  }
  return out;
}

double UplinkNoiseVariance(const CVec& m, double eta, const Vec& q,
                           double noise_power) {
  Require(eta > 0.0, ErrorCode::kInvalidArgument, "eta must be positive");
  CheckQ(q, m.size());
  return (m.cwiseAbs2().array() * (noise_power + q.array())).sum() / (2.0 * eta);
}

double UplinkCapacityBits(const CMat& channels, double p_ul, const Vec& q,
                          double noise_power) {
  const Eigen::Index n = channels.rows();
  CheckQ(q, n);
  Require((q.array() > 0.0).all(), ErrorCode::kDegenerate,
          "quantization covariance must be positive definite");
  CMat a = p_ul * channels * channels.adjoint();
  a.diagonal().array() += noise_power + q.array().cast<cplx>();
  return (kernel::PdLogDet(a) - q.array().log().sum()) / std::log(2.0);
}

CVec DownlinkReceiveScalars(const CVec& u, const CMat& channels) {
  Require(u.size() == channels.rows(), ErrorCode::kDimensionMismatch,
          "beamformer and channel lengths differ");
  const double eps = ZeroForcingThreshold(u, channels);
  const CVec prod = channels.adjoint() * u;  // h_k^H u
  CVec b(prod.size());
  for (Eigen::Index k = 0; k < prod.size(); ++k) {
    const double mag = std::abs(prod(k));
    Require(mag > eps && mag > 0.0, ErrorCode::kDegenerate,
            "beamformer is orthogonal to device " + std::to_string(k));
    b(k) = std::conj(prod(k)) / std::norm(prod(k));
  }
  return b;
}

Mat DownlinkRound(const Vec& g, const DownlinkDesign& design,
                  const CMat& channels, double noise_power, std::uint64_t seed) {
  const Eigen::Index n = channels.rows();
  const Eigen::Index kc = channels.cols();
  Require(design.u.size() == n, ErrorCode::kDimensionMismatch, "beamformer length");
  Require(design.b.size() == kc, ErrorCode::kDimensionMismatch,
          "receive scalar count");
  CheckQ(design.q, n);
  const CVec prod = channels.adjoint() * design.u;
  Vec gain(kc);
  for (Eigen::Index k = 0; k < kc; ++k) gain(k) = (design.b(k) * prod(k)).real();
  Mat out = g * gain.transpose();

  const bool noisy = noise_power > 0.0 || design.q.maxCoeff() > 0.0;
  if (!noisy) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec q_std = (0.5 * design.q).cwiseSqrt();
  const double z_std = std::sqrt(0.5 * noise_power);
  // b_k h_k^H, applied to the fronthaul noise vector.
  const CMat bh = design.b.asDiagonal() * channels.adjoint();
  CVec qn(n);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = q_std(j) * normal(rng);
      const double im = q_std(j) * normal(rng);
      qn(j) = cplx(re, im);
    }
    const CVec through = bh * qn;
    for (Eigen::Index k = 0; k < kc; ++k) {
      const double zr = z_std * normal(rng);
      const double zi = z_std * normal(rng);
      const cplx bz = design.b(k) * cplx(zr, zi);
      out(i, k) += through(k).real() + bz.real();
    }
  }
  return out;
}

double DownlinkNoiseVariance(cplx b, const CVec& h, const Vec& q,
                             double noise_power) {
  CheckQ(q, h.size());
  return 0.5 * std::norm(b) * (noise_power + h.cwiseAbs2().dot(q));
}

double DownlinkCapacityBits(const CVec& u, const Vec& q) {
  CheckQ(q, u.size());
  Require((q.array() > 0.0).all(), ErrorCode::kDegenerate,
          "quantization covariance must be positive definite");
  return std::log2(1.0 + (u.cwiseAbs2().array() / q.array()).sum());
}

double DownlinkPower(const CVec& u, const Vec& q) {
  return u.squaredNorm() + q.sum();
}

SignalBlock NormalizeBlock(const Mat& raw, NormMode mode) {
  SignalBlock block;
  block.mode = mode;
  block.values = raw;
  const Eigen::Index s = raw.cols();
  block.norms.assign(static_cast<std::size_t>(s), StreamNorm{});
  if (raw.rows() == 0) {
    block.constant = true;
    return block;
  }
  Vec mean = raw.colwise().mean();
  Vec std_dev(s);
  for (Eigen::Index c = 0; c < s; ++c) {
    std_dev(c) = std::sqrt((raw.col(c).array() - mean(c)).square().mean());
  }
  if (mode == NormMode::kPerStream) {
    bool any = false;
    for (Eigen::Index c = 0; c < s; ++c) {
      if (!(std_dev(c) > 0.0)) continue;  // constant stream passes through
      any = true;
      block.norms[c] = {mean(c), std_dev(c)};
      block.values.col(c) = (raw.col(c).array() - mean(c)) / std_dev(c);
    }
    block.constant = !any;
    return block;
  }
  const double scale = s > 0 ? std_dev.maxCoeff() : 0.0;
  if (!(scale > 0.0)) {
    block.constant = true;
    return block;
  }
  for (Eigen::Index c = 0; c < s; ++c) {
    block.norms[c] = {mean(c), scale};
    block.values.col(c) = (raw.col(c).array() - mean(c)) / scale;
  }
  return block;
}

Mat DenormalizeBlock(const SignalBlock& block) {
  Mat out = block.values;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const StreamNorm& nm = block.norms[static_cast<std::size_t>(c)];
    out.col(c) = (out.col(c).array() * nm.scale + nm.offset).matrix();
  }
  return out;
}

Vec DenormalizeSum(const SignalBlock& block, const Vec& received) {
  if (block.norms.empty()) return received;
  const double scale = block.norms.front().scale;
  double offset = 0.0;
  for (const StreamNorm& nm : block.norms) {
    Require(nm.scale == scale, ErrorCode::kInvalidArgument,
            "summed streams need a shared scale");
    offset += nm.offset;
  }
  return (received.array() * scale + offset).matrix();
}

}  // namespace vflcran
