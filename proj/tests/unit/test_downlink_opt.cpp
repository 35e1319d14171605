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
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "vflcran/convex_kernel.hpp"
#include "vflcran/downlink_opt.hpp"

namespace vflcran {
namespace {

constexpr double kNoise = 6.309573444801929e-13;
constexpr double kPower = 1.0;  // 30 dBm

CMat RandomChannels(int rows, int cols, std::uint64_t seed, double scale = 1e-5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  CMat h(rows, cols);
  for (int i = 0; i < h.size(); ++i) h(i) = cplx(n(rng), n(rng));
  return h;
}

CMat RandomPd(int n, std::uint64_t seed) {
  const CMat a = RandomChannels(n, n, seed, 1.0);
  return a * a.adjoint() + 0.1 * CMat::Identity(n, n);
}

DownlinkProblem Problem(const CMat& h, double c) {
  DownlinkProblem p;
  p.channels = h;
  p.p_dl = kPower;
  p.capacity_bits = c;
  p.noise_power = kNoise;
  return p;
}

TEST(LogdetMajorant, TightAtExpansionPoint) {
  const CMat s = RandomPd(4, 1);
  EXPECT_NEAR(LogdetMajorant(s, s), kernel::PdLogDet(s), 1e-10);
}

TEST(LogdetMajorant, ScaledIdentity) {
  const CMat i3 = CMat::Identity(3, 3);
  // log|2I| + Tr((2I)^{-1} I) - 3 with n = 3.
  EXPECT_NEAR(LogdetMajorant(i3, 2.0 * i3), 3.0 * std::log(2.0) - 1.5, 1e-12);
}

TEST(LogdetMajorant, BoundsLogdetOnRandomPairs) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const int n = 1 + static_cast<int>(s % 5);
    const CMat omega = RandomPd(n, 2 * s + 10);
    const CMat sigma = RandomPd(n, 2 * s + 11);
    EXPECT_GE(LogdetMajorant(omega, sigma), kernel::PdLogDet(omega) - 1e-9);
  }
}

TEST(LogdetMajorant, RejectsIndefinite) {
  CMat bad = CMat::Identity(2, 2);
  bad(1, 1) = -1.0;
  EXPECT_THROW(LogdetMajorant(bad, CMat::Identity(2, 2)), Error);
}

TEST(SigmaUpdate, RankOnePlusDiagonal) {
  CVec u(2);
  u << cplx(1.0, 1.0), cplx(0.0, 2.0);
  Vec q(2);
  q << 0.5, 0.25;
  const CMat s = SigmaUpdate(u, q);
  EXPECT_NEAR(std::real(s(0, 0)), 2.5, 1e-15);
  EXPECT_NEAR(std::real(s(1, 1)), 4.25, 1e-15);
  EXPECT_NEAR(std::abs(s(0, 1) - cplx(2.0, -2.0)), 0.0, 1e-15);
  EXPECT_THROW(SigmaUpdate(u, Vec::Ones(3)), Error);
}

TEST(OptimizeDownlink, ScalarMatchesGridSearch) {
  CMat h(1, 1);
  h << cplx(2e-6, 1e-6);
  for (double c : {2.0, 5.0, 9.0}) {
    const DownlinkResult r = OptimizeDownlink(Problem(h, c));
    const double h2 = std::norm(h(0, 0));
    double best = std::numeric_limits<double>::infinity();
    // Grid over beam power a and quantization power q, both within P.
    const int grid = 2000;
    for (int i = 1; i <= grid; ++i) {
      const double a = kPower * i / grid;
      for (int j = 0; j <= grid; ++j) {
        const double q = kPower * std::pow(10.0, -12.0 + 12.0 * j / grid);
        if (a + q > kPower) break;
        if (std::log2(1.0 + a / q) > c) continue;
        best = std::min(best, (kNoise + h2 * q) / (2.0 * h2 * a));
      }
    }
    EXPECT_NEAR(r.objective / best, 1.0, 0.01) << "C=" << c;
    EXPECT_LE(r.power, kPower * (1 + 1e-9));
    EXPECT_LE(r.capacity_bits, c + 1e-6);
  }
}

TEST(OptimizeDownlink, UnlimitedCapacitySingleDeviceIsMatchedFilter) {
  const CMat h = RandomChannels(3, 1, 2);
  const DownlinkResult r =
      OptimizeDownlink(Problem(h, std::numeric_limits<double>::infinity()));
  const double limit = kNoise / (2.0 * kPower * h.col(0).squaredNorm());
  EXPECT_NEAR(r.objective / limit, 1.0, 1e-3);
  EXPECT_GE(r.objective, limit * (1 - 1e-9));
}

TEST(OptimizeDownlink, IdenticalDevicesGetEqualNoise) {
  CMat h = RandomChannels(4, 3, 3);
  h.col(1) = h.col(0);
  const DownlinkResult r = OptimizeDownlink(Problem(h, 8.0));
  EXPECT_NEAR(r.sigma2_dl(0), r.sigma2_dl(1), 1e-10 * r.sigma2_dl(0));
}

TEST(OptimizeDownlink, BlocksNeverIncreaseObjective) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double c = 2.0 + 3.0 * static_cast<double>(s % 5);
    const DownlinkProblem p = Problem(RandomChannels(6, 5, 50 + s), c);
    const DownlinkResult r = OptimizeDownlink(p);
    double prev = r.initial_objective;
    for (const DownlinkStep& st : r.steps) {
      EXPECT_LE(st.after_q, prev * (1 + 1e-12));
      EXPECT_LE(st.after_u, st.after_q * (1 + 1e-12));
      EXPECT_LE(st.after_rescale, st.after_u * (1 + 1e-12));
      EXPECT_LE(st.after_sigma, st.after_rescale * (1 + 1e-12));
      prev = st.after_sigma;
    }
    EXPECT_LE(r.power, kPower * (1 + 1e-9));
    EXPECT_LE(r.capacity_bits, c + 1e-6);
    EXPECT_LE(r.objective, r.initial_objective * (1 + 1e-9));
  }
}

TEST(OptimizeDownlink, QuantizationBlockStaysCapacityFeasible) {
  // The majorized constraint is conservative: each accepted Q update keeps
  // the true capacity at or below C.
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DownlinkResult r = OptimizeDownlink(Problem(RandomChannels(4, 4, 80 + s), 6.0));
    for (const DownlinkStep& st : r.steps) EXPECT_LE(st.surrogate_gap_bits, 1e-6);
  }
}

TEST(OptimizeDownlink, FrozenBlocksStayFrozen) {
  const DownlinkProblem p = Problem(RandomChannels(4, 3, 5), 6.0);
  const DownlinkStart s = DownlinkInitialPoint(p);
  DownlinkOptions fix_q;
  fix_q.update_quantization = false;
  const DownlinkResult a = OptimizeDownlink(p, fix_q, &s);
  // Only the joint rescale can move Q, and it scales every entry alike.
  const Vec ratio = a.design.q.cwiseQuotient(s.q);
  EXPECT_NEAR(ratio.maxCoeff(), ratio.minCoeff(), 1e-9 * ratio.maxCoeff());

  DownlinkOptions fix_u;
  fix_u.update_beamformer = false;
  const DownlinkResult b = OptimizeDownlink(p, fix_u, &s);
  const cplx phase = b.design.u(0) / s.u(0);
  EXPECT_LT((b.design.u - s.u * phase).norm(), 1e-9 * b.design.u.norm());
}

TEST(SolveDownlinkQ, WeightScalingKeepsMinimizer) {
  const CMat h = RandomChannels(4, 3, 6);
  DownlinkProblem p = Problem(h, 5.0);
  const DownlinkStart s = DownlinkInitialPoint(p);
  const Vec q1 = SolveDownlinkQ(p, s.u, s.u, s.q, s.q);
  p.weights = Vec::Constant(3, 2.0);
  const Vec q2 = SolveDownlinkQ(p, s.u, s.u, s.q, s.q);
  EXPECT_LT((q1 - q2).norm(), 1e-6 * q1.norm());
  EXPECT_LE(DownlinkCapacityBits(s.u, q1), 5.0 + 1e-6);
  EXPECT_LE(DownlinkPower(s.u, q1), kPower * (1 + 1e-9));
}

TEST(SolveDownlinkQ, ImprovesOnIsotropicStart) {
  const DownlinkProblem p = Problem(RandomChannels(5, 4, 7), 6.0);
  const DownlinkStart s = DownlinkInitialPoint(p);
  const Vec q = SolveDownlinkQ(p, s.u, s.u, s.q, s.q);
  EXPECT_LE(DownlinkObjective(p, s.u, q), DownlinkObjective(p, s.u, s.q) * (1 + 1e-12));
}

TEST(SolveDownlinkU, SingleDeviceAlignsWithChannel) {
  const CMat h = RandomChannels(4, 1, 8);
  const DownlinkProblem p = Problem(h, std::numeric_limits<double>::infinity());
  const Vec q = Vec::Constant(4, DownlinkQMin(p));
  const CVec u = SolveDownlinkU(p, q, RandomChannels(4, 1, 9, 0.1).col(0));
  const double cosine = std::abs(h.col(0).dot(u)) / (h.col(0).norm() * u.norm());
  EXPECT_NEAR(cosine, 1.0, 1e-6);
  EXPECT_NEAR(u.squaredNorm() + q.sum(), kPower, 1e-6);
}

TEST(SolveDownlinkU, DescendsAndRespectsCapacity) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const DownlinkProblem p = Problem(RandomChannels(5, 4, 30 + s), 4.0);
    const DownlinkStart st = DownlinkInitialPoint(p);
    const CVec u = SolveDownlinkU(p, st.q, st.u);
    EXPECT_LE(DownlinkObjective(p, u, st.q), DownlinkObjective(p, st.u, st.q) * (1 + 1e-12));
    EXPECT_LE(DownlinkCapacityBits(u, st.q), 4.0 + 1e-6);
    EXPECT_LE(DownlinkPower(u, st.q), kPower * (1 + 1e-9));
  }
}

TEST(DownlinkInitialPoint, IsotropicAtCapacity) {
  const DownlinkProblem p = Problem(RandomChannels(4, 3, 10), 6.0);
  const DownlinkStart s = DownlinkInitialPoint(p);
  EXPECT_NEAR(DownlinkCapacityBits(s.u, s.q), 6.0, 1e-9);
  EXPECT_LE(DownlinkPower(s.u, s.q), kPower * (1 + 1e-12));
  EXPECT_NEAR(s.u.squaredNorm(), 0.5 * kPower, 1e-12);
}

TEST(OptimizeDownlink, RejectsBadInputs) {
  DownlinkProblem p = Problem(RandomChannels(2, 2, 11), 4.0);
  p.p_dl = 0.0;
  EXPECT_THROW(OptimizeDownlink(p), Error);
  p = Problem(RandomChannels(2, 2, 11), 4.0);
  p.weights = Vec::Ones(3);
  EXPECT_THROW(OptimizeDownlink(p), Error);
}

}  // namespace
}  // namespace vflcran
