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
#include <random>

#include <gtest/gtest.h>

#include "vflcran/convex_kernel.hpp"
#include "vflcran/uplink_opt.hpp"

namespace vflcran {
namespace {

constexpr double kNoise = 6.309573444801929e-13;
constexpr double kPower = 0.19952623149688797;  // 23 dBm

CMat RandomChannels(int rows, int cols, std::uint64_t seed, double scale = 1e-5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  CMat h(rows, cols);
  for (int i = 0; i < h.size(); ++i) h(i) = cplx(n(rng), n(rng));
  return h;
}

UplinkProblem Problem(const CMat& h, double c) {
  UplinkProblem p;
  p.channels = h;
  p.p_ul = kPower;
  p.capacity_bits = c;
  p.noise_power = kNoise;
  return p;
}

TEST(OptimizeUplink, ScalarMatchesGridSearch) {
  CMat h(1, 1);
  h << cplx(3e-6, -4e-6);
  const double c = 6.0;
  const UplinkProblem p = Problem(h, c);
  const UplinkResult r = OptimizeUplink(p);
  const double a = kPower * std::norm(h(0, 0)) + kNoise;
  EXPECT_NEAR(r.design.q(0) / (a / (std::exp2(c) - 1.0)), 1.0, 1e-6);
  // Grid over q: smallest feasible grid point gives the best objective.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20000; ++i) {
    const double q = kNoise * std::pow(10.0, -4.0 + 8.0 * i / 20000.0);
    if (UplinkCapacityBits(h, kPower, Vec::Constant(1, q), kNoise) > c) continue;
    best = std::min(best, (kNoise + q) / (2.0 * kPower * std::norm(h(0, 0))));
  }
  EXPECT_NEAR(r.objective / best, 1.0, 0.01);
  EXPECT_LE(r.objective, best * (1 + 1e-9));
}

TEST(OptimizeUplink, UnlimitedCapacityApproachesNoiseLimit) {
  CMat h(1, 2);
  h << cplx(2e-6, 1e-6), cplx(-5e-7, 3e-6);
  const UplinkResult r = OptimizeUplink(Problem(h, std::numeric_limits<double>::infinity()));
  const double floor_gain = std::min(std::norm(h(0, 0)), std::norm(h(0, 1)));
  const double limit = 2.0 * kNoise / (2.0 * kPower * floor_gain);
  EXPECT_NEAR(r.objective / limit, 1.0, 0.01);
  EXPECT_GE(r.objective, limit * (1 - 1e-12));
}

TEST(OptimizeUplink, DuplicateDevicesShareGain) {
  CMat h = RandomChannels(4, 3, 1);
  h.col(2) = h.col(0);
  const UplinkResult r = OptimizeUplink(Problem(h, 10.0));
  const Vec gains = (h.adjoint() * r.design.m).cwiseAbs2();
  EXPECT_NEAR(gains(0), gains(2), 1e-12 * gains(0));
}

TEST(OptimizeUplink, MonotoneAndFeasibleOnRandomInstances) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const double c = 4.0 + 4.0 * static_cast<double>(s % 4);
    const UplinkProblem p = Problem(RandomChannels(8, 8, 100 + s), c);
    const UplinkResult r = OptimizeUplink(p);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_LE(r.trace[i], r.trace[i - 1] * (1 + 1e-8));
    }
    EXPECT_LE(r.capacity_bits, c + 1e-6);
    EXPECT_TRUE((r.design.q.array() >= kUplinkQMinRelative * kNoise * (1 - 1e-12)).all());
    EXPECT_NEAR(r.objective, UplinkObjective(p, r.design.m, r.design.q), 1e-9 * r.objective);
  }
}

TEST(OptimizeUplink, TooSmallCapacityIsInfeasible) {
  try {
    IsotropicUplinkNoise(Problem(RandomChannels(4, 2, 3), 1e-20));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(UplinkObjective, PhaseInvariance) {
  const UplinkProblem p = Problem(RandomChannels(6, 4, 4), 8.0);
  const CVec m = RandomChannels(6, 1, 5, 1.0).col(0);
  const Vec q = Vec::Constant(6, 3.0 * kNoise);
  const double base = UplinkObjective(p, m, q);
  for (double th : {0.3, 1.7, -2.9}) {
    EXPECT_NEAR(UplinkObjective(p, m * std::polar(1.0, th), q), base, 1e-10 * base);
  }
}

TEST(ScaBeamforming, SingleDeviceFindsWhitenedMatchedFilter) {
  const CMat g = RandomChannels(5, 1, 6, 1.0);
  const Vec qt = (RandomChannels(5, 1, 7, 1.0).real().cwiseAbs().array() + 0.5).matrix();
  const ScaResult r = ScaBeamforming(g, qt, RandomChannels(5, 1, 8, 1.0).col(0));
  const double closed = (g.col(0).cwiseAbs2().array() / qt.array()).sum();
  EXPECT_NEAR(std::norm((r.m.adjoint() * g.col(0))(0)) / closed, 1.0, 1e-6);
  EXPECT_NEAR((r.m.cwiseAbs2().array() * qt.array()).sum(), 1.0, 1e-12);
}

TEST(ScaBeamforming, MonotoneOnRandomInstances) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const CMat g = RandomChannels(8, 8, 200 + s, 1.0);
    const Vec qt = (RandomChannels(8, 1, 300 + s, 1.0).real().cwiseAbs().array() + 1.0).matrix();
    const ScaResult r = ScaBeamforming(g, qt, RandomChannels(8, 1, 400 + s, 1.0).col(0));
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_LE(r.trace[i], r.trace[i - 1] + 1e-8 * std::abs(r.trace[i - 1]));
    }
    EXPECT_LT(r.kkt_residual, 1e-7);
  }
}

TEST(ScaBeamforming, OptimalStartStopsAtOnce) {
  const CMat g = RandomChannels(4, 1, 9, 1.0);
  const Vec qt = Vec::Constant(4, 2.0);
  const ScaResult first = ScaBeamforming(g, qt, RandomChannels(4, 1, 10, 1.0).col(0));
  const ScaResult again = ScaBeamforming(g, qt, first.m);
  EXPECT_LE(again.iterations, 1);
  EXPECT_NEAR(again.trace.back(), first.trace.back(), 1e-6 * std::abs(first.trace.back()));
}

TEST(ScaBeamforming, TangentUpperBoundsConcaveGain) {
  // -|m^H g|^2 is concave in real coordinates; its tangent lies above it.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const CVec g = RandomChannels(3, 1, 500 + trial, 1.0).col(0);
    const CVec m0 = RandomChannels(3, 1, 900 + trial, 1.0).col(0);
    const CVec m1 = RandomChannels(3, 1, 1300 + trial, 1.0).col(0);
    const cplx i0 = (m0.adjoint() * g)(0);
    const CVec grad_c = -2.0 * g * std::conj(i0);  // Wirtinger form
    const double tangent =
        -std::norm(i0) + 2.0 * std::real((m1 - m0).dot(grad_c) / 2.0);
    const double value = -std::norm((m1.adjoint() * g)(0));
    EXPECT_LE(value, tangent + 1e-9 * std::max(1.0, std::abs(tangent)));
  }
}

TEST(ScaSubproblem, SingleTangentClosedForm) {
  Vec a(4);
  a << 1.0, -2.0, 0.5, 3.0;
  Vec e(4);
  e << 1.0, 2.0, 0.5, 4.0;
  const Mat ell = e.asDiagonal();
  const Vec ref = -(a.array() / e.array()).matrix() / std::sqrt((a.array().square() / e.array()).sum());
  const kernel::MinMaxResult r = SolveScaSubproblem(a, Vec::Constant(1, 2.0), ell);
  EXPECT_LT((r.x - ref).norm(), 1e-8);
}

TEST(ScaSubproblem, SymmetricTangentsGiveBisector) {
  Mat a(2, 2);
  a << -1.0, 0.0, 0.0, -1.0;
  const kernel::MinMaxResult r = SolveScaSubproblem(a, Vec::Zero(2), Mat::Identity(2, 2));
  EXPECT_NEAR(r.x(0), r.x(1), 1e-8);
  EXPECT_NEAR(r.x(0), std::sqrt(0.5), 1e-8);
}

TEST(UplinkQuantization, ScalarCapacityEquality) {
  CMat h(1, 1);
  h << cplx(1e-6, 2e-6);
  const double c = 7.0;
  const Vec q = OptimizeUplinkQuantization(CVec::Ones(1), Problem(h, c));
  const double a = kPower * std::norm(h(0, 0)) + kNoise;
  EXPECT_NEAR(q(0) / (a / (std::exp2(c) - 1.0)), 1.0, 1e-9);
}

TEST(UplinkQuantization, ZeroWeightEntryTakesLargestValue) {
  const UplinkProblem p = Problem(RandomChannels(3, 2, 12), 6.0);
  CVec m = RandomChannels(3, 1, 13, 1.0).col(0);
  m(1) = 0.0;
  const Vec q = OptimizeUplinkQuantization(m, p);
  EXPECT_GT(q(1), 1e6 * std::max(q(0), q(2)));
  EXPECT_LE(UplinkCapacityBits(p.channels, kPower, q, kNoise), 6.0 + 1e-6);
}

TEST(UplinkQuantization, RandomInstanceMatchesGridOracle) {
  const UplinkProblem p = Problem(RandomChannels(4, 3, 14), 5.0);
  const CVec m = RandomChannels(4, 1, 15, 1.0).col(0);
  const Vec w = m.cwiseAbs2();
  const Vec q = OptimizeUplinkQuantization(m, p);
  const double solver = w.dot(q);
  EXPECT_NEAR(UplinkCapacityBits(p.channels, kPower, q, kNoise), 5.0, 1e-6);

  // Grid over three coordinates; the fourth is set by bisection so the
  // capacity is met with equality. Then a pattern search refines the best.
  auto complete = [&](Vec v) -> double {
    double lo = std::log(kNoise * 1e-6), hi = std::log(kNoise * 1e8);
    v(3) = std::exp(hi);
    if (UplinkCapacityBits(p.channels, kPower, v, kNoise) > 5.0) return INFINITY;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      v(3) = std::exp(mid);
      if (UplinkCapacityBits(p.channels, kPower, v, kNoise) > 5.0) lo = mid; else hi = mid;
    }
    v(3) = std::exp(hi);
    return w.dot(v);
  };
  Vec best_x = Vec::Zero(3);
  double best = INFINITY;
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) {
      for (int k = 0; k < 25; ++k) {
        Vec v(4);
        v << i, j, k, 0.0;
        v.head(3) = ((v.head(3).array() * (8.0 / 24.0) - 3.0) * std::log(10.0)).exp() * kNoise;
        const double val = complete(v);
        if (val < best) {
          best = val;
          best_x = v.head(3).array().log();
        }
      }
    }
  }
  double step = 0.3;
  while (step > 1e-7) {
    bool improved = false;
    for (int d = 0; d < 3; ++d) {
      for (double sgn : {-1.0, 1.0}) {
        Vec x = best_x;
        x(d) += sgn * step;
        Vec v(4);
        v.head(3) = x.array().exp();
        v(3) = 0.0;
        const double val = complete(v);
        if (val < best) {
          best = val;
          best_x = x;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  EXPECT_NEAR(solver / best, 1.0, 0.01);
}

}  // namespace
}  // namespace vflcran
