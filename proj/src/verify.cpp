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
#include <cstdio>
#include <random>

#include "vflcran/convex_kernel.hpp"
#include "vflcran/datasets.hpp"
#include "vflcran/downlink_opt.hpp"
#include "vflcran/gap_analysis.hpp"
#include "vflcran/scenario.hpp"

namespace vflcran {

namespace {

std::string Fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

ChannelState SmallChannels(std::uint64_t seed) {
  GeometryConfig geo;
  geo.devices = 8;
  geo.servers = 4;
  geo.radius_m = 100.0;
  ExperimentConfig defaults;
  return SampleChannels(SampleTopology(geo, DeriveSeed(seed, 1)), 2,
                        defaults.NoisePower(), DeriveSeed(seed, 2));
}

VerifyItem LinkNoise(const ChannelState& ch, const DesignPair& design,
                     std::uint64_t seed) {
  const int draws = 200000;
  const Vec ul = UplinkRound(Mat::Zero(draws, ch.uplink.cols()), design.uplink,
                             ch.uplink, ch.noise_power, DeriveSeed(seed, 3));
  double worst = std::abs(ul.squaredNorm() / draws / design.sigma2_ul - 1.0);
  const Mat dl = DownlinkRound(Vec::Zero(draws), design.downlink, ch.downlink,
                               ch.noise_power, DeriveSeed(seed, 4));
  for (Eigen::Index k = 0; k < dl.cols(); ++k) {
    worst = std::max(worst,
                     std::abs(dl.col(k).squaredNorm() / draws / design.sigma2_dl(k) - 1.0));
  }
  return {"link-noise-variance", worst < 0.02,
          Fmt("largest relative error %.3g over 2e5 draws", worst)};
}

VerifyItem NoiseMomentCheck(const ChannelState& ch, const DesignPair& design,
                            std::uint64_t seed) {
  const FeaturePartitionedDataset data = SyntheticDataset(DeriveSeed(seed, 5), 200, 16, 8, 0.1);
  GlobalModel model = GlobalModel::Zeros(data, TaskKind::kBinaryLogistic);
  std::mt19937_64 rng(DeriveSeed(seed, 6));
  std::normal_distribution<double> normal(0.0, 0.3);
  for (Mat& w : model.submodels) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
  }
  const PredictionBlock block =
      Auxiliary(AggregateAll(model, data), data.labels, TaskKind::kBinaryLogistic);
  const NoiseMoment m = EffectiveNoiseMoment(data, block, ch, design.uplink,
                                             design.downlink, 4000, DeriveSeed(seed, 7));
  const double worst =
      ((m.monte_carlo.array() - m.closed_form.array()).abs() / m.closed_form.array())
          .maxCoeff();
  return {"gradient-noise-moment", worst < 0.1,
          Fmt("largest relative error %.3g over 4000 draws", worst)};
}

VerifyItem MajorantCheck(std::uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, 8));
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_violation = 0.0, worst_tight = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 8;
    CMat a(n, n), b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) = cplx(normal(rng), normal(rng));
        b(i, j) = cplx(normal(rng), normal(rng));
      }
    }
    const CMat omega = a * a.adjoint() + 0.1 * CMat::Identity(n, n);
    const CMat sigma = b * b.adjoint() + 0.1 * CMat::Identity(n, n);
    const double exact = kernel::PdLogDet(omega);
    worst_violation = std::max(worst_violation, exact - LogdetMajorant(omega, sigma));
    worst_tight = std::max(worst_tight, std::abs(LogdetMajorant(omega, omega) - exact));
  }
  return {"logdet-majorant", worst_violation < 1e-9 && worst_tight < 1e-9,
          Fmt("max violation %.3g, max gap at equality %.3g", worst_violation, worst_tight)};
}

VerifyItem GradientCheck(std::uint64_t seed) {
  const FeaturePartitionedDataset data = SyntheticDataset(DeriveSeed(seed, 9), 100, 8, 4, 0.1);
  LossSpec spec;
  spec.lambda = 0.01;
  GlobalModel model = GlobalModel::Zeros(data, spec.task);
  std::mt19937_64 rng(DeriveSeed(seed, 10));
  std::normal_distribution<double> normal(0.0, 0.5);
  for (Mat& w : model.submodels) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
  }
  const PredictionBlock block =
      Auxiliary(AggregateAll(model, data), data.labels, spec.task);
  double worst = 0.0;
  for (std::size_t k = 0; k < data.devices(); ++k) {
    const Mat grad = AveragedPartialGradient(data.blocks[k], block.g) +
                     spec.lambda * model.submodels[k];
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double h = 1e-5;
      GlobalModel up = model, down = model;
      up.submodels[k](i) += h;
      down.submodels[k](i) -= h;
      const double fd = (GlobalLoss(up, data, spec) - GlobalLoss(down, data, spec)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad(i)) / std::max(1e-3, std::abs(grad(i))));
    }
  }
  return {"partial-gradient", worst < 1e-5,
          Fmt("largest relative finite-difference error %.3g", worst)};
}

VerifyItem CapacityCheck(const DesignPair& design) {
  const CVec& u = design.downlink.u;
  const Vec& q = design.downlink.q;
  const CMat full = u * u.adjoint() + CMat(q.cast<cplx>().asDiagonal());
  const double via_det =
      (kernel::PdLogDet(full) - q.array().log().sum()) / std::log(2.0);
  const double err = std::abs(via_det - DownlinkCapacityBits(u, q));
  return {"capacity-determinant-lemma", err < 1e-9 * std::max(1.0, std::abs(via_det)),
          Fmt("absolute difference %.3g bits", err)};
}

VerifyItem GapLinearity(std::uint64_t seed) {
  std::mt19937_64 rng(DeriveSeed(seed, 11));
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  const double rho = 0.9, scale = 3.7;
  GapLedger base(rho), scaled(rho);
  for (int t = 0; t < 50; ++t) {
    GapRound r;
    r.sigma2_ul = unif(rng);
    r.sigma2_dl = Vec::NullaryExpr(4, [&] { return unif(rng); });
    r.ul_factor = Vec::NullaryExpr(4, [&] { return unif(rng); });
    r.dl_factor = Vec::NullaryExpr(4, [&] { return unif(rng); });
    GapRound s = r;
    s.sigma2_ul *= scale;
    s.sigma2_dl *= scale;
    base.Append(r);
    scaled.Append(s);
  }
  const double a = OptimalityGap(base, rho, 50), b = OptimalityGap(scaled, rho, 50);
  const double err = std::abs(b - scale * a) / (scale * a);
  return {"gap-linearity", err < 1e-12, Fmt("relative error %.3g", err)};
}

}  // namespace

std::vector<VerifyItem> RunVerification(std::uint64_t seed) {
  const ChannelState ch = SmallChannels(seed);
  ExperimentConfig defaults;
  LinkBudget budget = BudgetFromConfig(defaults);
  budget.capacity_bits = 8.0;
  DesignSet designs(ch, budget, Vec::Ones(ch.uplink.cols()));
  const DesignPair& joint = designs.Get(Scheme::kJoint);
  std::vector<VerifyItem> items;
  items.push_back(LinkNoise(ch, joint, seed));
  items.push_back(NoiseMomentCheck(ch, joint, seed));
  items.push_back(MajorantCheck(seed));
  items.push_back(GradientCheck(seed));
  items.push_back(CapacityCheck(joint));
  items.push_back(GapLinearity(seed));
  return items;
}

}  // namespace vflcran
