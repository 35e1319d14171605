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
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Reference values are computed here from
// independent formulas rather than through the library's own helpers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vflcran/aircomp_link.hpp"
#include "vflcran/channel.hpp"
#include "vflcran/common.hpp"
#include "vflcran/core_model.hpp"
#include "vflcran/datasets.hpp"
#include "vflcran/downlink_opt.hpp"
#include "vflcran/gap_analysis.hpp"
#include "vflcran/scenario.hpp"
#include "vflcran/uplink_opt.hpp"

namespace {

using namespace vflcran;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---- reference formulas ------------------------------------------------

double Softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }
double Logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

Vec LabelVector(const std::vector<int>& labels) {
  Vec y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];
  return y;
}

double CentralLoss(const Mat& x, const Vec& y, const Vec& w, double lambda) {
  const Vec s = x * w;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) sum += Softplus(s(i)) - y(i) * s(i);
  return sum / static_cast<double>(s.size()) + 0.5 * lambda * w.squaredNorm();
}

Vec CentralGradient(const Mat& x, const Vec& y, const Vec& w, double lambda) {
  const Vec p = (x * w).unaryExpr([](double s) { return Logistic(s); });
  return x.transpose() * (p - y) / static_cast<double>(x.rows()) + lambda * w;
}

double Smoothness(const Mat& x, double lambda) {
  const Eigen::SelfAdjointEigenSolver<Mat> eig(x.transpose() * x);
  return eig.eigenvalues().maxCoeff() / (4.0 * static_cast<double>(x.rows())) + lambda;
}

// Newton's method on the regularized logistic loss.
double CentralOptimum(const Mat& x, const Vec& y, double lambda) {
  Vec w = Vec::Zero(x.cols());
  for (int it = 0; it < 100; ++it) {
    const Vec g = CentralGradient(x, y, w, lambda);
    if (g.norm() < 1e-13) break;
    const Vec p = (x * w).unaryExpr([](double s) { return Logistic(s); });
    const Vec curv = p.array() * (1.0 - p.array());
    Mat h = x.transpose() * curv.asDiagonal() * x / static_cast<double>(x.rows());
    h.diagonal().array() += lambda;
    Vec step = h.ldlt().solve(g);
    double t = 1.0;
    const double f0 = CentralLoss(x, y, w, lambda);
    while (CentralLoss(x, y, w - t * step, lambda) > f0 - 0.25 * t * g.dot(step) && t > 1e-10) t *= 0.5;
    w -= t * step;
  }
  return CentralLoss(x, y, w, lambda);
}

double LogDetRef(const CMat& a) {
  const Eigen::PartialPivLU<CMat> lu(a);
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log(std::abs(lu.matrixLU()(i, i)));
  return s;
}

double UplinkVarianceRef(const CMat& h, const CVec& m, const Vec& q, double noise, double p_ul) {
  const double gain = (h.adjoint() * m).cwiseAbs2().minCoeff();
  return (m.cwiseAbs2().array() * (noise + q.array())).sum() / (2.0 * p_ul * gain);
}

double DownlinkVarianceRef(const CVec& h, const CVec& u, const Vec& q, double noise) {
  const double gain = std::norm(h.dot(u));
  return 0.5 * (noise + h.cwiseAbs2().dot(q)) / gain;
}

double UplinkCapacityRef(const CMat& h, double p_ul, const Vec& q, double noise) {
  CMat a = p_ul * h * h.adjoint();
  a.diagonal().array() += noise;
  a.diagonal() += q.cast<cplx>();
  return (LogDetRef(a) - q.array().log().sum()) / std::log(2.0);
}

double DownlinkCapacityRef(const CVec& u, const Vec& q) {
  CMat a = u * u.adjoint();
  a.diagonal() += q.cast<cplx>();
  return (LogDetRef(a) - q.array().log().sum()) / std::log(2.0);
}

ChannelState Channels(std::size_t devices, std::size_t servers, std::size_t antennas,
                      double radius, std::uint64_t seed) {
  GeometryConfig g;
  g.devices = devices;
  g.servers = servers;
  g.radius_m = radius;
  const ExperimentConfig defaults;
  return SampleChannels(SampleTopology(g, DeriveSeed(seed, 1)), antennas,
                        defaults.NoisePower(), DeriveSeed(seed, 2));
}

LinkBudget Budget(double p_dl_dbm, double bits) {
  LinkBudget b;
  b.p_ul = DbmToWatts(23.0);
  b.p_dl = DbmToWatts(p_dl_dbm);
  b.capacity_bits = bits;
  return b;
}

// ---- criteria ----------------------------------------------------------

Outcome ErrorFreeEquivalence() {
  const Stopwatch clock;
  const double lambda = 0.01;
  const FeaturePartitionedDataset data = SyntheticDataset(11, 500, 32, 8, 0.1);
  const Mat x = data.Concatenated();
  const Vec y = LabelVector(data.labels);
  const double mu = 1.0 / Smoothness(x, lambda);

  LossSpec spec;
  spec.lambda = lambda;
  spec.learning_rate = mu;
  GlobalModel model = GlobalModel::Zeros(data, spec.task);
  const std::vector<RoundTrace> trace = TrainErrorFree(data, spec, 200, &model);

  Vec w = Vec::Zero(x.cols());
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    w -= mu * CentralGradient(x, y, w, lambda);
    const double ref = CentralLoss(x, y, w, lambda);
    worst = std::max(worst, std::abs(trace[static_cast<std::size_t>(t)].loss - ref) / std::abs(ref));
  }
  const double werr = (model.Flatten() - w).norm() / w.norm();
  const double sec = clock.Seconds();
  return {trace.size() == 200 && worst < 1e-10 && werr < 1e-10 && sec < 5.0,
          Format("max relative loss error %.2e, final weight error %.2e, %.2f s", worst, werr, sec)};
}

Outcome NoiseFormulas() {
  const Stopwatch clock;
  const ChannelState ch = Channels(8, 4, 2, 500.0, 21);
  const LinkBudget budget = Budget(30.0, 8.0);
  DesignSet set(ch, budget, Vec::Ones(8));
  const DesignPair& d = set.Get(Scheme::kJoint);
  const int draws = 1000000;
  const double p_ul = budget.p_ul;

  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat signals(draws, 8);
  for (Eigen::Index i = 0; i < signals.size(); ++i) signals(i) = unif(rng);
  const Vec sums = signals.rowwise().sum();
  const Vec ul = UplinkRound(signals, d.uplink, ch.uplink, ch.noise_power, 23) - sums;
  signals.resize(0, 0);

  const double ul_ref = UplinkVarianceRef(ch.uplink, d.uplink.m, d.uplink.q, ch.noise_power, p_ul);
  const double ul_mean = ul.mean();
  const double ul_var = (ul.array() - ul_mean).square().sum() / (draws - 1);
  double worst_var = std::abs(ul_var / ul_ref - 1.0);
  double worst_z = std::abs(ul_mean) / std::sqrt(ul_ref / draws);

  Vec g(draws);
  for (Eigen::Index i = 0; i < draws; ++i) g(i) = unif(rng);
  const Mat dl = DownlinkRound(g, d.downlink, ch.downlink, ch.noise_power, 24);
  for (Eigen::Index k = 0; k < 8; ++k) {
    const Vec e = dl.col(k) - g;
    const double ref = DownlinkVarianceRef(ch.downlink.col(k), d.downlink.u, d.downlink.q, ch.noise_power);
    const double mean = e.mean();
    const double var = (e.array() - mean).square().sum() / (draws - 1);
    worst_var = std::max(worst_var, std::abs(var / ref - 1.0));
    worst_z = std::max(worst_z, std::abs(mean) / std::sqrt(ref / draws));
  }
  const double sec = clock.Seconds();
  return {worst_var < 0.01 && worst_z < 3.0 && sec < 60.0,
          Format("max variance error %.2e, max |mean|/SE %.2f, %.1f s", worst_var, worst_z, sec)};
}

Outcome GradientNoiseMoment() {
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    const ChannelState ch = Channels(4, 2, 2, 200.0, 100 + inst);
    DesignSet set(ch, Budget(30.0, 4.0 + static_cast<double>(inst)), Vec::Ones(4));
    const DesignPair& d = set.Get(Scheme::kJoint);
    const FeaturePartitionedDataset data = SyntheticDataset(200 + inst, 40, 8, 4, 0.1);
    GlobalModel model = GlobalModel::Zeros(data, TaskKind::kBinaryLogistic);
    std::mt19937_64 rng(300 + inst);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (Mat& w : model.submodels) {
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
    }
    const PredictionBlock block =
        Auxiliary(AggregateAll(model, data), data.labels, TaskKind::kBinaryLogistic);
    const NoiseMoment mc = EffectiveNoiseMoment(data, block, ch, d.uplink, d.downlink,
                                                100000, 400 + inst);

    const Mat x = data.Concatenated();
    const Vec s = x * model.Flatten();
    const double l = static_cast<double>(data.samples());
    const double s2_ul = UplinkVarianceRef(ch.uplink, d.uplink.m, d.uplink.q,
                                           ch.noise_power, DbmToWatts(23.0));
    for (std::size_t k = 0; k < data.devices(); ++k) {
      double ul_factor = 0.0, dl_factor = 0.0;
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double p = Logistic(s(i));
        const double gp = p * (1.0 - p);
        const double norm2 = data.blocks[k].row(i).squaredNorm();
        ul_factor += gp * gp * norm2;
        dl_factor += norm2;
      }
      const auto kk = static_cast<Eigen::Index>(k);
      const double s2_dl = DownlinkVarianceRef(ch.downlink.col(kk), d.downlink.u,
                                               d.downlink.q, ch.noise_power);
      const double ref = (ul_factor * s2_ul + dl_factor * s2_dl) / (l * l);
      worst = std::max(worst, std::abs(mc.monte_carlo(kk) / ref - 1.0));
    }
  }
  return {worst < 0.02, Format("max relative error %.2e over 10 instances, 1e5 draws each", worst)};
}

Outcome MajorantProperty() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  double violation = 0.0, tight = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    CMat a(n, n), b(n, n);
    for (int i = 0; i < n * n; ++i) {
      a(i) = cplx(normal(rng), normal(rng));
      b(i) = cplx(normal(rng), normal(rng));
    }
    const CMat omega = a * a.adjoint() + 0.05 * CMat::Identity(n, n);
    const CMat sigma = b * b.adjoint() + 0.05 * CMat::Identity(n, n);
    const double exact = LogDetRef(omega);
    violation = std::max(violation, exact - LogdetMajorant(omega, sigma));
    tight = std::max(tight, std::abs(LogdetMajorant(omega, omega) - exact));
  }
  return {violation <= 1e-9 && tight <= 1e-9,
          Format("max violation %.2e, max deviation at equality %.2e", violation, tight)};
}

// Scalar instances: exhaustive search over the feasible set.
double UplinkScalarGrid(double h2, double p, double noise, double c) {
  double best = kInf;
  for (int j = 0; j <= 200000; ++j) {
    const double q = noise * std::pow(10.0, -6.0 + 12.0 * j / 200000.0);
    if (std::log2(1.0 + (p * h2 + noise) / q) > c) continue;
    best = std::min(best, (noise + q) / (2.0 * p * h2));
  }
  return best;
}

double DownlinkScalarGrid(double h2, double p, double noise, double c) {
  double best = kInf;
  const int grid = 2000;
  for (int i = 1; i <= grid; ++i) {
    const double a = p * i / grid;
    for (int j = 0; j <= grid; ++j) {
      const double q = p * std::pow(10.0, -12.0 + 12.0 * j / grid);
      if (a + q > p) break;
      if (std::log2(1.0 + a / q) > c) continue;
      best = std::min(best, (noise + h2 * q) / (2.0 * h2 * a));
    }
  }
  return best;
}

Outcome OptimizerProperties() {
  const double p_ul = DbmToWatts(23.0);
  const double p_dl = DbmToWatts(30.0);
  int failures = 0;
  double worst_rise = 0.0, worst_cap = -kInf, worst_pow = -kInf;
  for (std::uint64_t inst = 0; inst < 50; ++inst) {
    const ChannelState ch = Channels(8, 4, 2, 500.0, 500 + inst);
    const double c = std::vector<double>{2.0, 4.0, 8.0, 16.0, 30.0}[inst % 5];

    UplinkProblem up;
    up.channels = ch.uplink;
    up.p_ul = p_ul;
    up.capacity_bits = c;
    up.noise_power = ch.noise_power;
    const UplinkResult ur = OptimizeUplink(up);
    for (std::size_t i = 1; i < ur.trace.size(); ++i) {
      worst_rise = std::max(worst_rise, (ur.trace[i] - ur.trace[i - 1]) / std::abs(ur.trace[i - 1]));
    }
    worst_cap = std::max(worst_cap, UplinkCapacityRef(ch.uplink, p_ul, ur.design.q, ch.noise_power) - c);

    DownlinkProblem dp;
    dp.channels = ch.downlink;
    dp.p_dl = p_dl;
    dp.capacity_bits = c;
    dp.noise_power = ch.noise_power;
    const DownlinkResult dr = OptimizeDownlink(dp);
    double prev = dr.initial_objective;
    for (const DownlinkStep& st : dr.steps) {
      for (double v : {st.after_q, st.after_u, st.after_rescale, st.after_sigma}) {
        worst_rise = std::max(worst_rise, (v - prev) / prev);
        prev = v;
      }
    }
    worst_cap = std::max(worst_cap, DownlinkCapacityRef(dr.design.u, dr.design.q) - c);
    worst_pow = std::max(worst_pow, dr.design.u.squaredNorm() + dr.design.q.sum() - p_dl);
  }
  if (worst_rise > 1e-8) ++failures;
  if (worst_cap > 1e-6) ++failures;
  if (worst_pow > 1e-9) ++failures;

  const double noise = ExperimentConfig().NoisePower();
  double worst_grid = 0.0;
  for (double c : {1.0, 3.0, 6.0, 10.0}) {
    CMat h(1, 1);
    h(0, 0) = cplx(1.5e-6, -2e-6);
    const double h2 = std::norm(h(0, 0));
    UplinkProblem up;
    up.channels = h;
    up.p_ul = p_ul;
    up.capacity_bits = c;
    up.noise_power = noise;
    const double ul = OptimizeUplink(up).objective;
    worst_grid = std::max(worst_grid, std::abs(ul / UplinkScalarGrid(h2, p_ul, noise, c) - 1.0));
    DownlinkProblem dp;
    dp.channels = h;
    dp.p_dl = p_dl;
    dp.capacity_bits = c;
    dp.noise_power = noise;
    const double dl = OptimizeDownlink(dp).objective;
    worst_grid = std::max(worst_grid, std::abs(dl / DownlinkScalarGrid(h2, p_dl, noise, c) - 1.0));
  }
  if (worst_grid > 0.01) ++failures;
  return {failures == 0,
          Format("max relative rise %.2e, max capacity excess %.2e bits, max power excess %.2e W, "
                 "max scalar grid gap %.2e",
                 worst_rise, worst_cap, worst_pow, worst_grid)};
}

Outcome ConvergenceBoundHolds() {
  int held = 0, noiseless_ok = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    ExperimentConfig c;
    c.devices = 4;
    c.servers = 2;
    c.antennas = 2;
    c.radius_m = 100.0;
    c.capacity_mbps = 80.0;
    c.dataset.samples = 100;
    c.dataset.features = 8;
    c.rounds = 30;
    c.seed = 600 + static_cast<std::uint64_t>(r);
    const ExperimentResult res = RunSchemes(c, {Scheme::kJoint, Scheme::kErrorFree});

    const DataSplit data = BuildDataset(c, DeriveSeed(c.seed, 1, 0));
    const Mat x = data.train.Concatenated();
    const Vec y = LabelVector(data.train.labels);
    const double l = static_cast<double>(x.rows());
    const double beta = Smoothness(x, c.lambda);
    const double rho = 1.0 - c.lambda / beta;
    const double f_star = CentralOptimum(x, y, c.lambda);
    const double f0 = CentralLoss(x, y, Vec::Zero(x.cols()), c.lambda);

    const std::vector<RoundTrace>& noisy = res.trials[0].trace;
    const double b_t = noisy.back().gap;
    const double bound = std::pow(rho, c.rounds) * (f0 - f_star) + 3.0 / (2.0 * l * l * beta) * b_t;
    if (noisy.back().loss - f_star <= bound) ++held;

    bool ok = true;
    for (const RoundTrace& row : res.trials[1].trace) {
      if (row.loss - f_star > std::pow(rho, row.round) * (f0 - f_star) + 1e-12) ok = false;
    }
    if (ok) ++noiseless_ok;
  }
  return {held >= 19 && noiseless_ok == runs,
          Format("noisy bound held on %d/%d runs, noiseless bound on %d/%d", held, runs,
                 noiseless_ok, runs)};
}

double FinalLoss(const TrialResult& t) { return t.trace.back().loss; }

Outcome TrendAtDeskScale() {
  const Stopwatch clock;
  ExperimentConfig c;
  c.devices = 8;
  c.servers = 4;
  c.antennas = 2;
  c.radius_m = 100.0;
  c.dataset.samples = 500;
  c.dataset.features = 32;
  c.lambda = 0.01;
  c.rounds = 100;
  c.trials = 20;
  c.seed = 1;

  c.capacity_mbps = 40.0;  // 4 bits per use
  const ExperimentResult small = RunSchemes(
      c, {Scheme::kJoint, Scheme::kBaseline1, Scheme::kBaseline2, Scheme::kBaseline3});
  int ordered = 0;
  for (int t = 0; t < c.trials; ++t) {
    const double j = FinalLoss(small.trials[static_cast<std::size_t>(t)]);
    const double b1 = FinalLoss(small.trials[static_cast<std::size_t>(c.trials + t)]);
    const double b2 = FinalLoss(small.trials[static_cast<std::size_t>(2 * c.trials + t)]);
    const double b3 = FinalLoss(small.trials[static_cast<std::size_t>(3 * c.trials + t)]);
    if (j <= b3 && b3 <= b1 && j <= b2 && b2 <= b1) ++ordered;
  }

  c.capacity_mbps = 600.0;  // 60 bits per use
  const ExperimentResult large = RunSchemes(c, {Scheme::kJoint, Scheme::kErrorFree});
  double worst = 0.0;
  for (int t = 0; t < c.trials; ++t) {
    const double j = FinalLoss(large.trials[static_cast<std::size_t>(t)]);
    const double ef = FinalLoss(large.trials[static_cast<std::size_t>(c.trials + t)]);
    worst = std::max(worst, std::abs(j - ef) / ef);
  }
  const double sec = clock.Seconds();
  return {ordered >= 16 && worst <= 0.02 && sec < 1800.0,
          Format("ordering at 4 bits on %d/20 seeds, largest gap to error-free at 60 bits %.2e, "
                 "%.0f s",
                 ordered, worst, sec)};
}

Outcome DistributedVersusCentral() {
  ExperimentConfig c;
  c.devices = 8;
  c.radius_m = 800.0;
  c.rounds = 100;
  c.trials = 20;
  c.seed = 1;
  c.scheme = Scheme::kMassiveMimo;
  c.massive_mimo.total_antennas = 16;
  c.massive_mimo.server_counts = {1, 2, 4};
  const MassiveMimoResult r = RunMassiveMimo(c);
  std::vector<int> wins;
  for (std::size_t n = 1; n < r.distributed.size(); ++n) {
    int w = 0;
    for (std::size_t t = 0; t < r.central.final_losses.size(); ++t) {
      if (r.distributed[n].final_losses[t] <= r.central.final_losses[t]) ++w;
    }
    wins.push_back(w);
  }
  const double single = std::abs(r.distributed[0].mean_loss / r.central.mean_loss - 1.0);
  const bool pass = single <= 0.10 && wins[0] >= 14 && wins[1] >= 14;
  return {pass, Format("N=2 at or below central on %d/20 seeds, N=4 on %d/20; N=1 mean differs by "
                       "%.2e (means: central %.4f, N=2 %.4f, N=4 %.4f)",
                       wins[0], wins[1], single, r.central.mean_loss, r.distributed[1].mean_loss,
                       r.distributed[2].mean_loss)};
}

Outcome GradientAndPropertySuite() {
  // Partial gradients against central differences of a reference loss.
  const double lambda = 0.01;
  const FeaturePartitionedDataset data = SyntheticDataset(71, 120, 12, 4, 0.1);
  const Mat x = data.Concatenated();
  const Vec y = LabelVector(data.labels);
  GlobalModel model = GlobalModel::Zeros(data, TaskKind::kBinaryLogistic);
  std::mt19937_64 rng(72);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (Mat& w : model.submodels) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
  }
  const Vec w = model.Flatten();
  const PredictionBlock block =
      Auxiliary(AggregateAll(model, data), data.labels, TaskKind::kBinaryLogistic);
  double grad_err = 0.0;
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < data.devices(); ++k) {
    const Mat g = AveragedPartialGradient(data.blocks[k], block.g) + lambda * model.submodels[k];
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double h = 1e-5;
      Vec up = w, down = w;
      up(offset + i) += h;
      down(offset + i) -= h;
      const double fd = (CentralLoss(x, y, up, lambda) - CentralLoss(x, y, down, lambda)) / (2 * h);
      grad_err = std::max(grad_err, std::abs(fd - g(i)) / std::max(std::abs(fd), 1e-3));
    }
    offset += g.size();
  }

  // Scaling every variance by c scales the gap by exactly c.
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  const double rho = 0.93, scale = 7.0;
  GapLedger base(rho), scaled(rho);
  std::vector<double> terms;
  for (int t = 0; t < 60; ++t) {
    GapRound r;
    r.sigma2_ul = unif(rng);
    r.sigma2_dl = Vec::NullaryExpr(4, [&] { return unif(rng); });
    r.ul_factor = Vec::NullaryExpr(4, [&] { return unif(rng); });
    r.dl_factor = Vec::NullaryExpr(4, [&] { return unif(rng); });
    terms.push_back(r.ul_factor.sum() * r.sigma2_ul + r.dl_factor.dot(r.sigma2_dl));
    GapRound s = r;
    s.sigma2_ul *= scale;
    s.sigma2_dl *= scale;
    base.Append(r);
    scaled.Append(s);
  }
  double direct = 0.0;
  for (int t = 0; t < 60; ++t) direct += std::pow(rho, 60 - t - 1) * terms[static_cast<std::size_t>(t)];
  const double b = OptimalityGap(base, rho, 60);
  const double lin_err = std::abs(OptimalityGap(scaled, rho, 60) - scale * b) / (scale * b);
  const double sum_err = std::abs(b - direct) / direct;

  // Closed-form downlink capacity against the full determinant.
  double cap_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 8;
    CVec u(n);
    Vec q(n);
    for (int i = 0; i < n; ++i) {
      u(i) = cplx(normal(rng), normal(rng));
      q(i) = std::exp(normal(rng));
    }
    const double ref = DownlinkCapacityRef(u, q);
    cap_err = std::max(cap_err, std::abs(DownlinkCapacityBits(u, q) - ref) / std::max(1.0, ref));
  }
  return {grad_err < 1e-5 && lin_err < 1e-12 && sum_err < 1e-12 && cap_err < 1e-9,
          Format("gradient error %.2e, gap linearity error %.2e, gap sum error %.2e, capacity "
                 "error %.2e",
                 grad_err, lin_err, sum_err, cap_err)};
}

}  // namespace

// Optional arguments select criteria by number; the default runs all.
int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"error-free training equals centralized gradient descent", ErrorFreeEquivalence},
      {"link noise variances and means", NoiseFormulas},
      {"gradient noise second moment", GradientNoiseMoment},
      {"log-det majorant", MajorantProperty},
      {"optimizer monotonicity, feasibility and scalar oracles", OptimizerProperties},
      {"convergence bound", ConvergenceBoundHolds},
      {"scheme ordering and large-capacity limit", TrendAtDeskScale},
      {"distributed versus co-located antennas", DistributedVersusCentral},
      {"gradients, gap linearity and capacity identity", GradientAndPropertySuite},
  };
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const int n = std::atoi(argv[a]);
    if (n >= 1 && n <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(n - 1)] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.passed) ++failed;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, out.passed ? "PASS" : "FAIL",
                criteria[i].name, out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
