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
#include <optional>

#include "vflcran/datasets.hpp"
#include "vflcran/gap_analysis.hpp"
#include "vflcran/scenario.hpp"

namespace vflcran {

namespace {

struct SchemeState {
  Scheme scheme;
  GlobalModel model;
  GapLedger ledger;
  std::vector<RoundTrace> trace;
};

SignalBlock Prepare(const Mat& raw, NormMode mode, bool normalize) {
  if (normalize) return NormalizeBlock(raw, mode);
  SignalBlock block;
  block.values = raw;
  block.mode = mode;
  block.norms.assign(static_cast<std::size_t>(raw.cols()), StreamNorm{});
  return block;
}

// One training round over the simulated links.
RoundTrace NoisyRound(const ExperimentConfig& config, const DataSplit& data,
                      const LossSpec& spec, const DesignPair& design,
                      const ChannelState& channels, std::uint64_t noise_seed,
                      int t, SchemeState* state) {
  const FeaturePartitionedDataset& train = data.train;
  const std::size_t devices = train.devices();
  const auto samples = static_cast<Eigen::Index>(train.samples());
  const int streams = StreamsPerSample(spec.task, train.num_classes);

  std::vector<Mat> local(devices);
  Mat s_true = Mat::Zero(samples, streams);
  for (std::size_t k = 0; k < devices; ++k) {
    local[k] = LocalPredictions(state->model, train, k);
    s_true += local[k];
  }
  const NoiseFactors factors = ComputeNoiseFactors(train, Auxiliary(s_true, train.labels, spec.task));

  // Uplink: every stream is an over-the-air sum under a shared scale.
  Mat s_hat(samples, streams);
  double ul_gain = 0.0;
  for (int c = 0; c < streams; ++c) {
    Mat raw(samples, static_cast<Eigen::Index>(devices));
    for (std::size_t k = 0; k < devices; ++k) {
      raw.col(static_cast<Eigen::Index>(k)) = local[k].col(c);
    }
    const SignalBlock block =
        Prepare(raw, NormMode::kSharedScale, config.normalize_signals);
    const Vec received = UplinkRound(block.values, design.uplink, channels.uplink,
                                     channels.noise_power, DeriveSeed(noise_seed, 0, c));
    s_hat.col(c) = DenormalizeSum(block, received);
    const double scale = block.norms.empty() ? 1.0 : block.norms.front().scale;
    ul_gain += scale * scale;
  }

  const PredictionBlock aux = Auxiliary(s_hat, train.labels, spec.task);

  // Downlink: each auxiliary stream is broadcast on its own.
  std::vector<Mat> g_dev(devices, Mat(samples, streams));
  double dl_gain = 0.0;
  for (int c = 0; c < streams; ++c) {
    const SignalBlock block =
        Prepare(aux.g.col(c), NormMode::kPerStream, config.normalize_signals);
    const Mat received =
        DownlinkRound(block.values.col(0), design.downlink, channels.downlink,
                      channels.noise_power, DeriveSeed(noise_seed, 1, c));
    const StreamNorm& nm = block.norms.front();
    for (std::size_t k = 0; k < devices; ++k) {
      g_dev[k].col(c) =
          (received.col(static_cast<Eigen::Index>(k)).array() * nm.scale + nm.offset)
              .matrix();
    }
    dl_gain += nm.scale * nm.scale;
  }

  for (std::size_t k = 0; k < devices; ++k) {
    state->model.submodels[k] =
        GdStep(state->model.submodels[k], AveragedPartialGradient(train.blocks[k], g_dev[k]),
               spec.lambda, spec.learning_rate);
  }

  GapRound gr;
  gr.sigma2_ul = design.sigma2_ul * ul_gain / streams;
  gr.sigma2_dl = design.sigma2_dl * (dl_gain / streams);
  gr.ul_factor = factors.ul_factor;
  gr.dl_factor = factors.dl_factor;
  RoundTrace row;
  row.round = t + 1;
  row.sigma2_ul = gr.sigma2_ul;
  row.mean_sigma2_dl = gr.sigma2_dl.mean();
  row.gap = state->ledger.Append(std::move(gr));
  row.loss = GlobalLoss(state->model, train, spec);
  row.accuracy = Accuracy(state->model, data.test.samples() > 0 ? data.test : train,
                          spec.task);
  return row;
}

}  // namespace

ExperimentResult RunSchemes(const ExperimentConfig& config,
                            const std::vector<Scheme>& schemes) {
  config.Validate();
  Require(!schemes.empty(), ErrorCode::kInvalidArgument, "no schemes to run");
  for (Scheme s : schemes) {
    Require(s != Scheme::kMassiveMimo, ErrorCode::kInvalidArgument,
            "massive-mimo runs through RunMassiveMimo");
  }
  const LinkBudget budget = BudgetFromConfig(config);
  GeometryConfig geometry;
  geometry.devices = static_cast<std::size_t>(config.devices);
  geometry.servers = static_cast<std::size_t>(config.servers);
  geometry.radius_m = config.radius_m;
  geometry.central_server = config.central_server;

  ExperimentResult result;
  result.capacity_bits = budget.capacity_bits;
  for (int trial = 0; trial < config.trials; ++trial) {
    const auto tr = static_cast<std::uint64_t>(trial);
    const DataSplit data = BuildDataset(config, DeriveSeed(config.seed, 1, tr));
    const ConvergenceConstants cc =
        ContractionConstants(data.train, config.lambda, config.dataset.task);
    LossSpec spec;
    spec.task = config.dataset.task;
    spec.lambda = config.lambda;
    spec.learning_rate = config.learning_rate > 0.0 ? config.learning_rate : cc.mu;
    spec.Validate();
    const double rho = 1.0 - spec.learning_rate * cc.alpha;
    const GlobalModel zero = GlobalModel::Zeros(data.train, spec.task);
    const double initial_loss = GlobalLoss(zero, data.train, spec);

    std::vector<SchemeState> states;
    bool any_link = false;
    for (Scheme s : schemes) {
      if (s == Scheme::kErrorFree) {
        GlobalModel model = zero;
        TrialResult r{s, trial,
                      TrainErrorFree(data.train, spec, config.rounds, &model,
                                     data.test.samples() > 0 ? &data.test : nullptr),
                      initial_loss};
        for (RoundTrace& row : r.trace) row.wall_seconds = 0.0;
        result.trials.push_back(std::move(r));
      } else {
        states.push_back({s, zero, GapLedger(rho), {}});
        any_link = true;
      }
    }
    if (!any_link) continue;

    const Topology topo = SampleTopology(geometry, DeriveSeed(config.seed, 2, tr));
    const Vec dl_factor =
        ComputeNoiseFactors(data.train,
                        Auxiliary(AggregateAll(zero, data.train), data.train.labels,
                                  spec.task))
            .dl_factor;
    std::optional<ChannelState> channels;
    std::optional<DesignSet> designs;
    for (int t = 0; t < config.rounds; ++t) {
      const auto tt = static_cast<std::uint64_t>(t);
      if (!channels || !config.freeze_designs) {
        designs.reset();
        channels = SampleChannels(topo, static_cast<std::size_t>(config.antennas),
                                  config.NoisePower(), DeriveSeed(config.seed, 3, tr, tt));
        designs.emplace(*channels, budget, dl_factor);
      }
      const std::uint64_t noise_seed = DeriveSeed(config.seed, 4, tr, tt);
      for (SchemeState& st : states) {
        st.trace.push_back(NoisyRound(config, data, spec, designs->Get(st.scheme),
                                      *channels, noise_seed, t, &st));
      }
    }
    for (SchemeState& st : states) {
      result.trials.push_back({st.scheme, trial, std::move(st.trace), initial_loss});
    }
  }
  // Keep scheme order as requested, trials ascending within a scheme.
  std::vector<TrialResult> ordered;
  for (Scheme s : schemes) {
    for (TrialResult& r : result.trials) {
      if (r.scheme == s) ordered.push_back(std::move(r));
    }
  }
  result.trials = std::move(ordered);
  result.summary = Summarize(result.trials);
  return result;
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  Require(config.scheme != Scheme::kMassiveMimo, ErrorCode::kInvalidArgument,
          "use RunMassiveMimo for the massive-mimo scheme");
  return RunSchemes(config, {config.scheme});
}

std::vector<SchemeSummary> Summarize(const std::vector<TrialResult>& trials) {
  std::vector<SchemeSummary> out;
  auto stats = [](const std::vector<double>& v, double* mean, double* sd) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    *mean = m;
    *sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  for (const TrialResult& r : trials) {
    bool seen = false;
    for (const SchemeSummary& s : out) seen = seen || s.scheme == r.scheme;
    if (seen) continue;
    std::vector<double> loss, acc, gap;
    for (const TrialResult& q : trials) {
      if (q.scheme != r.scheme) continue;
      const RoundTrace last = q.trace.empty() ? RoundTrace{} : q.trace.back();
      loss.push_back(q.trace.empty() ? q.initial_loss : last.loss);
      acc.push_back(last.accuracy);
      gap.push_back(last.gap);
    }
    SchemeSummary s;
    s.scheme = r.scheme;
    stats(loss, &s.mean_loss, &s.std_loss);
    stats(acc, &s.mean_accuracy, &s.std_accuracy);
    stats(gap, &s.mean_gap, &s.std_gap);
    out.push_back(s);
  }
  return out;
}

}  // namespace vflcran
