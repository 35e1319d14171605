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
#ifndef VFLCRAN_SCENARIO_HPP_
#define VFLCRAN_SCENARIO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vflcran/aircomp_link.hpp"
#include "vflcran/channel.hpp"
#include "vflcran/config.hpp"
#include "vflcran/core_model.hpp"

namespace vflcran {

struct LinkBudget {
  double p_ul = 0.0;  // watts
  double p_dl = 0.0;  // watts
  double capacity_bits = 0.0;
};

LinkBudget BudgetFromConfig(const ExperimentConfig& config);

struct DesignPair {
  UplinkDesign uplink;
  DownlinkDesign downlink;
  double sigma2_ul = 0.0;
  Vec sigma2_dl;
  double uplink_objective = 0.0;    // sigma2_UL times the device count
  double downlink_objective = 0.0;  // sum_k dl_factor_k sigma2_DL,k
};

// Transceiver designs for one channel draw. Baseline 1 is uniform beamforming
// with isotropic quantization; Baselines 2 and 3 optimize one block from it;
// the joint design runs both optimizers and keeps the best of the default
// start and restarts from Baselines 2/3.
class DesignSet {
 public:
  DesignSet(const ChannelState& channels, const LinkBudget& budget,
            const Vec& dl_factor);

  const DesignPair& Get(Scheme scheme);

 private:
  const ChannelState& channels_;
  LinkBudget budget_;
  Vec dl_factor_;
  std::map<Scheme, DesignPair> cache_;
};

DesignPair BaselineDesign(const ChannelState& channels, Scheme scheme,
                          const LinkBudget& budget, const Vec& dl_factor);

struct TrialResult {
  Scheme scheme = Scheme::kJoint;
  int trial = 0;
  std::vector<RoundTrace> trace;
  double initial_loss = 0.0;
};

struct SchemeSummary {
  Scheme scheme = Scheme::kJoint;
  double mean_loss = 0.0, std_loss = 0.0;
  double mean_accuracy = 0.0, std_accuracy = 0.0;
  double mean_gap = 0.0, std_gap = 0.0;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::vector<SchemeSummary> summary;
  double capacity_bits = 0.0;
};

// Runs the listed schemes in lockstep: every scheme sees the same data,
// geometry, channel draws and noise seeds in a given (trial, round).
ExperimentResult RunSchemes(const ExperimentConfig& config,
                            const std::vector<Scheme>& schemes);

// config.scheme only; massive-mimo dispatches to RunMassiveMimo.
ExperimentResult RunExperiment(const ExperimentConfig& config);

std::vector<SchemeSummary> Summarize(const std::vector<TrialResult>& trials);

// One CSV per trial (t, loss, accuracy, sigma2_ul, mean_sigma2_dl, B_t) and a
// summary.json. Byte-identical for identical inputs.
void WriteOutputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& directory);
std::string TraceCsv(const std::vector<RoundTrace>& trace);
std::string SummaryJson(const ExperimentResult& result,
                        const ExperimentConfig& config);

struct LayoutResult {
  std::string name;  // "central" or "cran-N"
  int servers = 1;
  int antennas_per_server = 0;
  std::vector<double> final_losses;  // one per trial, paired by seed
  double mean_loss = 0.0;
};

struct MassiveMimoResult {
  LayoutResult central;
  std::vector<LayoutResult> distributed;
};

// Centralized base station with all antennas at the disc centre against
// N edge servers with total/N antennas each, all without quantization.
MassiveMimoResult RunMassiveMimo(const ExperimentConfig& config);
std::string MassiveMimoJson(const MassiveMimoResult& result);

enum class SweepParam { kCapacity, kAntennas, kServers };
SweepParam ParseSweepParam(const std::string& name);

struct SweepPoint {
  double value = 0.0;
  std::vector<SchemeSummary> summary;
};

std::vector<SweepPoint> RunSweep(const ExperimentConfig& config, SweepParam param,
                                 const std::vector<double>& values,
                                 const std::string& directory = "");
std::string SweepJson(SweepParam param, const std::vector<SweepPoint>& points);

// Quick Monte-Carlo and property checks behind the CLI verify command.
struct VerifyItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<VerifyItem> RunVerification(std::uint64_t seed);

}  // namespace vflcran

#endif  // VFLCRAN_SCENARIO_HPP_
