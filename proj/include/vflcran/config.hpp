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
#ifndef VFLCRAN_CONFIG_HPP_
#define VFLCRAN_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vflcran/core_model.hpp"

namespace vflcran {

enum class Scheme {
  kJoint,
  kBaseline1,
  kBaseline2,
  kBaseline3,
  kErrorFree,
  kMassiveMimo,
};

std::string SchemeName(Scheme scheme);
Scheme ParseScheme(const std::string& name);

enum class DatasetKind { kSynthetic, kFashionMnist };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSynthetic;
  TaskKind task = TaskKind::kBinaryLogistic;
  // Synthetic: training samples, feature count, label noise, held-out share.
  int samples = 500;
  int features = 32;
  double margin_noise = 0.1;
  double test_fraction = 0.2;
  // Fashion-MNIST IDX files. Binary mode labels positive_class as 1.
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  int positive_class = 0;
  int max_samples = 0;  // 0 keeps every training image
};

struct MassiveMimoConfig {
  int total_antennas = 16;
  std::vector<int> server_counts = {1, 2, 4};
};

struct ExperimentConfig {
  int devices = 8;
  int servers = 4;
  int antennas = 2;
  double capacity_mbps = 200.0;  // +inf disables quantization
  double symbol_rate_msps = 10.0;
  double p_ul_dbm = 23.0;
  double p_dl_dbm = 100.0;
  double noise_psd_dbm_hz = -169.0;
  double noise_figure_db = 7.0;
  double bandwidth_hz = 10e6;
  double radius_m = 500.0;
  bool central_server = false;
  DatasetConfig dataset;
  double lambda = 0.01;
  double learning_rate = 0.0;  // 0 means 1 / beta
  int rounds = 100;
  int trials = 1;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::kJoint;
  bool normalize_signals = true;
  // Hold channels and designs fixed within a trial (drawn at round 0).
  bool freeze_designs = false;
  MassiveMimoConfig massive_mimo;

  double CapacityBits() const { return capacity_mbps / symbol_rate_msps; }
  double NoisePower() const;
  double UplinkPowerWatts() const;
  double DownlinkPowerWatts() const;
  void Validate() const;
};

// JSON object mirroring ExperimentConfig. Unknown keys, wrong types and
// invalid values raise ErrorCode::kConfig. capacity_mbps accepts "inf";
// learning_rate accepts "auto".
ExperimentConfig ParseConfig(const std::string& json_text);
ExperimentConfig LoadConfig(const std::string& path);
std::string ConfigToJson(const ExperimentConfig& config);

}  // namespace vflcran

#endif  // VFLCRAN_CONFIG_HPP_
