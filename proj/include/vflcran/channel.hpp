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
#ifndef VFLCRAN_CHANNEL_HPP_
#define VFLCRAN_CHANNEL_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vflcran/common.hpp"

namespace vflcran {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double Distance(const Point& a, const Point& b);

struct GeometryConfig {
  std::size_t devices = 8;
  std::size_t servers = 4;
  double radius_m = 500.0;
  // Place a single server at the disc centre (co-located massive-MIMO BS).
  bool central_server = false;
};

struct Topology {
  std::vector<Point> devices;
  std::vector<Point> servers;
  double radius_m = 0.0;
};

// Channel vectors are stored as columns of NM x K matrices, server-major:
// rows [n*M, (n+1)*M) belong to edge server n.
struct ChannelState {
  CMat uplink;
  CMat downlink;
  double noise_power = 0.0;  // sigma_z^2 in watts
  std::size_t servers = 0;
  std::size_t antennas = 0;

  std::size_t devices() const { return static_cast<std::size_t>(uplink.cols()); }
  std::size_t dim() const { return servers * antennas; }
  // Per-server slice of a device channel.
  CVec UplinkBlock(std::size_t k, std::size_t n) const;
  CVec DownlinkBlock(std::size_t k, std::size_t n) const;
};

// Distances below this are evaluated at the clamp; the log-distance model is
// not meant for the near field.
inline constexpr double kMinPathLossDistance = 1.0;

double PathLossDb(double distance_m);
double DbToLinear(double db);
double DbmToWatts(double dbm);
// sigma_z^2 = 10^((psd + 10 log10(BW) + NF - 30) / 10) watts.
double NoisePowerWatts(double psd_dbm_per_hz, double bandwidth_hz,
                       double noise_figure_db);

Topology SampleTopology(const GeometryConfig& config, std::uint64_t seed);

// Each antenna coefficient is sqrt(10^(-PL/10)) * CN(0, 1); uplink and
// downlink are independent draws.
ChannelState SampleChannels(const Topology& topology, std::size_t antennas,
                            double noise_power, std::uint64_t seed);

}  // namespace vflcran

#endif  // VFLCRAN_CHANNEL_HPP_
