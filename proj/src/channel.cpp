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
#include "vflcran/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace vflcran {

double Distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

CVec ChannelState::UplinkBlock(std::size_t k, std::size_t n) const {
  return uplink.col(static_cast<Eigen::Index>(k))
      .segment(static_cast<Eigen::Index>(n * antennas),
               static_cast<Eigen::Index>(antennas));
}

CVec ChannelState::DownlinkBlock(std::size_t k, std::size_t n) const {
  return downlink.col(static_cast<Eigen::Index>(k))
      .segment(static_cast<Eigen::Index>(n * antennas),
               static_cast<Eigen::Index>(antennas));
}

double PathLossDb(double distance_m) {
  Require(distance_m > 0.0, ErrorCode::kInvalidArgument,
          "path loss needs a positive distance");
  return 30.6 + 36.7 * std::log10(distance_m);
}

double DbToLinear(double db) { return std::pow(10.0, db / 10.0); }

double DbmToWatts(double dbm) { return DbToLinear(dbm - 30.0); }

double NoisePowerWatts(double psd_dbm_per_hz, double bandwidth_hz,
                       double noise_figure_db) {
  Require(bandwidth_hz > 0.0, ErrorCode::kInvalidArgument,
          "bandwidth must be positive");
  return DbmToWatts(psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) +
                    noise_figure_db);
}

namespace {

Point UniformInDisc(double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double phi = 2.0 * std::numbers::pi * unit(rng);
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace

Topology SampleTopology(const GeometryConfig& config, std::uint64_t seed) {
  Require(config.radius_m > 0.0, ErrorCode::kInvalidArgument,
          "radius must be positive");
  Require(config.devices > 0 && config.servers > 0,
          ErrorCode::kInvalidArgument, "need at least one device and server");
  Require(!config.central_server || config.servers == 1,
          ErrorCode::kInvalidArgument, "central layout has exactly one server");
  std::mt19937_64 rng(seed);
  Topology topo;
  topo.radius_m = config.radius_m;
  for (std::size_t k = 0; k < config.devices; ++k) {
    topo.devices.push_back(UniformInDisc(config.radius_m, rng));
  }
  for (std::size_t n = 0; n < config.servers; ++n) {
    topo.servers.push_back(config.central_server
                               ? Point{}
                               : UniformInDisc(config.radius_m, rng));
  }
  return topo;
}

ChannelState SampleChannels(const Topology& topology, std::size_t antennas,
                            double noise_power, std::uint64_t seed) {
  Require(antennas > 0, ErrorCode::kInvalidArgument, "need >= 1 antenna");
  Require(!topology.devices.empty() && !topology.servers.empty(),
          ErrorCode::kInvalidArgument, "empty topology");
  const std::size_t k_count = topology.devices.size();
  const std::size_t n_count = topology.servers.size();
  ChannelState state;
  state.servers = n_count;
  state.antennas = antennas;
  state.noise_power = noise_power;
  const auto dim = static_cast<Eigen::Index>(n_count * antennas);
  state.uplink.resize(dim, static_cast<Eigen::Index>(k_count));
  state.downlink.resize(dim, static_cast<Eigen::Index>(k_count));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (CMat* target : {&state.uplink, &state.downlink}) {
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t n = 0; n < n_count; ++n) {
        const double d = std::max(
            Distance(topology.devices[k], topology.servers[n]),
            kMinPathLossDistance);
        const double amp = std::sqrt(DbToLinear(-PathLossDb(d)));
        for (std::size_t m = 0; m < antennas; ++m) {
          const double re = normal(rng);
          const double im = normal(rng);
          (*target)(static_cast<Eigen::Index>(n * antennas + m),
                    static_cast<Eigen::Index>(k)) = amp * cplx(re, im);
        }
      }
    }
  }
  return state;
}

}  // namespace vflcran
