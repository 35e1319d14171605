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
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "vflcran/scenario.hpp"

namespace vflcran {

namespace {

LayoutResult RunLayout(ExperimentConfig config, const std::string& name, int servers,
                       int antennas, bool central) {
  config.servers = servers;
  config.antennas = antennas;
  config.central_server = central;
  config.capacity_mbps = std::numeric_limits<double>::infinity();
  config.scheme = Scheme::kJoint;
  const ExperimentResult r = RunSchemes(config, {Scheme::kJoint});
  LayoutResult out;
  out.name = name;
  out.servers = servers;
  out.antennas_per_server = antennas;
  for (const TrialResult& t : r.trials) {
    out.final_losses.push_back(t.trace.empty() ? t.initial_loss : t.trace.back().loss);
  }
  out.mean_loss = r.summary.front().mean_loss;
  return out;
}

nlohmann::ordered_json LayoutJson(const LayoutResult& l) {
  return {{"name", l.name},
          {"servers", l.servers},
          {"antennas_per_server", l.antennas_per_server},
          {"mean_loss", l.mean_loss},
          {"final_losses", l.final_losses}};
}

}  // namespace

// Every layout reuses the master seed, so data, device positions and noise
// seeds are paired across layouts trial by trial.
MassiveMimoResult RunMassiveMimo(const ExperimentConfig& config) {
  config.Validate();
  const int total = config.massive_mimo.total_antennas;
  MassiveMimoResult result;
  result.central = RunLayout(config, "central", 1, total, true);
  for (int n : config.massive_mimo.server_counts) {
    Require(n > 0 && total % n == 0, ErrorCode::kInvalidArgument,
            "total antennas must divide evenly over the servers");
    // A single Cloud-RAN server sits at the centre, i.e. the co-located layout.
    result.distributed.push_back(
        RunLayout(config, "cran-" + std::to_string(n), n, total / n, n == 1));
  }
  return result;
}

std::string MassiveMimoJson(const MassiveMimoResult& result) {
  nlohmann::ordered_json j;
  j["central"] = LayoutJson(result.central);
  j["distributed"] = nlohmann::ordered_json::array();
  for (const LayoutResult& l : result.distributed) j["distributed"].push_back(LayoutJson(l));
  return j.dump(2) + "\n";
}

SweepParam ParseSweepParam(const std::string& name) {
  if (name == "capacity") return SweepParam::kCapacity;
  if (name == "antennas") return SweepParam::kAntennas;
  if (name == "servers") return SweepParam::kServers;
  throw Error(ErrorCode::kInvalidArgument, "unknown sweep parameter: " + name);
}

namespace {

const char* ParamName(SweepParam p) {
  switch (p) {
    case SweepParam::kCapacity: return "capacity";
    case SweepParam::kAntennas: return "antennas";
    case SweepParam::kServers: return "servers";
  }
  return "?";
}

int AsCount(double v) {
  Require(v >= 1.0 && std::floor(v) == v, ErrorCode::kInvalidArgument,
          "antenna and server counts must be positive integers");
  return static_cast<int>(v);
}

}  // namespace

// Capacity values are in Mbps like the config field; "inf" comes in as +inf.
std::vector<SweepPoint> RunSweep(const ExperimentConfig& config, SweepParam param,
                                 const std::vector<double>& values,
                                 const std::string& directory) {
  Require(!values.empty(), ErrorCode::kInvalidArgument, "sweep needs values");
  Require(config.scheme != Scheme::kMassiveMimo, ErrorCode::kInvalidArgument,
          "sweeps compare the joint design with the baselines");
  const std::vector<Scheme> schemes = {Scheme::kJoint, Scheme::kBaseline1,
                                       Scheme::kBaseline2, Scheme::kBaseline3,
                                       Scheme::kErrorFree};
  std::vector<SweepPoint> points;
  for (double v : values) {
    ExperimentConfig c = config;
    switch (param) {
      case SweepParam::kCapacity: c.capacity_mbps = v; break;
      case SweepParam::kAntennas: c.antennas = AsCount(v); break;
      case SweepParam::kServers: c.servers = AsCount(v); break;
    }
    const ExperimentResult r = RunSchemes(c, schemes);
    if (!directory.empty()) {
      char sub[64];
      std::snprintf(sub, sizeof sub, "%s_%g", ParamName(param), v);
      WriteOutputs(r, c, (std::filesystem::path(directory) / sub).string());
    }
    points.push_back({v, r.summary});
  }
  if (!directory.empty()) {
    std::filesystem::create_directories(directory);
    std::ofstream out(std::filesystem::path(directory) / "sweep.json", std::ios::binary);
    Require(out.good(), ErrorCode::kIo, "cannot write sweep.json");
    out << SweepJson(param, points);
  }
  return points;
}

std::string SweepJson(SweepParam param, const std::vector<SweepPoint>& points) {
  nlohmann::ordered_json j;
  j["param"] = ParamName(param);
  j["points"] = nlohmann::ordered_json::array();
  for (const SweepPoint& p : points) {
    nlohmann::ordered_json row;
    row["value"] = std::isfinite(p.value) ? nlohmann::ordered_json(p.value)
                                          : nlohmann::ordered_json("inf");
    row["schemes"] = nlohmann::ordered_json::array();
    for (const SchemeSummary& s : p.summary) {
      row["schemes"].push_back({{"scheme", SchemeName(s.scheme)},
                                {"mean_loss", s.mean_loss},
                                {"std_loss", s.std_loss},
                                {"mean_accuracy", s.mean_accuracy},
                                {"mean_gap", s.mean_gap}});
    }
    j["points"].push_back(row);
  }
  return j.dump(2) + "\n";
}

}  // namespace vflcran
