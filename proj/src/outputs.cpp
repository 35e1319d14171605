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

#include "json.hpp"

#include "vflcran/scenario.hpp"

namespace vflcran {

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  Require(out.good(), ErrorCode::kIo, "write failed for " + path.string());
}

nlohmann::ordered_json SummaryObject(const SchemeSummary& s) {
  nlohmann::ordered_json j;
  j["scheme"] = SchemeName(s.scheme);
  j["final_loss"] = {{"mean", s.mean_loss}, {"std", s.std_loss}};
  j["accuracy"] = {{"mean", s.mean_accuracy}, {"std", s.std_accuracy}};
  j["gap"] = {{"mean", s.mean_gap}, {"std", s.std_gap}};
  return j;
}

}  // namespace

std::string TraceCsv(const std::vector<RoundTrace>& trace) {
  std::string out = "t,loss,accuracy,sigma2_ul,mean_sigma2_dl,B_t\n";
  for (const RoundTrace& r : trace) {
    out += std::to_string(r.round) + ',' + Num(r.loss) + ',' + Num(r.accuracy) + ',' +
           Num(r.sigma2_ul) + ',' + Num(r.mean_sigma2_dl) + ',' + Num(r.gap) + '\n';
  }
  return out;
}

std::string SummaryJson(const ExperimentResult& result,
                        const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(ConfigToJson(config));
  j["capacity_bits"] = std::isfinite(result.capacity_bits)
                           ? nlohmann::ordered_json(result.capacity_bits)
                           : nlohmann::ordered_json("inf");
  j["schemes"] = nlohmann::ordered_json::array();
  for (const SchemeSummary& s : result.summary) j["schemes"].push_back(SummaryObject(s));
  j["trials"] = nlohmann::ordered_json::array();
  for (const TrialResult& r : result.trials) {
    j["trials"].push_back({{"scheme", SchemeName(r.scheme)},
                           {"trial", r.trial},
                           {"initial_loss", r.initial_loss},
                           {"final_loss", r.trace.empty() ? r.initial_loss
                                                          : r.trace.back().loss},
                           {"final_accuracy", r.trace.empty() ? 0.0
                                                              : r.trace.back().accuracy},
                           {"final_gap", r.trace.empty() ? 0.0 : r.trace.back().gap}});
  }
  return j.dump(2) + "\n";
}

void WriteOutputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  Require(!ec && fs::is_directory(directory), ErrorCode::kIo,
          "cannot create output directory " + directory);
  bool multi = false;
  for (const TrialResult& r : result.trials) {
    multi = multi || r.scheme != result.trials.front().scheme;
  }
  for (const TrialResult& r : result.trials) {
    char name[64];
    std::snprintf(name, sizeof name, "trial_%03d.csv", r.trial);
    const std::string file = multi ? SchemeName(r.scheme) + "_" + name : name;
    WriteText(fs::path(directory) / file, TraceCsv(r.trace));
  }
  WriteText(fs::path(directory) / "summary.json", SummaryJson(result, config));
}

}  // namespace vflcran
