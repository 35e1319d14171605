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
#include "vflcran/vflcran.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "json.hpp"
#include "vflcran/scenario.hpp"

struct vfl_experiment {
  vflcran::ExperimentConfig config;
  std::string summary;
};

namespace {

thread_local std::string last_error;

vfl_status Fail(vfl_status status, const std::string& message) {
  last_error = message;
  return status;
}

vfl_status FromCode(vflcran::ErrorCode code) {
  using vflcran::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return VFL_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return VFL_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kDegenerate: return VFL_ERR_DEGENERATE;
    case ErrorCode::kInfeasible: return VFL_ERR_INFEASIBLE;
    case ErrorCode::kNumerical: return VFL_ERR_NUMERICAL;
    case ErrorCode::kConfig: return VFL_ERR_CONFIG;
    case ErrorCode::kIo: return VFL_ERR_IO;
    case ErrorCode::kDataset: return VFL_ERR_DATASET;
  }
  return VFL_ERR_INTERNAL;
}

template <typename Fn>
vfl_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return VFL_OK;
  } catch (const vflcran::Error& e) {
    return Fail(FromCode(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(VFL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(VFL_ERR_INTERNAL, e.what());
  }
}

vfl_status CopyOut(const std::string& text, char* buffer, size_t capacity,
                   size_t* needed) {
  if (needed != nullptr) *needed = text.size() + 1;
  if (buffer == nullptr || capacity < text.size() + 1) {
    return Fail(VFL_ERR_BUFFER_TOO_SMALL, "buffer too small");
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return VFL_OK;
}

}  // namespace

extern "C" {

const char* vfl_version(void) { return "0.1.0"; }

const char* vfl_status_string(vfl_status status) {
  switch (status) {
    case VFL_OK: return "ok";
    case VFL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VFL_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case VFL_ERR_DEGENERATE: return "degenerate input";
    case VFL_ERR_INFEASIBLE: return "infeasible";
    case VFL_ERR_NUMERICAL: return "numerical failure";
    case VFL_ERR_CONFIG: return "config error";
    case VFL_ERR_IO: return "i/o error";
    case VFL_ERR_DATASET: return "dataset error";
    case VFL_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case VFL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* vfl_last_error(void) { return last_error.c_str(); }

vfl_status vfl_experiment_create(const char* config_json, vfl_experiment** out) {
  if (config_json == nullptr || out == nullptr) {
    return Fail(VFL_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return Guard([&] {
    auto* e = new vfl_experiment{vflcran::ParseConfig(config_json), {}};
    *out = e;
  });
}

vfl_status vfl_experiment_load(const char* config_path, vfl_experiment** out) {
  if (config_path == nullptr || out == nullptr) {
    return Fail(VFL_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return Guard([&] {
    auto* e = new vfl_experiment{vflcran::LoadConfig(config_path), {}};
    *out = e;
  });
}

void vfl_experiment_destroy(vfl_experiment* experiment) { delete experiment; }

vfl_status vfl_experiment_set_seed(vfl_experiment* experiment, uint64_t seed) {
  if (experiment == nullptr) return Fail(VFL_ERR_INVALID_ARGUMENT, "null handle");
  experiment->config.seed = seed;
  return VFL_OK;
}

vfl_status vfl_experiment_run(vfl_experiment* experiment, const char* out_dir) {
  if (experiment == nullptr) return Fail(VFL_ERR_INVALID_ARGUMENT, "null handle");
  return Guard([&] {
    const vflcran::ExperimentConfig& c = experiment->config;
    if (c.scheme == vflcran::Scheme::kMassiveMimo) {
      experiment->summary = vflcran::MassiveMimoJson(vflcran::RunMassiveMimo(c));
      if (out_dir != nullptr) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / "massive_mimo.json",
                        std::ios::binary);
        vflcran::Require(f.good(), vflcran::ErrorCode::kIo,
                         "cannot write massive_mimo.json");
        f << experiment->summary;
      }
      return;
    }
    const vflcran::ExperimentResult r = vflcran::RunExperiment(c);
    if (out_dir != nullptr) vflcran::WriteOutputs(r, c, out_dir);
    experiment->summary = vflcran::SummaryJson(r, c);
  });
}

vfl_status vfl_experiment_summary(const vfl_experiment* experiment, char* buffer,
                                  size_t capacity, size_t* needed) {
  if (experiment == nullptr) return Fail(VFL_ERR_INVALID_ARGUMENT, "null handle");
  if (experiment->summary.empty()) {
    return Fail(VFL_ERR_INVALID_ARGUMENT, "nothing has been run yet");
  }
  return CopyOut(experiment->summary, buffer, capacity, needed);
}

vfl_status vfl_experiment_sweep(vfl_experiment* experiment, const char* param,
                                const double* values, size_t count,
                                const char* out_dir) {
  if (experiment == nullptr || param == nullptr || (values == nullptr && count > 0)) {
    return Fail(VFL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] {
    const vflcran::SweepParam p = vflcran::ParseSweepParam(param);
    const std::vector<double> v(values, values + count);
    const auto points =
        vflcran::RunSweep(experiment->config, p, v, out_dir != nullptr ? out_dir : "");
    experiment->summary = vflcran::SweepJson(p, points);
  });
}

vfl_status vfl_verify(uint64_t seed, int* all_passed, char* buffer, size_t capacity,
                      size_t* needed) {
  std::string report;
  const vfl_status st = Guard([&] {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    bool ok = true;
    for (const vflcran::VerifyItem& item : vflcran::RunVerification(seed)) {
      ok = ok && item.passed;
      j.push_back({{"name", item.name}, {"passed", item.passed}, {"detail", item.detail}});
    }
    if (all_passed != nullptr) *all_passed = ok ? 1 : 0;
    report = j.dump(2) + "\n";
  });
  if (st != VFL_OK) return st;
  return CopyOut(report, buffer, capacity, needed);
}

}  // extern "C"
