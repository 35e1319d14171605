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
// Command-line front end. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vflcran/vflcran.h"

namespace {

int Report(vfl_status st) {
  std::fprintf(stderr, "error: %s: %s\n", vfl_status_string(st), vfl_last_error());
  return 1;
}

std::string Summary(const vfl_experiment* e) {
  size_t needed = 0;
  vfl_experiment_summary(e, nullptr, 0, &needed);
  std::string text(needed, '\0');
  if (vfl_experiment_summary(e, text.data(), text.size(), &needed) != VFL_OK) return {};
  text.resize(needed - 1);
  return text;
}

vfl_status Open(const std::string& config, vfl_experiment** e) {
  return config.empty() ? vfl_experiment_create("{}", e)
                        : vfl_experiment_load(config.c_str(), e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertical federated learning over AirComp Cloud-RAN"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vfl_version());

  std::string config, out;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory")->required();
  auto* run_seed = run->add_option("--seed", seed, "master seed (overrides the config)");

  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Monte-Carlo and property checks");
  verify->add_option("--seed", verify_seed, "seed for the random instances");

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "compare all schemes over one parameter");
  sweep->add_option("--param", param, "capacity (Mbps), antennas or servers")
      ->required()
      ->check(CLI::IsMember({"capacity", "antennas", "servers"}));
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sweep->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output directory");
  auto* sweep_seed = sweep->add_option("--seed", seed, "master seed (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  if (*verify) {
    int ok = 0;
    std::string report(1 << 16, '\0');
    size_t needed = 0;
    vfl_status st = vfl_verify(verify_seed, &ok, report.data(), report.size(), &needed);
    if (st == VFL_ERR_BUFFER_TOO_SMALL) {
      report.assign(needed, '\0');
      st = vfl_verify(verify_seed, &ok, report.data(), report.size(), &needed);
    }
    if (st != VFL_OK) return Report(st);
    report.resize(needed - 1);
    std::fputs(report.c_str(), stdout);
    return ok ? 0 : 2;
  }

  vfl_experiment* e = nullptr;
  vfl_status st = Open(config, &e);
  if (st != VFL_OK) return Report(st);
  if ((*run && *run_seed) || (*sweep && *sweep_seed)) vfl_experiment_set_seed(e, seed);

  if (*run) {
    st = vfl_experiment_run(e, out.c_str());
  } else {
    std::vector<double> parsed;
    for (const std::string& v : values) {
      try {
        std::size_t used = 0;
        parsed.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: bad sweep value '%s'\n", v.c_str());
        vfl_experiment_destroy(e);
        return 1;
      }
    }
    st = vfl_experiment_sweep(e, param.c_str(), parsed.data(), parsed.size(),
                              out.empty() ? nullptr : out.c_str());
  }
  if (st != VFL_OK) {
    const int code = Report(st);
    vfl_experiment_destroy(e);
    return code;
  }
  std::fputs(Summary(e).c_str(), stdout);
  vfl_experiment_destroy(e);
  return 0;
}
