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
#include "vflcran/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vflcran/channel.hpp"

namespace vflcran {

namespace {

using nlohmann::json;

void RejectUnknown(const json& obj, const std::set<std::string>& allowed,
                   const std::string& where) {
  for (const auto& item : obj.items()) {
    Require(allowed.count(item.key()) > 0, ErrorCode::kConfig,
            "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void Read(const json& obj, const char* key, T* out) {
  if (!obj.contains(key)) return;
  try {
    *out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, std::string("bad type for '") + key + "'");
  }
}

void ReadNumberOrWord(const json& obj, const char* key, const char* word,
                      double word_value, double* out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (v.is_string()) {
    Require(v.get<std::string>() == word, ErrorCode::kConfig,
            std::string("'") + key + "' must be a number or \"" + word + "\"");
    *out = word_value;
    return;
  }
  Require(v.is_number(), ErrorCode::kConfig,
          std::string("'") + key + "' must be a number");
  *out = v.get<double>();
}

TaskKind ParseTask(const std::string& s) {
  if (s == "binary") return TaskKind::kBinaryLogistic;
  if (s == "multiclass") return TaskKind::kSoftmax;
  throw Error(ErrorCode::kConfig, "task must be binary or multiclass");
}

std::string TaskName(TaskKind t) {
  return t == TaskKind::kBinaryLogistic ? "binary" : "multiclass";
}

DatasetConfig ParseDataset(const json& obj) {
  Require(obj.is_object(), ErrorCode::kConfig, "dataset must be an object");
  RejectUnknown(obj,
                {"kind", "task", "samples", "features", "margin_noise",
                 "test_fraction", "train_images", "train_labels", "test_images",
                 "test_labels", "positive_class", "max_samples"},
                "dataset");
  DatasetConfig d;
  std::string kind = "synthetic";
  Read(obj, "kind", &kind);
  if (kind == "synthetic") {
    d.kind = DatasetKind::kSynthetic;
  } else if (kind == "fashion_mnist") {
    d.kind = DatasetKind::kFashionMnist;
    d.task = TaskKind::kSoftmax;
  } else {
    throw Error(ErrorCode::kConfig, "dataset kind must be synthetic or fashion_mnist");
  }
  if (obj.contains("task")) {
    std::string task;
    Read(obj, "task", &task);
    d.task = ParseTask(task);
  }
  Read(obj, "samples", &d.samples);
  Read(obj, "features", &d.features);
  Read(obj, "margin_noise", &d.margin_noise);
  Read(obj, "test_fraction", &d.test_fraction);
  Read(obj, "train_images", &d.train_images);
  Read(obj, "train_labels", &d.train_labels);
  Read(obj, "test_images", &d.test_images);
  Read(obj, "test_labels", &d.test_labels);
  Read(obj, "positive_class", &d.positive_class);
  Read(obj, "max_samples", &d.max_samples);
  return d;
}

}  // namespace

std::string SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kJoint: return "joint";
    case Scheme::kBaseline1: return "baseline1";
    case Scheme::kBaseline2: return "baseline2";
    case Scheme::kBaseline3: return "baseline3";
    case Scheme::kErrorFree: return "error-free";
    case Scheme::kMassiveMimo: return "massive-mimo";
  }
  return "unknown";
}

Scheme ParseScheme(const std::string& name) {
  for (Scheme s : {Scheme::kJoint, Scheme::kBaseline1, Scheme::kBaseline2,
                   Scheme::kBaseline3, Scheme::kErrorFree, Scheme::kMassiveMimo}) {
    if (SchemeName(s) == name) return s;
  }
  throw Error(ErrorCode::kConfig, "unknown scheme '" + name + "'");
}

double ExperimentConfig::NoisePower() const {
  return NoisePowerWatts(noise_psd_dbm_hz, bandwidth_hz, noise_figure_db);
}
double ExperimentConfig::UplinkPowerWatts() const { return DbmToWatts(p_ul_dbm); }
double ExperimentConfig::DownlinkPowerWatts() const { return DbmToWatts(p_dl_dbm); }

void ExperimentConfig::Validate() const {
  auto check = [](bool c, const std::string& what) {
    Require(c, ErrorCode::kConfig, what);
  };
  check(devices >= 1 && servers >= 1 && antennas >= 1,
        "devices, servers and antennas must be >= 1");
  check(capacity_mbps > 0.0, "capacity must be positive");
  check(symbol_rate_msps > 0.0 && std::isfinite(symbol_rate_msps),
        "symbol rate must be positive");
  check(std::isfinite(p_ul_dbm) && std::isfinite(p_dl_dbm), "powers must be finite");
  check(bandwidth_hz > 0.0, "bandwidth must be positive");
  check(radius_m > 0.0, "radius must be positive");
  check(!central_server || servers == 1, "central_server needs servers = 1");
  check(lambda > 0.0, "lambda must be positive");
  check(learning_rate >= 0.0, "learning rate must be positive or auto");
  check(rounds >= 1, "rounds must be >= 1");
  check(trials >= 1, "trials must be >= 1");
  const DatasetConfig& d = dataset;
  if (d.kind == DatasetKind::kSynthetic) {
    check(d.samples >= 1 && d.features >= 1, "dataset sizes must be positive");
    check(d.features % devices == 0, "devices must divide the feature count");
    check(d.task == TaskKind::kBinaryLogistic, "synthetic data is binary");
    check(d.margin_noise >= 0.0, "margin noise must be nonnegative");
    check(d.test_fraction >= 0.0 && d.test_fraction < 1.0,
          "test fraction must lie in [0, 1)");
  } else {
    check(!d.train_images.empty() && !d.train_labels.empty(),
          "fashion_mnist needs train_images and train_labels");
    check(d.positive_class >= 0 && d.positive_class <= 9, "positive_class in 0..9");
    check(d.max_samples >= 0, "max_samples must be >= 0");
  }
  if (scheme == Scheme::kMassiveMimo) {
    check(!massive_mimo.server_counts.empty(), "server_counts must not be empty");
    for (int n : massive_mimo.server_counts) {
      check(n >= 1 && massive_mimo.total_antennas % n == 0,
            "server counts must divide total_antennas");
    }
  }
}

ExperimentConfig ParseConfig(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid JSON: ") + e.what());
  }
  Require(root.is_object(), ErrorCode::kConfig, "config must be a JSON object");
  RejectUnknown(root,
                {"devices", "servers", "antennas", "capacity_mbps",
                 "symbol_rate_msps", "p_ul_dbm", "p_dl_dbm", "noise_psd_dbm_hz",
                 "noise_figure_db", "bandwidth_hz", "radius_m", "central_server",
                 "dataset", "lambda", "learning_rate", "rounds", "trials", "seed",
                 "scheme", "normalize_signals", "freeze_designs", "massive_mimo"},
                "config");
  ExperimentConfig c;
  Read(root, "devices", &c.devices);
  Read(root, "servers", &c.servers);
  Read(root, "antennas", &c.antennas);
  ReadNumberOrWord(root, "capacity_mbps", "inf",
                   std::numeric_limits<double>::infinity(), &c.capacity_mbps);
  Read(root, "symbol_rate_msps", &c.symbol_rate_msps);
  Read(root, "p_ul_dbm", &c.p_ul_dbm);
  Read(root, "p_dl_dbm", &c.p_dl_dbm);
  Read(root, "noise_psd_dbm_hz", &c.noise_psd_dbm_hz);
  Read(root, "noise_figure_db", &c.noise_figure_db);
  Read(root, "bandwidth_hz", &c.bandwidth_hz);
  Read(root, "radius_m", &c.radius_m);
  Read(root, "central_server", &c.central_server);
  if (root.contains("dataset")) c.dataset = ParseDataset(root.at("dataset"));
  Read(root, "lambda", &c.lambda);
  ReadNumberOrWord(root, "learning_rate", "auto", 0.0, &c.learning_rate);
  Require(!root.contains("learning_rate") || root.at("learning_rate").is_string() ||
              c.learning_rate > 0.0,
          ErrorCode::kConfig, "learning_rate must be positive or \"auto\"");
  Read(root, "rounds", &c.rounds);
  Read(root, "trials", &c.trials);
  Read(root, "seed", &c.seed);
  if (root.contains("scheme")) {
    std::string s;
    Read(root, "scheme", &s);
    c.scheme = ParseScheme(s);
  }
  Read(root, "normalize_signals", &c.normalize_signals);
  Read(root, "freeze_designs", &c.freeze_designs);
  if (root.contains("massive_mimo")) {
    const json& mm = root.at("massive_mimo");
    Require(mm.is_object(), ErrorCode::kConfig, "massive_mimo must be an object");
    RejectUnknown(mm, {"total_antennas", "server_counts"}, "massive_mimo");
    Read(mm, "total_antennas", &c.massive_mimo.total_antennas);
    Read(mm, "server_counts", &c.massive_mimo.server_counts);
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str());
}

std::string ConfigToJson(const ExperimentConfig& c) {
  json d = {{"kind", c.dataset.kind == DatasetKind::kSynthetic ? "synthetic"
                                                               : "fashion_mnist"},
            {"task", TaskName(c.dataset.task)},
            {"samples", c.dataset.samples},
            {"features", c.dataset.features},
            {"margin_noise", c.dataset.margin_noise},
            {"test_fraction", c.dataset.test_fraction},
            {"train_images", c.dataset.train_images},
            {"train_labels", c.dataset.train_labels},
            {"test_images", c.dataset.test_images},
            {"test_labels", c.dataset.test_labels},
            {"positive_class", c.dataset.positive_class},
            {"max_samples", c.dataset.max_samples}};
  json root = {{"devices", c.devices},
               {"servers", c.servers},
               {"antennas", c.antennas},
               {"symbol_rate_msps", c.symbol_rate_msps},
               {"p_ul_dbm", c.p_ul_dbm},
               {"p_dl_dbm", c.p_dl_dbm},
               {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
               {"noise_figure_db", c.noise_figure_db},
               {"bandwidth_hz", c.bandwidth_hz},
               {"radius_m", c.radius_m},
               {"central_server", c.central_server},
               {"dataset", d},
               {"lambda", c.lambda},
               {"rounds", c.rounds},
               {"trials", c.trials},
               {"seed", c.seed},
               {"scheme", SchemeName(c.scheme)},
               {"normalize_signals", c.normalize_signals},
               {"freeze_designs", c.freeze_designs},
               {"massive_mimo",
                {{"total_antennas", c.massive_mimo.total_antennas},
                 {"server_counts", c.massive_mimo.server_counts}}}};
  if (std::isfinite(c.capacity_mbps)) {
    root["capacity_mbps"] = c.capacity_mbps;
  } else {
    root["capacity_mbps"] = "inf";
  }
  if (c.learning_rate > 0.0) {
    root["learning_rate"] = c.learning_rate;
  } else {
    root["learning_rate"] = "auto";
  }
  return root.dump(2);
}

}  // namespace vflcran
