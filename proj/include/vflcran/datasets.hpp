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
#ifndef VFLCRAN_DATASETS_HPP_
#define VFLCRAN_DATASETS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vflcran/config.hpp"
#include "vflcran/core_model.hpp"

namespace vflcran {

struct DataSplit {
  FeaturePartitionedDataset train;
  FeaturePartitionedDataset test;  // may be empty
};

// Standard-normal features; labels y = [x^T w* + noise > 0] for a random unit
// separator w*. Features are split contiguously into K equal blocks.
FeaturePartitionedDataset SyntheticDataset(std::uint64_t seed, int samples,
                                           int features, int devices,
                                           double margin_noise);

// Draws samples / (1 - test_fraction) rows and holds out the tail.
DataSplit SyntheticSplit(std::uint64_t seed, int train_samples, int features,
                         int devices, double margin_noise, double test_fraction);

// IDX readers (big-endian). Images are returned row-major, scaled to [0, 1].
Mat ReadIdxImages(const std::string& path, int max_items = 0);
std::vector<int> ReadIdxLabels(const std::string& path, int max_items = 0);
void WriteIdxImages(const std::string& path, const std::vector<std::uint8_t>& pixels,
                    int count, int rows, int cols);
void WriteIdxLabels(const std::string& path, const std::vector<std::uint8_t>& labels);

// Pixels split contiguously across devices; K must divide the pixel count.
// Binary task: label 1 for positive_class, 0 otherwise.
FeaturePartitionedDataset LoadFashionMnist(const std::string& images,
                                           const std::string& labels, int devices,
                                           TaskKind task, int positive_class = 0,
                                           int max_items = 0);

// Dataset for an experiment trial (synthetic data is re-drawn per trial).
DataSplit BuildDataset(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace vflcran

#endif  // VFLCRAN_DATASETS_HPP_
