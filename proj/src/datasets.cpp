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
#include "vflcran/datasets.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>

namespace vflcran {

namespace {

std::uint32_t ReadBigEndian(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  Require(in.gcount() == 4, ErrorCode::kDataset, "truncated IDX header in " + path);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void WriteBigEndian(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::vector<std::size_t> EqualDims(int features, int devices) {
  Require(devices >= 1 && features >= 1, ErrorCode::kInvalidArgument,
          "sizes must be positive");
  Require(features % devices == 0, ErrorCode::kDataset,
          "device count must divide the feature dimension");
  return std::vector<std::size_t>(static_cast<std::size_t>(devices),
                                  static_cast<std::size_t>(features / devices));
}

}  // namespace

FeaturePartitionedDataset SyntheticDataset(std::uint64_t seed, int samples,
                                           int features, int devices,
                                           double margin_noise) {
  Require(samples >= 1, ErrorCode::kInvalidArgument, "need at least one sample");
  Require(margin_noise >= 0.0, ErrorCode::kInvalidArgument, "negative label noise");
  const auto dims = EqualDims(features, devices);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec truth(features);
  for (int j = 0; j < features; ++j) truth(j) = normal(rng);
  truth.normalize();
  Mat x(samples, features);
  std::vector<int> labels(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < features; ++j) x(i, j) = normal(rng);
    const double z = x.row(i).dot(truth) + margin_noise * normal(rng);
    labels[static_cast<std::size_t>(i)] = z > 0.0 ? 1 : 0;
  }
  return FeaturePartitionedDataset::FromMatrix(x, std::move(labels), dims, 2);
}

DataSplit SyntheticSplit(std::uint64_t seed, int train_samples, int features,
                         int devices, double margin_noise, double test_fraction) {
  Require(test_fraction >= 0.0 && test_fraction < 1.0, ErrorCode::kInvalidArgument,
          "test fraction must lie in [0, 1)");
  const int total = static_cast<int>(
      std::lround(static_cast<double>(train_samples) / (1.0 - test_fraction)));
  const FeaturePartitionedDataset all =
      SyntheticDataset(seed, total, features, devices, margin_noise);
  const int test = total - train_samples;
  DataSplit split;
  const auto dims = EqualDims(features, devices);
  const Mat x = all.Concatenated();
  split.train = FeaturePartitionedDataset::FromMatrix(
      x.topRows(train_samples),
      std::vector<int>(all.labels.begin(), all.labels.begin() + train_samples), dims);
  if (test > 0) {
    split.test = FeaturePartitionedDataset::FromMatrix(
        x.bottomRows(test),
        std::vector<int>(all.labels.begin() + train_samples, all.labels.end()), dims);
  }
  return split;
}

Mat ReadIdxImages(const std::string& path, int max_items) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path);
  Require(ReadBigEndian(in, path) == 0x00000803u, ErrorCode::kDataset,
          "bad image magic in " + path);
  const std::uint32_t count = ReadBigEndian(in, path);
  const std::uint32_t rows = ReadBigEndian(in, path);
  const std::uint32_t cols = ReadBigEndian(in, path);
  std::uint32_t take = count;
  if (max_items > 0) take = std::min<std::uint32_t>(take, static_cast<std::uint32_t>(max_items));
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  Mat out(static_cast<Eigen::Index>(take), static_cast<Eigen::Index>(pixels));
  for (std::uint32_t i = 0; i < take; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
    Require(static_cast<std::size_t>(in.gcount()) == pixels, ErrorCode::kDataset,
            "truncated image data in " + path);
    for (std::size_t j = 0; j < pixels; ++j) {
      out(i, static_cast<Eigen::Index>(j)) = buf[j] / 255.0;
    }
  }
  return out;
}

std::vector<int> ReadIdxLabels(const std::string& path, int max_items) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path);
  Require(ReadBigEndian(in, path) == 0x00000801u, ErrorCode::kDataset,
          "bad label magic in " + path);
  std::uint32_t count = ReadBigEndian(in, path);
  if (max_items > 0) count = std::min<std::uint32_t>(count, static_cast<std::uint32_t>(max_items));
  std::vector<unsigned char> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
  Require(static_cast<std::uint32_t>(in.gcount()) == count, ErrorCode::kDataset,
          "truncated label data in " + path);
  return std::vector<int>(buf.begin(), buf.end());
}

void WriteIdxImages(const std::string& path, const std::vector<std::uint8_t>& pixels,
                    int count, int rows, int cols) {
  Require(pixels.size() == static_cast<std::size_t>(count) * rows * cols,
          ErrorCode::kInvalidArgument, "pixel buffer size");
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path);
  WriteBigEndian(out, 0x00000803u);
  WriteBigEndian(out, static_cast<std::uint32_t>(count));
  WriteBigEndian(out, static_cast<std::uint32_t>(rows));
  WriteBigEndian(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

void WriteIdxLabels(const std::string& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path);
  WriteBigEndian(out, 0x00000801u);
  WriteBigEndian(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

FeaturePartitionedDataset LoadFashionMnist(const std::string& images,
                                           const std::string& labels, int devices,
                                           TaskKind task, int positive_class,
                                           int max_items) {
  const Mat x = ReadIdxImages(images, max_items);
  std::vector<int> y = ReadIdxLabels(labels, max_items);
  Require(static_cast<Eigen::Index>(y.size()) == x.rows(), ErrorCode::kDataset,
          "image and label counts differ");
  const auto dims = EqualDims(static_cast<int>(x.cols()), devices);
  int classes = 10;
  if (task == TaskKind::kBinaryLogistic) {
    for (int& v : y) v = v == positive_class ? 1 : 0;
    classes = 2;
  } else {
    for (int v : y) {
      Require(v >= 0 && v < 10, ErrorCode::kDataset, "label outside 0..9");
    }
  }
  return FeaturePartitionedDataset::FromMatrix(x, std::move(y), dims, classes);
}

DataSplit BuildDataset(const ExperimentConfig& config, std::uint64_t seed) {
  const DatasetConfig& d = config.dataset;
  if (d.kind == DatasetKind::kSynthetic) {
    return SyntheticSplit(seed, d.samples, d.features, config.devices, d.margin_noise,
                          d.test_fraction);
  }
  DataSplit split;
  split.train = LoadFashionMnist(d.train_images, d.train_labels, config.devices,
                                 d.task, d.positive_class, d.max_samples);
  if (!d.test_images.empty() && !d.test_labels.empty()) {
    split.test = LoadFashionMnist(d.test_images, d.test_labels, config.devices,
                                  d.task, d.positive_class, 0);
  }
  return split;
}

}  // namespace vflcran
