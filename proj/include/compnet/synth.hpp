// Copyright 2026 The CompNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Synthetic benchmark: a generative world with known parameters, class
// image samplers, rectangle occluders and brute-force likelihood oracles.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compnet/bernoulli_model.hpp"
#include "compnet/dictionary.hpp"
#include "compnet/feature_map.hpp"
#include "compnet/manifest.hpp"
#include "compnet/occlusion_mask.hpp"
#include "compnet/vmf_model.hpp"

namespace compnet {

struct WorldConfig {
  int num_classes = 3;
  int mixtures = 2;
  int components = 16;
  int height = 14;
  int width = 14;
  int channels = 16;
  double concentration = 20.0;
  /// Symmetric Dirichlet concentration of the class alpha columns.
  double dirichlet = 0.1;
  double background_dirichlet = 2.0;
  /// Upper bound on the pairwise cosine of dictionary means.
  double max_cosine = 0.8;
  int texture_palette = 3;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SyntheticWorld {
  WorldConfig config;
  Dictionary dictionary;
  /// classes[y][m] generates images of class y under pose m.
  std::vector<std::vector<VmfForeground>> classes;
  VmfBackground background;
  Eigen::VectorXd white_direction;
  /// One direction per column.
  Eigen::MatrixXd texture_palette;
};

SyntheticWorld make_world(const WorldConfig& config);

/// Per position: k ~ alpha(., p), f_p ~ vMF(mu_k, S). All positions active.
FeatureMap sample_image(const SyntheticWorld& world, int y, int m, std::uint64_t seed);
/// Same process with the background mixture beta at every position.
FeatureMap sample_background_image(const SyntheticWorld& world, std::uint64_t seed);

struct OccludedImage {
  FeatureMap map;
  OcclusionMask mask;
};

/// Replaces a uniformly placed axis-aligned rectangle whose share of active
/// positions lies inside the level's bounds. `image_class` picks the object
/// occluder's source: any other class, or the background generator when the
/// world has a single class. Throws InvalidConfig if no rectangle fits.
OccludedImage apply_occluder(const FeatureMap& map, const SyntheticWorld& world, int image_class, OccluderType type,
                             OcclusionLevel level, std::uint64_t seed, const LevelBounds& bounds = {});

/// Naive extended-precision reference values. No log-sum-exp.
double oracle_log_likelihood(const FeatureMap& map, const Eigen::MatrixXd& alphas, const Dictionary& dict);
double oracle_log_likelihood(const FeatureMap& map, const Eigen::VectorXd& betas, const Dictionary& dict);
double oracle_log_likelihood(const BinaryEncoding& enc, const Eigen::MatrixXd& alphas);

std::string world_to_json(const SyntheticWorld& world);
SyntheticWorld world_from_json(const std::string& text);

struct SyntheticSample {
  std::string name;
  int label = 0;
  int pose = 0;
  Split split = Split::Train;
  OcclusionLevel level = OcclusionLevel::None;
  OccluderType type = OccluderType::None;
  /// Stored at file precision.
  FeatureMapT<float> map;
  std::optional<OcclusionMask> mask;
};

struct DatasetConfig {
  WorldConfig world;
  int train_per_class = 200;
  int test_per_class = 100;
  int background_images = 100;
  LevelBounds bounds;
};

struct SyntheticDataset {
  SyntheticWorld world;
  std::vector<SyntheticSample> samples;

  std::vector<const SyntheticSample*> select(Split split) const;
};

/// Every test image appears unoccluded and under every (level, type) pair.
SyntheticDataset generate_dataset(const DatasetConfig& config);

/// Writes payloads, manifest.json and world.json under `dir`.
DatasetManifest write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace compnet
