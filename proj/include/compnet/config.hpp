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

#include <cstdint>
#include <filesystem>
#include <string>

#include "compnet/manifest.hpp"
#include "compnet/mixtures.hpp"
#include "compnet/synth.hpp"

namespace compnet {

/// Which class model localizes occluders during evaluation.
enum class RocReference { Label, Prediction };

std::string_view to_string(RocReference reference);
RocReference parse_roc_reference(std::string_view s);

/// Every tunable of the pipeline. A JSON config file may set any subset of
/// the fields by name; command-line flags override the file.
struct RunConfig {
  std::uint64_t seed = 7;
  ModelFamily family = ModelFamily::Vmf;

  // Dictionary.
  int components = 16;
  double concentration = 20.0;
  int dict_max_iters = 100;
  double dict_tol = 1e-6;

  // Models.
  double delta = 0.5;
  double pi = 0.5;
  int mixtures = 4;
  int rounds = 10;
  int em_max_iters = 100;
  double em_tol = 1e-6;
  double smoothing = kSmoothingFloor;
  double bernoulli_eps = kBernoulliEpsilon;
  /// J, the number of background position rows sampled for beta (0 = all).
  int background_samples = 10000;
  bool occlusion_aware_training = true;

  // Synthetic world.
  int num_classes = 3;
  int world_mixtures = 2;
  int height = 14;
  int width = 14;
  int channels = 16;
  double dirichlet = 0.1;
  double background_dirichlet = 2.0;
  double max_cosine = 0.8;
  int texture_palette = 3;
  int train_per_class = 200;
  int test_per_class = 100;
  int background_images = 100;
  LevelBounds level_bounds;

  // Evaluation.
  double threshold = 0.0;
  bool macro_roc = false;
  RocReference roc_reference = RocReference::Label;
  /// Number of test images whose score maps are rendered as PGM.
  int score_maps = 12;

  // Paths.
  std::filesystem::path out = "out";
  std::filesystem::path manifest;
  std::filesystem::path dictionary;
  std::filesystem::path models;
  std::filesystem::path features;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;

  DatasetConfig dataset_config() const;
  TrainOptions train_options() const;
};

/// Applies the fields present in a JSON document; unknown keys are rejected.
void apply_config_json(RunConfig& config, const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

}  // namespace compnet
