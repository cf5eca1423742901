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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compnet/mixtures.hpp"
#include "compnet/occlusion_mask.hpp"
#include "compnet/score_map.hpp"

namespace compnet {

struct ClassificationResult {
  std::string label;
  /// Index into the model list of the predicted class.
  int model_index = 0;
  int mixture = 0;
  double score = 0.0;
  /// Best occlusion-aware likelihood of every class, in model order.
  std::vector<std::pair<std::string, double>> class_scores;
  std::vector<std::uint8_t> visibility;
};

/// score(y) = max_m occlusion-aware likelihood under component m of class y;
/// predicts argmax_y, ties going to the lexicographically smallest label.
ClassificationResult classify(const ImageEvidence& ev, std::span<const ClassModel> models, const Background& bg,
                              double pi);
ClassificationResult classify(const FeatureMap& map, std::span<const ClassModel> models, const Dictionary& dict,
                              const Background& bg, double pi, double delta);

struct Localization {
  OcclusionScoreMap scores;
  OcclusionMask predicted;
};

/// Untruncated score map of one component plus {active p : score_p > threshold}.
Localization localize(const ImageEvidence& ev, const ClassModel& model, int component, const Background& bg,
                      double pi, double threshold);

}  // namespace compnet
