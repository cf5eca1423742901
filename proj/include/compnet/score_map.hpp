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
#include <vector>

#include <Eigen/Dense>

#include "compnet/occlusion_mask.hpp"

namespace compnet {

/// Per-position log-likelihood ratio log p(f|BG) - log p(f|FG), priors
/// included. Positive values indicate occlusion. Inactive positions score
/// 0 and are flagged.
struct OcclusionScoreMap {
  int height = 0;
  int width = 0;
  Eigen::VectorXd scores;
  std::vector<std::uint8_t> active;

  int positions() const { return height * width; }
  bool is_active(int p) const { return active[static_cast<std::size_t>(p)] != 0; }

  /// Predicted occluder mask {active p : score_p > threshold}.
  OcclusionMask predict(double threshold) const {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(positions()), 0);
    for (int p = 0; p < positions(); ++p) v[p] = (is_active(p) && scores(p) > threshold) ? 1 : 0;
    return OcclusionMask(height, width, std::move(v));
  }

  /// z_p: foreground wins ties, inactive positions count as visible.
  std::vector<std::uint8_t> visibility() const {
    std::vector<std::uint8_t> v(static_cast<std::size_t>(positions()), 1);
    for (int p = 0; p < positions(); ++p) v[p] = (is_active(p) && scores(p) > 0.0) ? 0 : 1;
    return v;
  }
};

/// Total of the per-position maxima of the occlusion-aware likelihood, plus
/// the resulting visibility map (1 = object visible).
struct OcclusionLikelihood {
  double total = 0.0;
  /// `total` without the dictionary log normalizer; decisions compare this.
  double relative_total = 0.0;
  std::vector<std::uint8_t> visibility;
};

}  // namespace compnet
