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

#include "compnet/error.hpp"

namespace compnet {

/// Per-position ground-truth visibility: 0 = visible, 1 = occluded.
class OcclusionMask {
 public:
  OcclusionMask() = default;

  OcclusionMask(int height, int width, std::vector<std::uint8_t> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (height_ < 1 || width_ < 1 || values_.size() != static_cast<std::size_t>(height_) * width_) {
      throw Error(ErrorCode::DimensionMismatch, "mask values do not match the H×W lattice");
    }
    for (auto v : values_) {
      if (v > 1) throw Error(ErrorCode::InvalidFeature, "mask labels must be 0 (visible) or 1 (occluded)");
    }
  }

  static OcclusionMask all_visible(int height, int width) {
    return OcclusionMask(height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 0));
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int positions() const { return height_ * width_; }
  bool occluded(int p) const { return values_[static_cast<std::size_t>(p)] != 0; }
  const std::vector<std::uint8_t>& values() const { return values_; }

  int occluded_count() const {
    int n = 0;
    for (auto v : values_) n += v;
    return n;
  }

  double occluded_fraction() const { return static_cast<double>(occluded_count()) / positions(); }

  bool operator==(const OcclusionMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> values_;
};

}  // namespace compnet
