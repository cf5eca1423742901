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

// CFMP feature-map and CMSK mask files.
//
//   CFMP: "CFMP" | u32 version=1 | u32 H | u32 W | u32 C | f32[H·W·C] | u8[H·W]
//   CMSK: "CMSK" | u32 version=1 | u32 H | u32 W | u8[H·W]
//
// All integers and floats little-endian; positions row-major, channels
// contiguous per position.

#include <filesystem>
#include <string>
#include <string_view>

#include "compnet/feature_map.hpp"
#include "compnet/occlusion_mask.hpp"

namespace compnet {

inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::uint32_t kMaskFormatVersion = 1;

std::string encode_feature_map(const FeatureMapT<float>& map);
FeatureMapT<float> decode_feature_map(std::string_view bytes);

std::string encode_mask(const OcclusionMask& mask);
OcclusionMask decode_mask(std::string_view bytes);

template <typename Scalar>
std::string encode_feature_map(const FeatureMapT<Scalar>& map) {
  return encode_feature_map(map.template cast<float>());
}

template <typename Scalar>
void write_feature_map(const FeatureMapT<Scalar>& map, const std::filesystem::path& path);

/// Reads and validates a CFMP file. Values are exactly the stored floats.
template <typename Scalar = double>
FeatureMapT<Scalar> read_feature_map(const std::filesystem::path& path);

void write_mask(const OcclusionMask& mask, const std::filesystem::path& path);
OcclusionMask read_mask(const std::filesystem::path& path);

/// Throws DimensionMismatch unless the mask lattice equals the map lattice.
template <typename Scalar>
void check_pairing(const FeatureMapT<Scalar>& map, const OcclusionMask& mask) {
  if (map.height() != mask.height() || map.width() != mask.width()) {
    throw Error(ErrorCode::DimensionMismatch, "mask " + std::to_string(mask.height()) + "x" +
                                                  std::to_string(mask.width()) + " does not match feature map " +
                                                  std::to_string(map.height()) + "x" + std::to_string(map.width()));
  }
}

}  // namespace compnet
