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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace compnet {

enum class OcclusionLevel { None, L1, L2, L3 };
enum class OccluderType { None, White, Noise, Texture, Object };
enum class Split { Train, Test, Background };

inline constexpr std::array<OcclusionLevel, 3> kOccludedLevels{OcclusionLevel::L1, OcclusionLevel::L2,
                                                               OcclusionLevel::L3};
inline constexpr std::array<OccluderType, 4> kOccluderTypes{OccluderType::White, OccluderType::Noise,
                                                            OccluderType::Texture, OccluderType::Object};

std::string_view to_string(OcclusionLevel level);
std::string_view to_string(OccluderType type);
std::string_view to_string(Split split);
/// Single-letter column code used in accuracy tables (w/n/t/o).
char type_code(OccluderType type);

OcclusionLevel parse_level(std::string_view s);
OccluderType parse_occluder(std::string_view s);
Split parse_split(std::string_view s);

/// Occluded-area fraction interval of a level. L1 and L2 are half-open,
/// L3 is closed.
struct FractionBounds {
  double lo = 0.0;
  double hi = 1.0;
  bool hi_inclusive = false;

  bool contains(double f) const { return f >= lo && (hi_inclusive ? f <= hi : f < hi); }
};

struct LevelBounds {
  FractionBounds l1{0.2, 0.4, false};
  FractionBounds l2{0.4, 0.6, false};
  FractionBounds l3{0.6, 0.8, true};

  const FractionBounds& operator[](OcclusionLevel level) const;
  /// Throws InvalidConfig unless every interval is a non-empty subset of [0, 1].
  void validate() const;
};

struct ManifestEntry {
  std::string feature_path;
  std::string label;
  std::optional<std::string> mask_path;
  OcclusionLevel occlusion_level = OcclusionLevel::None;
  OccluderType occluder_type = OccluderType::None;
  Split split = Split::Train;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }

  std::vector<const ManifestEntry*> select(Split split) const;
  /// Sorted distinct class labels of the train split.
  std::vector<std::string> class_labels() const;
};

/// Parses and validates a manifest: every referenced path must exist and
/// occluded entries must name a mask.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view json, const std::filesystem::path& base_dir);

void validate_manifest(const DatasetManifest& manifest);
/// Additionally loads every mask, checks it pairs with its feature map and
/// that its occluded fraction lies inside the declared level.
void validate_manifest_payloads(const DatasetManifest& manifest, const LevelBounds& bounds = {});

}  // namespace compnet
