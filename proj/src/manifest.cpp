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

#include "compnet/manifest.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "compnet/detail/binary_io.hpp"
#include "compnet/error.hpp"
#include "compnet/feature_io.hpp"

namespace compnet {

using nlohmann::json;

std::string_view to_string(OcclusionLevel level) {
  switch (level) {
    case OcclusionLevel::None: return "none";
    case OcclusionLevel::L1: return "L1";
    case OcclusionLevel::L2: return "L2";
    case OcclusionLevel::L3: return "L3";
  }
  return "none";
}

std::string_view to_string(OccluderType type) {
  switch (type) {
    case OccluderType::None: return "none";
    case OccluderType::White: return "white";
    case OccluderType::Noise: return "noise";
    case OccluderType::Texture: return "texture";
    case OccluderType::Object: return "object";
  }
  return "none";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Background: return "background";
  }
  return "train";
}

char type_code(OccluderType type) {
  switch (type) {
    case OccluderType::White: return 'w';
    case OccluderType::Noise: return 'n';
    case OccluderType::Texture: return 't';
    case OccluderType::Object: return 'o';
    case OccluderType::None: break;
  }
  return '-';
}

OcclusionLevel parse_level(std::string_view s) {
  for (auto l : {OcclusionLevel::None, OcclusionLevel::L1, OcclusionLevel::L2, OcclusionLevel::L3}) {
    if (to_string(l) == s) return l;
  }
  throw Error(ErrorCode::InvalidManifest, "unknown occlusion level '" + std::string(s) + "'");
}

OccluderType parse_occluder(std::string_view s) {
  for (auto t : {OccluderType::None, OccluderType::White, OccluderType::Noise, OccluderType::Texture,
                 OccluderType::Object}) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::InvalidManifest, "unknown occluder type '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  for (auto sp : {Split::Train, Split::Test, Split::Background}) {
    if (to_string(sp) == s) return sp;
  }
  throw Error(ErrorCode::InvalidManifest, "unknown split '" + std::string(s) + "'");
}

const FractionBounds& LevelBounds::operator[](OcclusionLevel level) const {
  switch (level) {
    case OcclusionLevel::L1: return l1;
    case OcclusionLevel::L2: return l2;
    case OcclusionLevel::L3: return l3;
    case OcclusionLevel::None: break;
  }
  throw Error(ErrorCode::InvalidConfig, "unoccluded images have no fraction bounds");
}

void LevelBounds::validate() const {
  for (auto level : kOccludedLevels) {
    const auto& b = (*this)[level];
    if (!(b.lo >= 0.0 && b.hi <= 1.0 && b.lo < b.hi)) {
      throw Error(ErrorCode::InvalidConfig, "invalid bounds for level " + std::string(to_string(level)) + ": [" +
                                                std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
    }
  }
}

std::vector<const ManifestEntry*> DatasetManifest::select(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

std::vector<std::string> DatasetManifest::class_labels() const {
  std::set<std::string> labels;
  for (const auto& e : entries) {
    if (e.split == Split::Train) labels.insert(e.label);
  }
  return {labels.begin(), labels.end()};
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json j;
    j["feature_path"] = e.feature_path;
    j["label"] = e.label;
    j["mask_path"] = e.mask_path ? json(*e.mask_path) : json(nullptr);
    j["occlusion_level"] = to_string(e.occlusion_level);
    j["occluder_type"] = to_string(e.occluder_type);
    j["split"] = to_string(e.split);
    entries.push_back(std::move(j));
  }
  json doc;
  doc["entries"] = std::move(entries);
  return doc.dump(1) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(ErrorCode::InvalidManifest, "manifest must contain an 'entries' array");
  }
  for (const auto& j : doc["entries"]) {
    try {
      ManifestEntry e;
      e.feature_path = j.at("feature_path").get<std::string>();
      const auto& label = j.at("label");
      e.label = label.is_string() ? label.get<std::string>() : label.dump();
      if (j.contains("mask_path") && !j["mask_path"].is_null()) e.mask_path = j["mask_path"].get<std::string>();
      e.occlusion_level = parse_level(j.value("occlusion_level", "none"));
      e.occluder_type = parse_occluder(j.value("occluder_type", "none"));
      e.split = parse_split(j.value("split", "train"));
      manifest.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::InvalidManifest, std::string("bad entry: ") + ex.what());
    }
  }
  return manifest;
}

void validate_manifest(const DatasetManifest& manifest) {
  for (const auto& e : manifest.entries) {
    if (!std::filesystem::exists(manifest.resolve(e.feature_path))) {
      throw Error(ErrorCode::InvalidManifest, "missing feature file " + e.feature_path);
    }
    if (e.occlusion_level != OcclusionLevel::None && !e.mask_path) {
      throw Error(ErrorCode::InvalidManifest, "occluded entry " + e.feature_path + " has no mask_path");
    }
    if ((e.occlusion_level == OcclusionLevel::None) != (e.occluder_type == OccluderType::None)) {
      throw Error(ErrorCode::InvalidManifest, "entry " + e.feature_path + " mixes occluded and unoccluded annotations");
    }
    if (e.mask_path && !std::filesystem::exists(manifest.resolve(*e.mask_path))) {
      throw Error(ErrorCode::InvalidManifest, "missing mask file " + *e.mask_path);
    }
  }
}

void validate_manifest_payloads(const DatasetManifest& manifest, const LevelBounds& bounds) {
  validate_manifest(manifest);
  for (const auto& e : manifest.entries) {
    const auto map = read_feature_map<float>(manifest.resolve(e.feature_path));
    if (!e.mask_path) continue;
    const auto mask = read_mask(manifest.resolve(*e.mask_path));
    check_pairing(map, mask);
    if (e.occlusion_level != OcclusionLevel::None && !bounds[e.occlusion_level].contains(mask.occluded_fraction())) {
      throw Error(ErrorCode::InvalidManifest, "mask " + *e.mask_path + " occludes " +
                                                  std::to_string(mask.occluded_fraction()) + ", outside level " +
                                                  std::string(to_string(e.occlusion_level)));
    }
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  auto manifest = manifest_from_json(detail::read_file(path), path.parent_path());
  validate_manifest(manifest);
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  detail::write_file(path, manifest_to_json(manifest));
}

}  // namespace compnet
