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

// Class-model files. The file opens with its family's magic so the family is
// identifiable from the first four bytes:
//
//   "CBRN" | u32 version=1 | u32 H | u32 W | u32 K | u32 M | u32 len | label
//          | M × f32[H·W·K] alpha | f32[K] beta
//   "CVMF" | same header and tensors | u64 dictionary content hash
//
// Alpha tensors are position-major with components contiguous per position.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compnet/mixtures.hpp"

namespace compnet {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFile {
  ClassModel model;
  Background background;
  /// Present for vMF models.
  std::optional<std::uint64_t> dictionary_hash;
};

std::string encode_class_model(const ClassModel& model, const Background& bg, std::uint64_t dictionary_hash = 0);
ModelFile decode_class_model(std::string_view bytes);

void write_class_model(const ClassModel& model, const Background& bg, std::uint64_t dictionary_hash,
                       const std::filesystem::path& path);
ModelFile read_class_model(const std::filesystem::path& path);

/// File extension for a family: ".cbrn" or ".cvmf".
std::string_view model_extension(ModelFamily family);

/// Every model file in `dir` (sorted by file name); all must share family,
/// lattice and dictionary.
std::vector<ModelFile> read_model_directory(const std::filesystem::path& dir);

}  // namespace compnet
