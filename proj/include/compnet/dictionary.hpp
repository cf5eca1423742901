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

// CDIC file: "CDIC" | u32 version=1 | u32 K | u32 C | f64 S | f32[K·C]
// (component-major: all channels of mu_0, then mu_1, ...).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace compnet {

inline constexpr std::uint32_t kDictionaryFormatVersion = 1;

/// K unit-norm vMF mean directions sharing one concentration S.
struct Dictionary {
  /// K×C, row k is mu_k.
  Eigen::MatrixXd means;
  double concentration = 20.0;
  /// Additive log-normalizer applied to every kernel (the omitted
  /// -log Z(S)). It is identical for all components, so it cancels in every
  /// foreground/background and inter-class comparison; only absolute
  /// log-likelihoods move. Not serialized.
  double log_normalizer = 0.0;

  int size() const { return static_cast<int>(means.rows()); }
  int dimension() const { return static_cast<int>(means.cols()); }

  /// Throws unless every mean is unit-norm and S is finite and non-negative.
  void validate() const;
};

std::string encode_dictionary(const Dictionary& dict);
Dictionary decode_dictionary(std::string_view bytes);
void write_dictionary(const Dictionary& dict, const std::filesystem::path& path);
Dictionary read_dictionary(const std::filesystem::path& path);

/// FNV-1a of the CDIC encoding; model files reference their dictionary by it.
std::uint64_t content_hash(const Dictionary& dict);

}  // namespace compnet
