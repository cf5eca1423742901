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

// Mixtures of compositional models: M pose components per class, trained by
// hard-EM alternation between component fitting and image reassignment.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "compnet/bernoulli_model.hpp"
#include "compnet/dictionary.hpp"
#include "compnet/feature_map.hpp"
#include "compnet/vmf_model.hpp"

namespace compnet {

enum class ModelFamily { Bernoulli, Vmf };

std::string_view to_string(ModelFamily family);
ModelFamily parse_family(std::string_view s);

using ComponentList = std::variant<std::vector<BernoulliForeground>, std::vector<VmfForeground>>;
using Background = std::variant<BernoulliBackground, VmfBackground>;

struct ClassModel {
  std::string label;
  ComponentList components;

  ModelFamily family() const { return components.index() == 0 ? ModelFamily::Bernoulli : ModelFamily::Vmf; }
  int mixtures() const;
};

struct MixtureAssignment {
  std::vector<int> component;
  int mixtures = 0;

  /// One-hot indicator nu for image i.
  std::vector<std::uint8_t> indicator(std::size_t i) const;
  std::vector<int> sizes() const;
};

/// Everything the likelihoods need from one feature map: the kernel scores
/// for the vMF family and the binary encoding for the Bernoulli family, both
/// derived from a single dictionary product.
struct ImageEvidence {
  KernelEvidence kernels;
  BinaryEncoding encoding;
};

ImageEvidence image_evidence(const FeatureMap& map, const Dictionary& dict, double delta);

/// Occlusion-aware (or plain, when `occlusion_aware` is false) likelihood of
/// one image under one component. `relative_total` in the result omits the
/// dictionary log normalizer and is what every argmax compares.
struct ComponentScore {
  double total = 0.0;
  double relative_total = 0.0;
  std::vector<std::uint8_t> visibility;
};

ComponentScore score_component(const ImageEvidence& ev, const ClassModel& model, int component,
                               const Background& bg, double pi, bool occlusion_aware = true);

OcclusionScoreMap component_score_map(const ImageEvidence& ev, const ClassModel& model, int component,
                                      const Background& bg, double pi);

/// Seeded farthest-point k-means over per-image spatial responsibility
/// profiles (K×P responsibilities under a uniform prior, flattened). Every
/// component ends up non-empty.
MixtureAssignment init_assignments(std::span<const FeatureMap> maps, int mixtures, const Dictionary& dict,
                                   std::uint64_t seed);

struct TrainOptions {
  int mixtures = 4;
  ModelFamily family = ModelFamily::Vmf;
  double pi = 0.5;
  double delta = 0.5;
  int rounds = 10;
  EmOptions em;
  double bernoulli_eps = kBernoulliEpsilon;
  /// Score reassignment with the occlusion-aware likelihood (default) or the plain one.
  bool occlusion_aware = true;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ClassModel model;
  MixtureAssignment assignment;
  /// Sum over images of their assigned-component likelihood after every
  /// reassignment; non-decreasing.
  std::vector<double> objective;
  int rounds_run = 0;
};

/// Alternates: fit every component on all active positions of its images
/// (warm-started; the step is shortened towards the previous parameters
/// until the members' score does not drop), then reassign each image to its
/// best component. Stops early once assignments are stable. A component left
/// empty is re-seeded with the worst-fit image of a component that has more
/// than one member.
TrainResult train_class_model(std::span<const FeatureMap> maps, const std::string& label, const Dictionary& dict,
                              const Background& bg, const TrainOptions& options);

struct MixtureChoice {
  int component = 0;
  double score = 0.0;
  double relative_score = 0.0;
};

/// argmax_m of the occlusion-aware likelihood; ties go to the lowest index.
MixtureChoice assign_mixture(const ImageEvidence& ev, const ClassModel& model, const Background& bg, double pi);
MixtureChoice assign_mixture(const FeatureMap& map, const ClassModel& model, const Dictionary& dict,
                             const Background& bg, double pi, double delta);

}  // namespace compnet
