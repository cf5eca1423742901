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

#include "compnet/inference.hpp"

#include <numeric>

#include "compnet/error.hpp"

namespace compnet {

ClassificationResult classify(const ImageEvidence& ev, std::span<const ClassModel> models, const Background& bg,
                              double pi) {
  if (models.empty()) throw Error(ErrorCode::InvalidConfig, "no class models to classify with");
  check_prior(pi);
  std::vector<MixtureChoice> choices;
  choices.reserve(models.size());
  for (const auto& model : models) choices.push_back(assign_mixture(ev, model, bg, pi));

  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return models[a].label < models[b].label; });
  std::size_t winner = order.front();
  for (std::size_t idx : order) {
    if (choices[idx].relative_score > choices[winner].relative_score) winner = idx;
  }

  ClassificationResult result;
  result.label = models[winner].label;
  result.model_index = static_cast<int>(winner);
  result.mixture = choices[winner].component;
  result.score = choices[winner].score;
  for (std::size_t i = 0; i < models.size(); ++i) result.class_scores.emplace_back(models[i].label, choices[i].score);
  result.visibility = score_component(ev, models[winner], result.mixture, bg, pi).visibility;
  return result;
}

ClassificationResult classify(const FeatureMap& map, std::span<const ClassModel> models, const Dictionary& dict,
                              const Background& bg, double pi, double delta) {
  return classify(image_evidence(map, dict, delta), models, bg, pi);
}

Localization localize(const ImageEvidence& ev, const ClassModel& model, int component, const Background& bg,
                      double pi, double threshold) {
  Localization out;
  out.scores = component_score_map(ev, model, component, bg, pi);
  out.predicted = out.scores.predict(threshold);
  return out;
}

}  // namespace compnet
