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

#include "compnet/config.hpp"

#include <cmath>

#include <json.hpp>

#include "compnet/detail/binary_io.hpp"
#include "compnet/error.hpp"
#include "compnet/random.hpp"

namespace compnet {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, "config field '" + field + "' " + why);
}

void require_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(field, "must be positive and finite");
}

json bounds_json(const FractionBounds& b) { return json::array({b.lo, b.hi}); }

FractionBounds json_bounds(const json& j, bool hi_inclusive) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidConfig, "level bounds must be [lo, hi] pairs");
  return {j[0].get<double>(), j[1].get<double>(), hi_inclusive};
}

}  // namespace

std::string_view to_string(RocReference reference) {
  return reference == RocReference::Label ? "label" : "prediction";
}

RocReference parse_roc_reference(std::string_view s) {
  if (s == "label") return RocReference::Label;
  if (s == "prediction") return RocReference::Prediction;
  throw Error(ErrorCode::InvalidConfig, "roc_reference must be 'label' or 'prediction', got '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  if (components < 1) invalid("components", "must be at least 1");
  if (!(concentration >= 0.0) || !std::isfinite(concentration)) invalid("concentration", "must be finite and non-negative");
  if (dict_max_iters < 1) invalid("dict_max_iters", "must be at least 1");
  if (!(dict_tol >= 0.0)) invalid("dict_tol", "must be non-negative");
  if (!(delta >= -1.0 && delta <= 1.0)) invalid("delta", "must lie in [-1, 1]");
  if (!(pi > 0.0 && pi < 1.0)) invalid("pi", "must lie strictly between 0 and 1");
  if (mixtures < 1) invalid("mixtures", "must be at least 1");
  if (rounds < 1) invalid("rounds", "must be at least 1");
  if (em_max_iters < 1) invalid("em_max_iters", "must be at least 1");
  if (!(em_tol >= 0.0)) invalid("em_tol", "must be non-negative");
  if (!(smoothing > 0.0) || smoothing * components > 1.0) invalid("smoothing", "must be positive with K*smoothing <= 1");
  if (!(bernoulli_eps > 0.0 && bernoulli_eps < 0.5)) invalid("bernoulli_eps", "must lie in (0, 0.5)");
  if (background_samples < 0) invalid("background_samples", "must be non-negative");
  if (num_classes < 1) invalid("num_classes", "must be at least 1");
  if (world_mixtures < 1) invalid("world_mixtures", "must be at least 1");
  if (height < 1 || width < 1) invalid("height/width", "must be at least 1");
  if (channels < 3) invalid("channels", "must be at least 3");
  require_positive("dirichlet", dirichlet);
  require_positive("background_dirichlet", background_dirichlet);
  if (!(max_cosine > -1.0 && max_cosine <= 1.0)) invalid("max_cosine", "must lie in (-1, 1]");
  if (texture_palette < 1) invalid("texture_palette", "must be at least 1");
  if (train_per_class < 1) invalid("train_per_class", "must be at least 1");
  if (test_per_class < 0) invalid("test_per_class", "must be non-negative");
  if (background_images < 0) invalid("background_images", "must be non-negative");
  if (!std::isfinite(threshold)) invalid("threshold", "must be finite");
  if (score_maps < 0) invalid("score_maps", "must be non-negative");
  level_bounds.validate();
}

DatasetConfig RunConfig::dataset_config() const {
  DatasetConfig d;
  d.world.num_classes = num_classes;
  d.world.mixtures = world_mixtures;
  d.world.components = components;
  d.world.height = height;
  d.world.width = width;
  d.world.channels = channels;
  d.world.concentration = concentration;
  d.world.dirichlet = dirichlet;
  d.world.background_dirichlet = background_dirichlet;
  d.world.max_cosine = max_cosine;
  d.world.texture_palette = texture_palette;
  d.world.seed = seed;
  d.train_per_class = train_per_class;
  d.test_per_class = test_per_class;
  d.background_images = background_images;
  d.bounds = level_bounds;
  return d;
}

TrainOptions RunConfig::train_options() const {
  TrainOptions t;
  t.mixtures = mixtures;
  t.family = family;
  t.pi = pi;
  t.delta = delta;
  t.rounds = rounds;
  t.em.max_iters = em_max_iters;
  t.em.tol = em_tol;
  t.em.smoothing = smoothing;
  t.bernoulli_eps = bernoulli_eps;
  t.occlusion_aware = occlusion_aware_training;
  t.seed = substream_seed(seed, "train");
  return t;
}

void apply_config_json(RunConfig& c, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "family") c.family = parse_family(value.get<std::string>());
      else if (key == "components") c.components = value.get<int>();
      else if (key == "concentration") c.concentration = value.get<double>();
      else if (key == "dict_max_iters") c.dict_max_iters = value.get<int>();
      else if (key == "dict_tol") c.dict_tol = value.get<double>();
      else if (key == "delta") c.delta = value.get<double>();
      else if (key == "pi") c.pi = value.get<double>();
      else if (key == "mixtures") c.mixtures = value.get<int>();
      else if (key == "rounds") c.rounds = value.get<int>();
      else if (key == "em_max_iters") c.em_max_iters = value.get<int>();
      else if (key == "em_tol") c.em_tol = value.get<double>();
      else if (key == "smoothing") c.smoothing = value.get<double>();
      else if (key == "bernoulli_eps") c.bernoulli_eps = value.get<double>();
      else if (key == "background_samples") c.background_samples = value.get<int>();
      else if (key == "occlusion_aware_training") c.occlusion_aware_training = value.get<bool>();
      else if (key == "num_classes") c.num_classes = value.get<int>();
      else if (key == "world_mixtures") c.world_mixtures = value.get<int>();
      else if (key == "height") c.height = value.get<int>();
      else if (key == "width") c.width = value.get<int>();
      else if (key == "channels") c.channels = value.get<int>();
      else if (key == "dirichlet") c.dirichlet = value.get<double>();
      else if (key == "background_dirichlet") c.background_dirichlet = value.get<double>();
      else if (key == "max_cosine") c.max_cosine = value.get<double>();
      else if (key == "texture_palette") c.texture_palette = value.get<int>();
      else if (key == "train_per_class") c.train_per_class = value.get<int>();
      else if (key == "test_per_class") c.test_per_class = value.get<int>();
      else if (key == "background_images") c.background_images = value.get<int>();
      else if (key == "level_bounds") {
        for (const auto& [level, b] : value.items()) {
          if (level == "L1") c.level_bounds.l1 = json_bounds(b, false);
          else if (level == "L2") c.level_bounds.l2 = json_bounds(b, false);
          else if (level == "L3") c.level_bounds.l3 = json_bounds(b, true);
          else throw Error(ErrorCode::InvalidConfig, "unknown occlusion level '" + level + "' in level_bounds");
        }
      }
      else if (key == "threshold") c.threshold = value.get<double>();
      else if (key == "macro_roc") c.macro_roc = value.get<bool>();
      else if (key == "roc_reference") c.roc_reference = parse_roc_reference(value.get<std::string>());
      else if (key == "score_maps") c.score_maps = value.get<int>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "manifest") c.manifest = value.get<std::string>();
      else if (key == "dictionary") c.dictionary = value.get<std::string>();
      else if (key == "models") c.models = value.get<std::string>();
      else if (key == "features") c.features = value.get<std::string>();
      else throw Error(ErrorCode::InvalidConfig, "unknown config field '" + key + "'");
    } catch (const json::exception& e) {
      invalid(key, std::string("has the wrong type: ") + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig c;
  apply_config_json(c, detail::read_file(path));
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json doc = {{"seed", c.seed},
              {"family", std::string(to_string(c.family))},
              {"components", c.components},
              {"concentration", c.concentration},
              {"dict_max_iters", c.dict_max_iters},
              {"dict_tol", c.dict_tol},
              {"delta", c.delta},
              {"pi", c.pi},
              {"mixtures", c.mixtures},
              {"rounds", c.rounds},
              {"em_max_iters", c.em_max_iters},
              {"em_tol", c.em_tol},
              {"smoothing", c.smoothing},
              {"bernoulli_eps", c.bernoulli_eps},
              {"background_samples", c.background_samples},
              {"occlusion_aware_training", c.occlusion_aware_training},
              {"num_classes", c.num_classes},
              {"world_mixtures", c.world_mixtures},
              {"height", c.height},
              {"width", c.width},
              {"channels", c.channels},
              {"dirichlet", c.dirichlet},
              {"background_dirichlet", c.background_dirichlet},
              {"max_cosine", c.max_cosine},
              {"texture_palette", c.texture_palette},
              {"train_per_class", c.train_per_class},
              {"test_per_class", c.test_per_class},
              {"background_images", c.background_images},
              {"level_bounds",
               {{"L1", bounds_json(c.level_bounds.l1)},
                {"L2", bounds_json(c.level_bounds.l2)},
                {"L3", bounds_json(c.level_bounds.l3)}}},
              {"threshold", c.threshold},
              {"macro_roc", c.macro_roc},
              {"roc_reference", std::string(to_string(c.roc_reference))},
              {"score_maps", c.score_maps},
              {"out", c.out.string()},
              {"manifest", c.manifest.string()},
              {"dictionary", c.dictionary.string()},
              {"models", c.models.string()},
              {"features", c.features.string()}};
  return doc.dump(1) + "\n";
}

}  // namespace compnet
