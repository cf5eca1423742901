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

#include "compnet/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "compnet/detail/binary_io.hpp"
#include "compnet/error.hpp"
#include "compnet/feature_io.hpp"
#include "compnet/model_io.hpp"
#include "compnet/synth.hpp"
#include "compnet/vmf.hpp"

namespace compnet {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<FeatureMap> load_maps(const DatasetManifest& manifest, std::span<const ManifestEntry* const> entries) {
  std::vector<FeatureMap> maps;
  maps.reserve(entries.size());
  for (const auto* e : entries) maps.push_back(read_feature_map(manifest.resolve(e->feature_path)));
  return maps;
}

struct LoadedModels {
  Dictionary dict;
  std::vector<ClassModel> models;
  Background background;
};

LoadedModels load_models(const RunConfig& config) {
  LoadedModels out;
  out.dict = read_dictionary(dictionary_path(config));
  auto files = read_model_directory(models_path(config));
  if (files.empty()) throw Error(ErrorCode::InsufficientData, "no model files in " + models_path(config).string());
  if (files.front().dictionary_hash && *files.front().dictionary_hash != content_hash(out.dict)) {
    throw Error(ErrorCode::DimensionMismatch, "models were trained with a different dictionary");
  }
  out.background = files.front().background;
  for (auto& f : files) out.models.push_back(std::move(f.model));
  return out;
}

std::string pgm_name(const std::string& entry) {
  std::string name = entry;
  std::replace(name.begin(), name.end(), '/', '_');
  const auto dot = name.rfind('.');
  if (dot != std::string::npos) name.resize(dot);
  return name + ".pgm";
}

}  // namespace

fs::path dictionary_path(const RunConfig& config) {
  return config.dictionary.empty() ? config.out / "dictionary.cdic" : config.dictionary;
}
fs::path models_path(const RunConfig& config) { return config.models.empty() ? config.out / "models" : config.models; }
fs::path manifest_path(const RunConfig& config) {
  return config.manifest.empty() ? config.out / "manifest.json" : config.manifest;
}

Evaluation::Evaluation(std::span<const ClassModel> models, const Dictionary& dict, const Background& bg, double pi,
                       double delta, double threshold, RocReference reference)
    : models_(models), dict_(dict), bg_(bg), pi_(pi), delta_(delta), threshold_(threshold), reference_(reference) {
  check_prior(pi);
  if (models.empty()) throw Error(ErrorCode::InsufficientData, "evaluation needs at least one class model");
}

Evaluation::Outcome Evaluation::add(const std::string& name, const std::string& label, OcclusionLevel level,
                                    OccluderType type, const FeatureMap& map, const OcclusionMask* truth) {
  const auto ev = image_evidence(map, dict_, delta_);
  auto cls = classify(ev, models_, bg_, pi_);
  std::size_t model = static_cast<std::size_t>(cls.model_index);
  int component = cls.mixture;
  if (reference_ == RocReference::Label) {
    const auto it = std::find_if(models_.begin(), models_.end(), [&](const auto& m) { return m.label == label; });
    if (it != models_.end()) {
      model = static_cast<std::size_t>(it - models_.begin());
      component = assign_mixture(ev, *it, bg_, pi_).component;
    }
  }
  auto loc = localize(ev, models_[model], component, bg_, pi_, threshold_);
  records_.push_back({name, label, cls.label, level, type});
  if (truth && truth->occluded_count() > 0) {
    PixelScores img;
    img.add(loc.scores, *truth);
    for (const std::string& key : {std::string("pooled"), std::string(to_string(type)), std::string(to_string(level))}) {
      pixels_[key].append(img);
      per_image_[key].push_back(img);
    }
  }
  return {std::move(cls), std::move(loc)};
}

std::map<std::string, RocCurve> Evaluation::roc_curves() const {
  std::map<std::string, RocCurve> out;
  for (const auto& [key, px] : pixels_) {
    if (px.has_both_labels()) out[key] = px.roc();
  }
  return out;
}

std::map<std::string, double> Evaluation::macro_aucs() const {
  std::map<std::string, double> out;
  for (const auto& [key, images] : per_image_) {
    if (std::any_of(images.begin(), images.end(), [](const auto& i) { return i.has_both_labels(); })) {
      out[key] = macro_auc(images);
    }
  }
  return out;
}

Background fit_background(std::span<const FeatureMap> maps, const Dictionary& dict, const RunConfig& config) {
  if (config.family == ModelFamily::Vmf) {
    const auto evidence = kernel_evidence(maps, dict);
    EmOptions em{config.em_max_iters, config.em_tol, config.smoothing};
    return estimate_vmf_background(evidence, em).background;
  }
  std::vector<BinaryEncoding> encodings;
  encodings.reserve(maps.size());
  for (const auto& m : maps) encodings.push_back(binarize(m, dict, config.delta));
  return estimate_bernoulli_background(encodings, static_cast<std::size_t>(config.background_samples),
                                       substream_seed(config.seed, "background"), config.bernoulli_eps);
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto dataset = generate_dataset(config.dataset_config());
  write_dataset(dataset, config.out);
  log << "synth: wrote " << dataset.samples.size() << " entries to " << config.out.string() << "\n";
}

void cmd_learn_dict(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto manifest = load_manifest(manifest_path(config));
  const auto features = stack_active_features(load_maps(manifest, manifest.select(Split::Train)));
  DictionaryLearningOptions opts;
  opts.components = config.components;
  opts.concentration = config.concentration;
  opts.max_iters = config.dict_max_iters;
  opts.tol = config.dict_tol;
  opts.seed = substream_seed(config.seed, "dictionary");
  const auto result = learn_dictionary(features, opts);
  for (std::size_t i = 0; i < result.objective.size(); ++i) {
    log << "learn-dict: iteration " << i << " objective " << num(result.objective[i]) << "\n";
  }
  const auto path = dictionary_path(config);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  write_dictionary(result.dictionary, path);
  log << "learn-dict: K=" << result.dictionary.size() << " converged=" << (result.converged ? "yes" : "no")
      << " wrote " << path.string() << "\n";
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto manifest = load_manifest(manifest_path(config));
  const auto dict = read_dictionary(dictionary_path(config));
  auto bg_entries = manifest.select(Split::Background);
  if (bg_entries.empty()) {
    log << "train: no background split, fitting the background on training images\n";
    bg_entries = manifest.select(Split::Train);
  }
  const auto bg = fit_background(load_maps(manifest, bg_entries), dict, config);
  const auto labels = manifest.class_labels();
  if (labels.empty()) throw Error(ErrorCode::InsufficientData, "manifest has no training entries");

  const auto dir = models_path(config);
  ensure_dir(dir);
  const auto train = manifest.select(Split::Train);
  const std::uint64_t hash = config.family == ModelFamily::Vmf ? content_hash(dict) : 0;
  for (const auto& label : labels) {
    std::vector<const ManifestEntry*> entries;
    std::copy_if(train.begin(), train.end(), std::back_inserter(entries), [&](auto* e) { return e->label == label; });
    const auto maps = load_maps(manifest, entries);
    auto options = config.train_options();
    options.seed = substream_seed(config.seed, "train." + label);
    const auto result = train_class_model(maps, label, dict, bg, options);
    for (std::size_t r = 0; r < result.objective.size(); ++r) {
      log << "train: class " << label << " round " << r << " objective " << num(result.objective[r]) << "\n";
    }
    const auto path = dir / (label + std::string(model_extension(config.family)));
    write_class_model(result.model, bg, hash, path);
    log << "train: class " << label << " images " << maps.size() << " wrote " << path.string() << "\n";
  }
}

void cmd_classify(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.features.empty()) throw Error(ErrorCode::InvalidConfig, "classify needs --features");
  const auto loaded = load_models(config);
  const auto map = read_feature_map(config.features);
  const auto result = classify(map, loaded.models, loaded.dict, loaded.background, config.pi, config.delta);
  log << "predicted " << result.label << " mixture " << result.mixture << " score " << num(result.score) << "\n";
  for (const auto& [label, score] : result.class_scores) log << "class " << label << " score " << num(score) << "\n";
}

void cmd_localize(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.features.empty()) throw Error(ErrorCode::InvalidConfig, "localize needs --features");
  const auto loaded = load_models(config);
  const auto map = read_feature_map(config.features);
  const auto ev = image_evidence(map, loaded.dict, config.delta);
  const auto cls = classify(ev, loaded.models, loaded.background, config.pi);
  const auto loc = localize(ev, loaded.models[static_cast<std::size_t>(cls.model_index)], cls.mixture,
                            loaded.background, config.pi, config.threshold);
  ensure_dir(config.out);
  write_mask(loc.predicted, config.out / "occluder.cmsk");
  detail::write_file(config.out / "scoremap.pgm", render_pgm(loc.scores));
  log << "localize: class " << cls.label << " mixture " << cls.mixture << " occluded "
      << loc.predicted.occluded_count() << "/" << loc.predicted.positions() << "\n";
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto manifest = load_manifest(manifest_path(config));
  const auto loaded = load_models(config);
  Evaluation eval(loaded.models, loaded.dict, loaded.background, config.pi, config.delta, config.threshold,
                  config.roc_reference);

  const auto out = config.out / "eval";
  ensure_dir(out / "scoremaps");
  int rendered = 0;
  for (const auto* e : manifest.select(Split::Test)) {
    const auto map = read_feature_map(manifest.resolve(e->feature_path));
    std::optional<OcclusionMask> truth;
    if (e->mask_path) {
      truth = read_mask(manifest.resolve(*e->mask_path));
      check_pairing(map, *truth);
    }
    const auto outcome = eval.add(e->feature_path, e->label, e->occlusion_level, e->occluder_type, map,
                                  truth ? &*truth : nullptr);
    if (truth && rendered < config.score_maps) {
      detail::write_file(out / "scoremaps" / pgm_name(e->feature_path), render_pgm(outcome.localization.scores));
      ++rendered;
    }
  }
  const auto table = eval.accuracy();
  detail::write_file(out / "accuracy.csv", accuracy_csv({{std::string(to_string(config.family)), table}}));
  detail::write_file(out / "predictions.csv", predictions_csv(eval.records()));
  const auto curves = eval.roc_curves();
  detail::write_file(out / "roc.json", roc_json(curves, config.macro_roc ? eval.macro_aucs() : std::map<std::string, double>{}));
  log << "eval: " << eval.records().size() << " test images";
  if (table.mean) log << " mean accuracy " << num(*table.mean);
  if (auto it = curves.find("pooled"); it != curves.end()) log << " pooled AUC " << num(it->second.auc);
  log << "\n";
}

}  // namespace compnet
