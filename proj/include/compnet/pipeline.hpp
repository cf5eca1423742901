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

// End-to-end commands behind the command-line tool. Every command is a pure
// function of its configuration and inputs; progress goes to `log`.

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "compnet/config.hpp"
#include "compnet/evaluation.hpp"
#include "compnet/inference.hpp"

namespace compnet {

/// Accumulates classification records and per-pixel localization scores.
/// Localization uses the winning component of either the labeled class
/// (default) or the predicted class.
class Evaluation {
 public:
  Evaluation(std::span<const ClassModel> models, const Dictionary& dict, const Background& bg, double pi,
             double delta, double threshold = 0.0, RocReference reference = RocReference::Label);

  struct Outcome {
    ClassificationResult classification;
    Localization localization;
  };

  Outcome add(const std::string& name, const std::string& label, OcclusionLevel level, OccluderType type,
              const FeatureMap& map, const OcclusionMask* truth);

  const std::vector<PredictionRecord>& records() const { return records_; }
  AccuracyTable accuracy() const { return tally_accuracy(records_); }
  /// Pixels pooled over all occluded images ("pooled"), per occluder type and per level.
  const std::map<std::string, PixelScores>& pixels() const { return pixels_; }
  std::map<std::string, RocCurve> roc_curves() const;
  std::map<std::string, double> macro_aucs() const;

 private:
  std::span<const ClassModel> models_;
  const Dictionary& dict_;
  const Background& bg_;
  double pi_;
  double delta_;
  double threshold_;
  RocReference reference_;
  std::vector<PredictionRecord> records_;
  std::map<std::string, PixelScores> pixels_;
  std::map<std::string, std::vector<PixelScores>> per_image_;
};

/// Background model of the chosen family fitted on `maps`.
Background fit_background(std::span<const FeatureMap> maps, const Dictionary& dict, const RunConfig& config);

void cmd_synth(const RunConfig& config, std::ostream& log);
void cmd_learn_dict(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_classify(const RunConfig& config, std::ostream& log);
void cmd_localize(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);

/// Default locations under `config.out` when a path is not given explicitly.
std::filesystem::path dictionary_path(const RunConfig& config);
std::filesystem::path models_path(const RunConfig& config);
std::filesystem::path manifest_path(const RunConfig& config);

}  // namespace compnet
