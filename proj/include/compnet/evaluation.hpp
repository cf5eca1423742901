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

// Evaluation protocol: per-pixel ROC of occlusion scores and the
// accuracy-by-occlusion table.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compnet/inference.hpp"
#include "compnet/manifest.hpp"
#include "compnet/occlusion_mask.hpp"
#include "compnet/score_map.hpp"

namespace compnet {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  /// Monotone from (0, 0) to (1, 1).
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Sweeps the threshold over every distinct score (equal scores move
/// together); label 1 is the positive (occluded) class. AUC by trapezoid.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Pooled per-pixel scores and ground-truth labels; inactive positions are skipped.
struct PixelScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  void add(const OcclusionScoreMap& map, const OcclusionMask& truth);
  void append(const PixelScores& other);
  bool has_both_labels() const;
  RocCurve roc() const { return roc_curve(scores, labels); }
};

/// Mean of per-image AUCs over images that contain both labels.
double macro_auc(std::span<const PixelScores> per_image);

struct PredictionRecord {
  std::string entry;
  std::string label;
  std::string predicted;
  OcclusionLevel level = OcclusionLevel::None;
  OccluderType type = OccluderType::None;
};

inline constexpr std::size_t kAccuracyCells = 13;

/// Column order: occ-0, L1(w,n,t,o), L2(w,n,t,o), L3(w,n,t,o).
std::size_t accuracy_cell(OcclusionLevel level, OccluderType type);
std::vector<std::string> accuracy_columns();

struct AccuracyTable {
  std::array<std::optional<double>, kAccuracyCells> cells;
  std::array<int, kAccuracyCells> counts{};
  /// Arithmetic mean of the populated cells.
  std::optional<double> mean;

  std::optional<double> at(OcclusionLevel level, OccluderType type) const { return cells[accuracy_cell(level, type)]; }
};

AccuracyTable tally_accuracy(std::span<const PredictionRecord> records);

/// Classifies every test entry of the manifest and tallies the table.
AccuracyTable accuracy_table(const DatasetManifest& dataset, std::span<const ClassModel> models,
                             const Dictionary& dict, const Background& bg, double pi, double delta,
                             std::vector<PredictionRecord>* records = nullptr);

/// One CSV row per named table; absent cells are empty fields.
std::string accuracy_csv(const std::vector<std::pair<std::string, AccuracyTable>>& rows);
std::string predictions_csv(std::span<const PredictionRecord> records);
/// Curves keyed by group name; `macro` adds a "macro_auc" object when non-empty.
std::string roc_json(const std::map<std::string, RocCurve>& curves, const std::map<std::string, double>& macro = {});

/// Binary PGM (P5, 8-bit), min-max scaled over the lattice. With
/// `positive_only` negative scores are clipped to zero first.
std::string render_pgm(const OcclusionScoreMap& map, bool positive_only = true);

}  // namespace compnet
