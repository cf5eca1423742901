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

#include "compnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "compnet/error.hpp"
#include "compnet/feature_io.hpp"

namespace compnet {

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "one label per score required");
  const auto positives = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l; }));
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw Error(ErrorCode::InsufficientData, "ROC needs at least one pixel of each label");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp) += 1.0;
      ++i;
    }
    curve.points.push_back({fp / negatives, tp / positives});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

void PixelScores::add(const OcclusionScoreMap& map, const OcclusionMask& truth) {
  if (map.height != truth.height() || map.width != truth.width()) {
    throw Error(ErrorCode::DimensionMismatch, "score map and ground-truth mask lattices differ");
  }
  for (int p = 0; p < map.positions(); ++p) {
    if (!map.is_active(p)) continue;
    scores.push_back(map.scores(p));
    labels.push_back(truth.occluded(p) ? 1 : 0);
  }
}

void PixelScores::append(const PixelScores& other) {
  scores.insert(scores.end(), other.scores.begin(), other.scores.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

bool PixelScores::has_both_labels() const {
  const auto pos = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  return pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size());
}

double macro_auc(std::span<const PixelScores> per_image) {
  double sum = 0.0;
  int n = 0;
  for (const auto& img : per_image) {
    if (!img.has_both_labels()) continue;
    sum += img.roc().auc;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::InsufficientData, "no image contains both labels");
  return sum / n;
}

std::size_t accuracy_cell(OcclusionLevel level, OccluderType type) {
  if (level == OcclusionLevel::None) return 0;
  std::size_t t = 0;
  switch (type) {
    case OccluderType::White: t = 0; break;
    case OccluderType::Noise: t = 1; break;
    case OccluderType::Texture: t = 2; break;
    case OccluderType::Object: t = 3; break;
    case OccluderType::None: throw Error(ErrorCode::InvalidManifest, "occluded entry without occluder type");
  }
  return 1 + (static_cast<std::size_t>(level) - 1) * 4 + t;
}

std::vector<std::string> accuracy_columns() {
  std::vector<std::string> cols{"occ-0"};
  for (auto level : kOccludedLevels) {
    for (auto type : kOccluderTypes) cols.push_back(std::string(to_string(level)) + "-" + type_code(type));
  }
  cols.push_back("mean");
  return cols;
}

AccuracyTable tally_accuracy(std::span<const PredictionRecord> records) {
  AccuracyTable table;
  std::array<int, kAccuracyCells> correct{};
  for (const auto& r : records) {
    const auto cell = accuracy_cell(r.level, r.type);
    ++table.counts[cell];
    if (r.predicted == r.label) ++correct[cell];
  }
  double sum = 0.0;
  int populated = 0;
  for (std::size_t c = 0; c < kAccuracyCells; ++c) {
    if (table.counts[c] == 0) continue;
    table.cells[c] = static_cast<double>(correct[c]) / table.counts[c];
    sum += *table.cells[c];
    ++populated;
  }
  if (populated > 0) table.mean = sum / populated;
  return table;
}

AccuracyTable accuracy_table(const DatasetManifest& dataset, std::span<const ClassModel> models,
                             const Dictionary& dict, const Background& bg, double pi, double delta,
                             std::vector<PredictionRecord>* records) {
  std::vector<PredictionRecord> local;
  auto& out = records ? *records : local;
  for (const auto* e : dataset.select(Split::Test)) {
    const auto map = read_feature_map(dataset.resolve(e->feature_path));
    const auto result = classify(map, models, dict, bg, pi, delta);
    out.push_back({e->feature_path, e->label, result.label, e->occlusion_level, e->occluder_type});
  }
  return tally_accuracy(out);
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string accuracy_csv(const std::vector<std::pair<std::string, AccuracyTable>>& rows) {
  std::string out = "model";
  for (const auto& c : accuracy_columns()) out += "," + c;
  out += "\n";
  for (const auto& [name, table] : rows) {
    out += name;
    for (const auto& cell : table.cells) out += "," + (cell ? fixed(*cell) : std::string());
    out += "," + (table.mean ? fixed(*table.mean) : std::string());
    out += "\n";
  }
  return out;
}

std::string predictions_csv(std::span<const PredictionRecord> records) {
  std::string out = "entry,label,predicted,occlusion_level,occluder_type\n";
  for (const auto& r : records) {
    out += r.entry + "," + r.label + "," + r.predicted + "," + std::string(to_string(r.level)) + "," +
           std::string(to_string(r.type)) + "\n";
  }
  return out;
}

std::string roc_json(const std::map<std::string, RocCurve>& curves, const std::map<std::string, double>& macro) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, curve] : curves) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : curve.points) points.push_back({pt.fpr, pt.tpr});
    doc[name] = {{"auc", curve.auc}, {"points", std::move(points)}};
  }
  if (!macro.empty()) doc["macro_auc"] = macro;
  return doc.dump() + "\n";
}

std::string render_pgm(const OcclusionScoreMap& map, bool positive_only) {
  Eigen::VectorXd v = map.scores;
  if (positive_only) v = v.cwiseMax(0.0);
  const double lo = v.size() ? v.minCoeff() : 0.0;
  const double hi = v.size() ? v.maxCoeff() : 0.0;
  std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  for (Eigen::Index p = 0; p < v.size(); ++p) {
    const double scaled = hi > lo ? (v(p) - lo) / (hi - lo) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * scaled))));
  }
  return out;
}

}  // namespace compnet
