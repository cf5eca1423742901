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

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "compnet/error.hpp"
#include "compnet/evaluation.hpp"
#include "compnet/inference.hpp"
#include "compnet/synth.hpp"
#include "test_util.hpp"

using namespace compnet;

namespace {

/// P(score_pos > score_neg) + 0.5 P(equal), by counting every pair.
double mann_whitney(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

SyntheticWorld small_world(std::uint64_t seed) {
  WorldConfig cfg;
  cfg.seed = seed;
  return make_world(cfg);
}

std::vector<ClassModel> world_models(const SyntheticWorld& w) {
  std::vector<ClassModel> models;
  for (std::size_t y = 0; y < w.classes.size(); ++y) models.push_back({std::to_string(y), w.classes[y]});
  return models;
}

}  // namespace

TEST_SUITE("inference_eval") {

TEST_CASE("ROC of a hand-worked example") {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const std::vector<std::uint8_t> y{1, 0, 1, 0};
  const auto r = roc_curve(s, y);
  const std::vector<std::pair<double, double>> expected{{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
  REQUIRE(r.points.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(r.points[i].fpr == expected[i].first);
    CHECK(r.points[i].tpr == expected[i].second);
  }
  CHECK(r.auc == doctest::Approx(0.75));
}

TEST_CASE("perfect, inverted and tied scores") {
  CHECK(roc_curve(std::vector<double>{3, 2, 1, 0}, std::vector<std::uint8_t>{1, 1, 0, 0}).auc == 1.0);
  CHECK(roc_curve(std::vector<double>{0, 1, 2, 3}, std::vector<std::uint8_t>{1, 1, 0, 0}).auc == 0.0);
  CHECK(roc_curve(std::vector<double>{1, 1, 1, 1}, std::vector<std::uint8_t>{1, 0, 1, 0}).auc == 0.5);
}

TEST_CASE("AUC equals the Mann-Whitney statistic and is invariant to increasing maps") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coarse(0, 20);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 300; ++i) {
      const bool pos = coin(rng);
      y.push_back(pos);
      s.push_back(coarse(rng) + (pos ? 3 : 0));  // many ties
    }
    const auto r = roc_curve(s, y);
    CHECK(r.auc == doctest::Approx(mann_whitney(s, y)).epsilon(1e-12));
    double integral = 0.0;
    for (std::size_t i = 1; i < r.points.size(); ++i) {
      CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
      CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
      integral += (r.points[i].fpr - r.points[i - 1].fpr) * (r.points[i].tpr + r.points[i - 1].tpr) / 2;
    }
    CHECK(std::abs(integral - r.auc) < 1e-12);
    std::vector<double> t;
    for (double v : s) t.push_back(std::exp(0.3 * v) * 2.0 + 1.0);
    CHECK(roc_curve(t, y).auc == r.auc);
  }
}

TEST_CASE("ROC needs both labels") {
  try {
    roc_curve(std::vector<double>{1, 2}, std::vector<std::uint8_t>{1, 1});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("pixel pooling skips inactive positions") {
  OcclusionScoreMap m{1, 3, Eigen::Vector3d(2.0, 0.0, -1.0), {1, 0, 1}};
  PixelScores px;
  px.add(m, OcclusionMask(1, 3, {1, 1, 0}));
  CHECK(px.scores == std::vector<double>{2.0, -1.0});
  CHECK(px.labels == std::vector<std::uint8_t>{1, 0});
  CHECK(px.roc().auc == 1.0);
}

TEST_CASE("accuracy table matches an independent tally") {
  std::vector<PredictionRecord> recs;
  std::mt19937_64 rng(3);
  std::bernoulli_distribution right(0.8);
  std::array<int, 13> n{}, c{};
  for (int i = 0; i < 400; ++i) {
    const auto level = static_cast<OcclusionLevel>(i % 4);
    const auto type = level == OcclusionLevel::None ? OccluderType::None : static_cast<OccluderType>(1 + (i / 4) % 4);
    if (level == OcclusionLevel::L3 && type == OccluderType::Object) continue;  // leave one cell empty
    const bool ok = right(rng);
    recs.push_back({"e" + std::to_string(i), "a", ok ? "a" : "b", level, type});
    const std::size_t cell = level == OcclusionLevel::None ? 0 : 1 + (static_cast<int>(level) - 1) * 4 + (static_cast<int>(type) - 1);
    ++n[cell];
    c[cell] += ok;
  }
  const auto t = tally_accuracy(recs);
  double sum = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < 13; ++i) {
    CHECK(t.counts[i] == n[i]);
    if (n[i] == 0) {
      CHECK_FALSE(t.cells[i].has_value());
      continue;
    }
    CHECK(*t.cells[i] == doctest::Approx(static_cast<double>(c[i]) / n[i]));
    sum += static_cast<double>(c[i]) / n[i];
    ++cells;
  }
  CHECK(cells == 12);
  CHECK(*t.mean == doctest::Approx(sum / cells));

  const auto csv = accuracy_csv({{"vmf", t}});
  CHECK(csv.substr(0, csv.find('\n')) ==
        "model,occ-0,L1-w,L1-n,L1-t,L1-o,L2-w,L2-n,L2-t,L2-o,L3-w,L3-n,L3-t,L3-o,mean");
  const auto row = csv.substr(csv.find('\n') + 1);
  CHECK(std::count(row.begin(), row.end(), ',') == 14);
  CHECK(row.find(",,") != std::string::npos);
}

TEST_CASE("PGM rendering: header, min-max scaling, positive-only clipping") {
  OcclusionScoreMap m{2, 2, Eigen::Vector4d(-4.0, 0.0, 1.0, 2.0), {1, 1, 1, 1}};
  const auto pgm = render_pgm(m);
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(pgm.size() == header.size() + 4);
  CHECK(pgm.substr(0, header.size()) == header);
  const auto* px = reinterpret_cast<const unsigned char*>(pgm.data() + header.size());
  CHECK(px[0] == 0);
  CHECK(px[1] == 0);
  CHECK(px[2] == 128);
  CHECK(px[3] == 255);
  const auto raw = render_pgm(m, false);
  const auto* rpx = reinterpret_cast<const unsigned char*>(raw.data() + header.size());
  CHECK(rpx[0] == 0);
  CHECK(rpx[1] == 170);
  OcclusionScoreMap flat{1, 2, Eigen::Vector2d(-1.0, -1.0), {1, 1}};
  CHECK(render_pgm(flat) == "P5\n2 1\n255\n" + std::string(2, '\0'));
}

TEST_CASE("classification: clean images, and ties go to the smallest label") {
  const auto world = small_world(21);
  const auto models = world_models(world);
  const Background bg = world.background;
  for (int y = 0; y < 3; ++y) {
    const auto map = sample_image(world, y, 1, 400 + static_cast<std::uint64_t>(y));
    const auto r = classify(map, models, world.dictionary, bg, 0.5, 0.5);
    CHECK(r.label == std::to_string(y));
    CHECK(r.mixture == 1);
    CHECK(r.class_scores.size() == 3);
  }
  std::vector<ClassModel> twins{{"b", world.classes[0]}, {"a", world.classes[0]}};
  const auto map = sample_image(world, 0, 0, 5);
  const auto r = classify(map, twins, world.dictionary, bg, 0.5, 0.5);
  CHECK(r.label == "a");
  CHECK(r.model_index == 1);
}

TEST_CASE("localization shrinks with the threshold and overlaps the true occluder") {
  const auto world = small_world(23);
  const auto models = world_models(world);
  const Background bg = world.background;
  const auto clean = sample_image(world, 1, 0, 66);
  const auto occ = apply_occluder(clean, world, 1, OccluderType::Texture, OcclusionLevel::L2, 67);
  const auto ev = image_evidence(occ.map, world.dictionary, 0.5);
  int previous = occ.map.positions() + 1;
  for (double tau : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
    const auto loc = localize(ev, models[1], 0, bg, 0.5, tau);
    CHECK(loc.predicted.occluded_count() <= previous);
    previous = loc.predicted.occluded_count();
  }
  const auto loc = localize(ev, models[1], 0, bg, 0.5, 0.0);
  int inter = 0, uni = 0;
  for (int p = 0; p < occ.map.positions(); ++p) {
    inter += loc.predicted.occluded(p) && occ.mask.occluded(p);
    uni += loc.predicted.occluded(p) || occ.mask.occluded(p);
  }
  CHECK(static_cast<double>(inter) / uni > 0.5);
}

}  // TEST_SUITE
