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
#include <set>

#include <doctest.h>

#include "compnet/error.hpp"
#include "compnet/model_io.hpp"
#include "compnet/synth.hpp"
#include "test_util.hpp"

using namespace compnet;
using compnet::testing::scratch_dir;

namespace {

struct PoseFixture {
  SyntheticWorld world;
  std::vector<FeatureMap> maps;
  std::vector<int> poses;
};

PoseFixture pose_fixture(std::uint64_t seed, int n = 60, double s = 20.0) {
  WorldConfig cfg;
  cfg.num_classes = 1;
  cfg.mixtures = 2;
  cfg.height = 6;
  cfg.width = 6;
  cfg.concentration = s;
  cfg.seed = seed;
  PoseFixture f{make_world(cfg), {}, {}};
  for (int i = 0; i < n; ++i) {
    f.poses.push_back(i % 2);
    f.maps.push_back(sample_image(f.world, 0, i % 2, seed * 1000 + static_cast<std::uint64_t>(i)));
  }
  return f;
}

double partition_agreement(const std::vector<int>& a, const std::vector<int>& b) {
  int same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  const double direct = static_cast<double>(same) / static_cast<double>(a.size());
  return std::max(direct, 1.0 - direct);
}

Background vmf_bg(const SyntheticWorld& w) { return w.background; }

}  // namespace

TEST_SUITE("pose_mixtures") {

TEST_CASE("init_assignments edge cases") {
  const auto f = pose_fixture(3, 8);
  const auto one = init_assignments(f.maps, 1, f.world.dictionary, 1);
  CHECK(std::all_of(one.component.begin(), one.component.end(), [](int c) { return c == 0; }));
  const auto all = init_assignments(f.maps, 8, f.world.dictionary, 1);
  CHECK(std::set<int>(all.component.begin(), all.component.end()).size() == 8);
  CHECK(init_assignments(f.maps, 3, f.world.dictionary, 9).component ==
        init_assignments(f.maps, 3, f.world.dictionary, 9).component);
  CHECK_THROWS_AS(init_assignments(f.maps, 9, f.world.dictionary, 1), Error);
  const auto a = init_assignments(f.maps, 3, f.world.dictionary, 4);
  for (int s : a.sizes()) CHECK(s > 0);
  for (std::size_t i = 0; i < a.component.size(); ++i) {
    const auto nu = a.indicator(i);
    CHECK(std::count(nu.begin(), nu.end(), std::uint8_t{1}) == 1);
  }
}

TEST_CASE("two pose templates are separated by training with M = 2") {
  const auto f = pose_fixture(11, 80);
  TrainOptions opts;
  opts.mixtures = 2;
  opts.seed = 2;
  const auto r = train_class_model(f.maps, "a", f.world.dictionary, vmf_bg(f.world), opts);
  CHECK(partition_agreement(r.assignment.component, f.poses) >= 0.95);
}

TEST_CASE("hard-EM objective never decreases, both families") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto f = pose_fixture(seed, 40);
    TrainOptions opts;
    opts.mixtures = 3;
    opts.seed = seed;
    const auto v = train_class_model(f.maps, "a", f.world.dictionary, vmf_bg(f.world), opts);
    for (std::size_t i = 1; i < v.objective.size(); ++i) CHECK(v.objective[i] >= v.objective[i - 1] - 1e-9);

    std::vector<BinaryEncoding> enc;
    for (const auto& m : f.maps) enc.push_back(binarize(m, f.world.dictionary, opts.delta));
    opts.family = ModelFamily::Bernoulli;
    const auto b = train_class_model(f.maps, "a", f.world.dictionary, estimate_bernoulli_background(enc, 0, 1), opts);
    for (std::size_t i = 1; i < b.objective.size(); ++i) CHECK(b.objective[i] >= b.objective[i - 1] - 1e-9);
  }
}

TEST_CASE("M = 1 reduces to single-component estimation") {
  const auto f = pose_fixture(5, 20);
  TrainOptions opts;
  opts.mixtures = 1;
  const auto r = train_class_model(f.maps, "a", f.world.dictionary, vmf_bg(f.world), opts);
  CHECK(r.rounds_run == 1);
  const auto& fg = std::get<std::vector<VmfForeground>>(r.model.components).at(0);
  const auto ev = kernel_evidence(f.maps, f.world.dictionary);
  CHECK(fg.alphas() == estimate_alpha(ev, opts.em).foreground.alphas());
}

TEST_CASE("assign_mixture picks the generating component and breaks ties low") {
  const auto f = pose_fixture(7, 2, 200.0);
  ClassModel model{"a", f.world.classes[0]};
  const Background bg = f.world.background;
  CHECK(assign_mixture(f.maps[1], model, f.world.dictionary, bg, 0.5, 0.5).component == 1);
  CHECK(assign_mixture(f.maps[0], model, f.world.dictionary, bg, 0.5, 0.5).component == 0);
  ClassModel twins{"a", std::vector<VmfForeground>{f.world.classes[0][1], f.world.classes[0][1]}};
  CHECK(assign_mixture(f.maps[1], twins, f.world.dictionary, bg, 0.5, 0.5).component == 0);
  ClassModel single{"a", std::vector<VmfForeground>{f.world.classes[0][1]}};
  CHECK(assign_mixture(f.maps[0], single, f.world.dictionary, bg, 0.5, 0.5).component == 0);
}

TEST_CASE("permuting components permutes the choice and keeps the score") {
  const auto f = pose_fixture(13, 6);
  const auto& c = f.world.classes[0];
  ClassModel fwd{"a", std::vector<VmfForeground>{c[0], c[1]}};
  ClassModel rev{"a", std::vector<VmfForeground>{c[1], c[0]}};
  const Background bg = f.world.background;
  for (const auto& m : f.maps) {
    const auto a = assign_mixture(m, fwd, f.world.dictionary, bg, 0.5, 0.5);
    const auto b = assign_mixture(m, rev, f.world.dictionary, bg, 0.5, 0.5);
    CHECK(a.component == 1 - b.component);
    CHECK(a.score == b.score);
  }
}

TEST_CASE("class model files round trip with the family magic up front") {
  const auto f = pose_fixture(17, 10);
  const auto dir = scratch_dir("pose_models");
  const ClassModel vm{"car", f.world.classes[0]};
  const Background vbg = f.world.background;
  const auto hash = content_hash(f.world.dictionary);
  write_class_model(vm, vbg, hash, dir / "car.cvmf");
  const auto bytes = encode_class_model(vm, vbg, hash);
  CHECK(bytes.substr(0, 4) == "CVMF");
  const auto back = read_class_model(dir / "car.cvmf");
  CHECK(back.model.label == "car");
  CHECK(back.dictionary_hash == hash);
  const auto& comps = std::get<std::vector<VmfForeground>>(back.model.components);
  REQUIRE(comps.size() == 2);
  CHECK((comps[1].alphas() - f.world.classes[0][1].alphas()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(encode_class_model(back.model, back.background, hash) == encode_class_model(back.model, back.background, hash));

  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(3, 4, 0.25);
  const ClassModel bm{"bus", std::vector<BernoulliForeground>{BernoulliForeground(2, 2, a)}};
  const Background bbg = BernoulliBackground(Eigen::Vector3d(0.1, 0.2, 0.3));
  const auto bb = encode_class_model(bm, bbg);
  CHECK(bb.substr(0, 4) == "CBRN");
  const auto bback = decode_class_model(bb);
  CHECK(bback.model.family() == ModelFamily::Bernoulli);
  CHECK_FALSE(bback.dictionary_hash.has_value());
  CHECK(encode_class_model(bback.model, bback.background) == bb);
  auto broken = bb;
  broken[0] = 'Q';
  CHECK_THROWS_AS(decode_class_model(broken), Error);
  CHECK_THROWS_AS(decode_class_model(bb.substr(0, bb.size() - 2)), Error);
}

}  // TEST_SUITE
