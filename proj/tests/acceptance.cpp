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

// Acceptance suite: runs criteria A1-A8 and prints one PASS/FAIL line each.
// Usage: compnet_acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "compnet/error.hpp"
#include "compnet/pipeline.hpp"
#include "compnet/synth.hpp"
#include "compnet/vmf.hpp"
#include "compnet/vmf_model.hpp"

namespace fs = std::filesystem;
using namespace compnet;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared fixtures.

Eigen::MatrixXd random_simplex(int k, int n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::MatrixXd m(k, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < k; ++i) m(i, j) = e(rng);
    m.col(j) /= m.col(j).sum();
  }
  return m;
}

Dictionary random_dictionary(int k, int c, double s, Rng& rng) {
  Dictionary d;
  d.means.resize(k, c);
  for (int i = 0; i < k; ++i) d.means.row(i) = sample_uniform_sphere(c, rng).transpose();
  d.concentration = s;
  return d;
}

FeatureMap random_map(int h, int w, int c, Rng& rng, double inactive) {
  Eigen::MatrixXd data(c, h * w);
  std::vector<std::uint8_t> active(static_cast<std::size_t>(h * w), 1);
  std::bernoulli_distribution drop(inactive);
  for (int p = 0; p < h * w; ++p) {
    data.col(p) = sample_uniform_sphere(c, rng);
    if (drop(rng)) {
      data.col(p).setZero();
      active[static_cast<std::size_t>(p)] = 0;
    }
  }
  return FeatureMap(h, w, std::move(data), std::move(active));
}

std::vector<FeatureMap> as_double(std::span<const SyntheticSample* const> samples) {
  std::vector<FeatureMap> maps;
  maps.reserve(samples.size());
  for (const auto* s : samples) maps.push_back(s->map.cast<double>());
  return maps;
}

bool non_decreasing(const std::vector<double>& v, double slack, double* worst) {
  bool ok = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double drop = v[i - 1] - v[i];
    *worst = std::max(*worst, drop);
    ok = ok && drop <= slack;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// A1: oracle equivalence.

Verdict a1() {
  Rng rng(substream_seed(1, "A1"));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto d = random_dictionary(4, 8, 1.0 + 29.0 * std::uniform_real_distribution<double>()(rng), rng);
    d.log_normalizer = std::normal_distribution<double>(0.0, 3.0)(rng);
    const auto map = random_map(4, 4, 8, rng, 0.15);
    const VmfForeground fg(4, 4, random_simplex(4, 16, rng));
    worst = std::max(worst, std::abs(generative_log_likelihood(map, fg, d) - oracle_log_likelihood(map, fg.alphas(), d)));
    const auto enc = binarize(map, d, std::uniform_real_distribution<double>(-0.3, 0.5)(rng));
    const BernoulliForeground bfg(4, 4, random_simplex(4, 16, rng));
    worst = std::max(worst, std::abs(bernoulli_log_likelihood(enc, bfg) - oracle_log_likelihood(enc, bfg.alphas())));
  }
  return {worst <= 1e-9, fmt("max |ours - oracle| = %.3g over 100 fixtures x 2 families (tol 1e-9)", worst)};
}

// ---------------------------------------------------------------------------
// A2: EM monotonicity.

Verdict a2() {
  const double slack = 1e-9;
  double worst = 0.0;
  int failures = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    DatasetConfig cfg;
    cfg.world.height = 6;
    cfg.world.width = 6;
    cfg.world.components = 8;
    cfg.world.seed = 100 + run;
    cfg.train_per_class = 30;
    cfg.test_per_class = 0;
    cfg.background_images = 10;
    cfg.world.num_classes = 1;
    const auto ds = generate_dataset(cfg);
    const auto train = as_double(ds.select(Split::Train));
    const auto background = as_double(ds.select(Split::Background));

    DictionaryLearningOptions dopts;
    dopts.components = 8;
    dopts.seed = run;
    const auto learned = learn_dictionary(stack_active_features(train), dopts);
    failures += !non_decreasing(learned.objective, slack, &worst);
    const auto& dict = learned.dictionary;

    const auto ev = kernel_evidence(train, dict);
    failures += !non_decreasing(estimate_alpha(ev, EmOptions{}).objective, slack, &worst);
    const auto bg = estimate_vmf_background(kernel_evidence(background, dict), EmOptions{});
    failures += !non_decreasing(bg.objective, slack, &worst);

    TrainOptions topts;
    topts.mixtures = 3;
    topts.seed = run;
    failures += !non_decreasing(train_class_model(train, "0", dict, bg.background, topts).objective, slack, &worst);
    std::vector<BinaryEncoding> enc;
    for (const auto& m : background) enc.push_back(binarize(m, dict, topts.delta));
    topts.family = ModelFamily::Bernoulli;
    const Background bbg = estimate_bernoulli_background(enc, 0, run);
    failures += !non_decreasing(train_class_model(train, "0", dict, bbg, topts).objective, slack, &worst);
  }
  return {failures == 0, fmt("%d of 100 objective traces decreased; largest drop %.3g (slack 1e-9)", failures,
                             std::max(worst, 0.0))};
}

// ---------------------------------------------------------------------------
// A3: gradient check.

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& theta) {
  Eigen::MatrixXd out(theta.rows(), theta.cols());
  for (Eigen::Index p = 0; p < theta.cols(); ++p) {
    const Eigen::ArrayXd e = (theta.col(p).array() - theta.col(p).maxCoeff()).exp();
    out.col(p) = (e / e.sum()).matrix();
  }
  return out;
}

double summed(std::span<const FeatureMap> maps, const VmfForeground& fg, const Dictionary& d) {
  double s = 0.0;
  for (const auto& m : maps) s += generative_log_likelihood(m, fg, d);
  return s;
}

Verdict a3() {
  Rng rng(substream_seed(3, "A3"));
  const double h = 1e-5;
  double worst = 0.0;
  int coords = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); };
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 3 + trial % 3;
    const int C = 4 + trial % 4;
    const auto d = random_dictionary(K, C, 2.0 + trial, rng);
    std::vector<FeatureMap> maps;
    for (int i = 0; i < 3; ++i) maps.push_back(random_map(2, 3, C, rng, 0.15));
    const Eigen::MatrixXd theta = random_simplex(K, 6, rng).array().log();
    const VmfForeground fg(2, 3, softmax_columns(theta));
    const auto g = loglik_gradient(maps, fg, d);
    for (int p = 0; p < 6; ++p) {
      for (int k = 0; k < K; ++k) {
        Eigen::MatrixXd tp = theta, tm = theta;
        tp(k, p) += h;
        tm(k, p) -= h;
        const double fd = (summed(maps, VmfForeground(2, 3, softmax_columns(tp)), d) -
                           summed(maps, VmfForeground(2, 3, softmax_columns(tm)), d)) / (2.0 * h);
        worst = std::max(worst, rel(g.alpha_logits(k, p), fd));
        ++coords;
      }
    }
    for (int k = 0; k < K; ++k) {
      for (int c = 0; c < C; ++c) {
        Dictionary dp = d, dm = d;
        dp.means(k, c) += h;
        dm.means(k, c) -= h;
        dp.means.row(k).normalize();
        dm.means.row(k).normalize();
        const double fd = (summed(maps, fg, dp) - summed(maps, fg, dm)) / (2.0 * h);
        worst = std::max(worst, rel(g.means(k, c), fd));
        ++coords;
      }
    }
  }
  return {worst <= 1e-4, fmt("max relative error %.3g over %d coordinates in 10 instances (tol 1e-4)", worst, coords)};
}

// ---------------------------------------------------------------------------
// The A4-A6 benchmark fixture.

struct Fixture {
  SyntheticDataset dataset;
  Dictionary dict;
  std::vector<FeatureMap> background;
  std::map<std::string, std::vector<FeatureMap>> train;
  std::vector<FeatureMap> test;
  std::vector<const SyntheticSample*> test_samples;
};

Fixture make_fixture() {
  RunConfig rc;
  rc.mixtures = 2;
  Fixture f;
  f.dataset = generate_dataset(rc.dataset_config());
  const auto train = f.dataset.select(Split::Train);
  const auto all_train = as_double(train);
  DictionaryLearningOptions opts;
  opts.components = rc.components;
  opts.concentration = rc.concentration;
  opts.seed = substream_seed(rc.seed, "dictionary");
  f.dict = learn_dictionary(stack_active_features(all_train), opts).dictionary;
  for (std::size_t i = 0; i < train.size(); ++i) f.train[std::to_string(train[i]->label)].push_back(all_train[i]);
  f.background = as_double(f.dataset.select(Split::Background));
  f.test_samples = f.dataset.select(Split::Test);
  f.test = as_double(f.test_samples);
  return f;
}

struct Trained {
  std::vector<ClassModel> models;
  std::vector<MixtureAssignment> assignments;
  Background background;
};

Trained train_family(const Fixture& f, const Dictionary& dict, ModelFamily family) {
  RunConfig rc;
  rc.mixtures = 2;
  rc.family = family;
  Trained t;
  t.background = fit_background(f.background, dict, rc);
  for (const auto& [label, maps] : f.train) {
    auto opts = rc.train_options();
    opts.seed = substream_seed(rc.seed, "train." + label);
    auto r = train_class_model(maps, label, dict, t.background, opts);
    t.models.push_back(std::move(r.model));
    t.assignments.push_back(std::move(r.assignment));
  }
  return t;
}

struct FamilyReport {
  AccuracyTable accuracy;
  std::map<std::string, RocCurve> roc;
  double pooled_by_prediction = 0.0;
};

FamilyReport evaluate(const Fixture& f, const Trained& t) {
  Evaluation by_label(t.models, f.dict, t.background, 0.5, 0.5);
  Evaluation by_prediction(t.models, f.dict, t.background, 0.5, 0.5, 0.0, RocReference::Prediction);
  for (std::size_t i = 0; i < f.test.size(); ++i) {
    const auto* s = f.test_samples[i];
    const OcclusionMask* mask = s->mask ? &*s->mask : nullptr;
    const auto label = std::to_string(s->label);
    by_label.add(s->name, label, s->level, s->type, f.test[i], mask);
    by_prediction.add(s->name, label, s->level, s->type, f.test[i], mask);
  }
  return {by_label.accuracy(), by_label.roc_curves(), by_prediction.roc_curves().at("pooled").auc};
}

// ---------------------------------------------------------------------------
// A4: constant-offset invariance.

Verdict a4(const Fixture& f, const Trained& vmf) {
  Dictionary shifted = f.dict;
  shifted.log_normalizer = 7321.125;
  const auto retrained = train_family(f, shifted, ModelFamily::Vmf);
  bool same_models = true;
  for (std::size_t y = 0; y < vmf.models.size(); ++y) {
    const auto& a = std::get<std::vector<VmfForeground>>(vmf.models[y].components);
    const auto& b = std::get<std::vector<VmfForeground>>(retrained.models[y].components);
    for (std::size_t m = 0; m < a.size(); ++m) same_models = same_models && a[m].alphas() == b[m].alphas();
    same_models = same_models && vmf.assignments[y].component == retrained.assignments[y].component;
  }
  same_models = same_models && std::get<VmfBackground>(vmf.background).betas() ==
                                   std::get<VmfBackground>(retrained.background).betas();

  int mismatches = 0;
  for (const auto& map : f.test) {
    const auto ea = image_evidence(map, f.dict, 0.5);
    const auto eb = image_evidence(map, shifted, 0.5);
    const auto ca = classify(ea, vmf.models, vmf.background, 0.5);
    const auto cb = classify(eb, vmf.models, vmf.background, 0.5);
    const auto& model = vmf.models[static_cast<std::size_t>(ca.model_index)];
    const auto sa = component_score_map(ea, model, ca.mixture, vmf.background, 0.5);
    const auto sb = component_score_map(eb, model, ca.mixture, vmf.background, 0.5);
    const bool same = ca.label == cb.label && ca.mixture == cb.mixture && ca.visibility == cb.visibility &&
                      sa.scores == sb.scores && sa.visibility() == sb.visibility();
    mismatches += !same;
  }
  return {same_models && mismatches == 0,
          fmt("offset 7321.125: training %s; %d of %zu test images differ in label, mixture, visibility or scores",
              same_models ? "bit-identical" : "DIFFERS", mismatches, f.test.size())};
}

// ---------------------------------------------------------------------------
// A5 and A6.

Verdict a5(const FamilyReport& vmf, const FamilyReport& dict) {
  bool ok = true;
  std::string detail;
  for (const char* type : {"white", "noise", "texture", "object"}) {
    const double v = vmf.roc.at(type).auc;
    const double d = dict.roc.at(type).auc;
    ok = ok && v > d;
    detail += fmt("%s %.4f>%.4f ", type, v, d);
  }
  const double pooled = vmf.roc.at("pooled").auc;
  ok = ok && pooled >= 0.85;
  detail += fmt("| pooled vMF %.4f (>= 0.85), dict %.4f", pooled, dict.roc.at("pooled").auc);
  detail += fmt(" | predicted-class localization: vMF %.4f, dict %.4f", vmf.pooled_by_prediction,
                dict.pooled_by_prediction);
  return {ok, "vMF>dict AUC " + detail};
}

double level_accuracy(const AccuracyTable& t, OcclusionLevel level) {
  double s = 0.0;
  int n = 0;
  for (auto type : kOccluderTypes) {
    if (auto v = t.at(level, type)) {
      s += *v;
      ++n;
    }
  }
  return s / n;
}

bool degrades(const AccuracyTable& t, std::string& detail) {
  const double l1 = level_accuracy(t, OcclusionLevel::L1);
  const double l2 = level_accuracy(t, OcclusionLevel::L2);
  const double l3 = level_accuracy(t, OcclusionLevel::L3);
  detail += fmt("L1 %.4f L2 %.4f L3 %.4f", l1, l2, l3);
  int inversions = 0;
  bool small = true;
  for (auto [a, b] : {std::pair{l1, l2}, std::pair{l2, l3}}) {
    if (b > a) {
      ++inversions;
      small = small && b - a <= 0.01;
    }
  }
  return inversions == 0 || (inversions == 1 && small);
}

Verdict a6(const FamilyReport& vmf, const FamilyReport& dict) {
  std::string detail = "vMF ";
  bool ok = degrades(vmf.accuracy, detail);
  detail += "; dict ";
  ok = degrades(dict.accuracy, detail) && ok;
  const double vm = *vmf.accuracy.mean;
  const double dm = *dict.accuracy.mean;
  const double v0 = *vmf.accuracy.at(OcclusionLevel::None, OccluderType::None);
  const double d0 = *dict.accuracy.at(OcclusionLevel::None, OccluderType::None);
  ok = ok && vm >= dm && v0 >= 0.95 && d0 >= 0.95;
  detail += fmt("; mean vMF %.4f >= dict %.4f; unoccluded vMF %.4f, dict %.4f (>= 0.95)", vm, dm, v0, d0);
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// A7: parameter recovery.

Verdict a7() {
  WorldConfig cfg;
  cfg.num_classes = 1;
  cfg.mixtures = 1;
  cfg.components = 8;
  cfg.concentration = 50.0;
  cfg.height = 7;
  cfg.width = 7;
  cfg.seed = substream_seed(7, "A7");
  const auto world = make_world(cfg);
  std::vector<FeatureMap> maps;
  for (int i = 0; i < 200; ++i) maps.push_back(sample_image(world, 0, 0, substream_seed(cfg.seed, "img", i)));
  const auto est = estimate_alpha(kernel_evidence(maps, world.dictionary), EmOptions{});
  std::vector<double> tv;
  const auto& truth = world.classes[0][0].alphas();
  for (int p = 0; p < truth.cols(); ++p) {
    tv.push_back(0.5 * (est.foreground.alphas().col(p) - truth.col(p)).cwiseAbs().sum());
  }
  std::sort(tv.begin(), tv.end());
  const double median = tv[tv.size() / 2];

  WorldConfig planted;
  planted.num_classes = 1;
  planted.mixtures = 1;
  planted.components = 3;
  planted.max_cosine = 0.5;
  planted.seed = substream_seed(7, "A7.planted");
  const auto pw = make_world(planted);
  Rng rng(planted.seed);
  Eigen::MatrixXd x(planted.channels, 600);
  for (int i = 0; i < 600; ++i) x.col(i) = sample_vmf(pw.dictionary.means.row(i % 3).transpose(), 50.0, rng);
  DictionaryLearningOptions opts;
  opts.components = 3;
  opts.seed = 1;
  const auto learned = learn_dictionary(x, opts).dictionary;
  double min_cos = 1.0;
  for (int j = 0; j < 3; ++j) {
    min_cos = std::min(min_cos, (learned.means * pw.dictionary.means.row(j).transpose()).maxCoeff());
  }
  return {median <= 0.1 && min_cos >= 0.99,
          fmt("median per-position TV %.4f (<= 0.1); worst planted-direction cosine %.5f (>= 0.99)", median, min_cos)};
}

// ---------------------------------------------------------------------------
// A8: determinism of the command pipeline.

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Verdict a8(const fs::path& work) {
  std::vector<std::map<std::string, std::string>> trees;
  for (const char* name : {"run_a", "run_b"}) {
    const auto root = work / name;
    fs::remove_all(root);
    std::ostringstream log;
    for (auto family : {ModelFamily::Vmf, ModelFamily::Bernoulli}) {
      RunConfig rc;
      rc.train_per_class = 40;
      rc.test_per_class = 10;
      rc.background_images = 60;
      rc.family = family;
      rc.out = root / to_string(family);
      cmd_synth(rc, log);
      cmd_learn_dict(rc, log);
      cmd_train(rc, log);
      cmd_eval(rc, log);
    }
    trees.push_back(read_tree(root));
  }
  std::size_t differing = 0;
  for (const auto& [path, bytes] : trees[0]) {
    auto it = trees[1].find(path);
    differing += it == trees[1].end() || it->second != bytes;
  }
  const bool ok = trees[0].size() == trees[1].size() && differing == 0 && !trees[0].empty();
  return {ok, fmt("%zu files per run, %zu differ (synth, learn-dict, train, eval for both families)", trees[0].size(),
                  differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "compnet_acceptance";
  fs::create_directories(work);
  int failed = 0;
  auto report = [&](const char* id, const char* name, double limit_s, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1fs", secs);
    if (limit_s > 0) {
      timing += fmt(" (limit %.0fs)", limit_s);
      if (secs >= limit_s) v.pass = false;
    }
    failed += !v.pass;
    std::printf("%s %s %s: %s [%s]\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  };

  report("A1", "oracle equivalence", 10, a1);
  report("A2", "EM monotonicity", 60, a2);
  report("A3", "gradient check", 30, a3);

  // A4-A6 share the benchmark fixture; its construction counts towards A5's budget.
  const auto start = std::chrono::steady_clock::now();
  std::optional<Fixture> fixture;
  std::optional<Trained> vmf, dict;
  std::optional<FamilyReport> vmf_report, dict_report;
  std::string setup_error;
  try {
    fixture = make_fixture();
    vmf = train_family(*fixture, fixture->dict, ModelFamily::Vmf);
    dict = train_family(*fixture, fixture->dict, ModelFamily::Bernoulli);
    vmf_report = evaluate(*fixture, *vmf);
    dict_report = evaluate(*fixture, *dict);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  const double setup_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto needs_fixture = [&](auto fn) {
    return [&, fn]() -> Verdict {
      if (!setup_error.empty()) return {false, "fixture failed: " + setup_error};
      return fn();
    };
  };
  report("A4", "constant-offset invariance", 0, needs_fixture([&] { return a4(*fixture, *vmf); }));
  report("A5", "localization ordering", 600 - setup_s, needs_fixture([&] {
           auto v = a5(*vmf_report, *dict_report);
           v.detail += fmt(" | fixture %.1fs", setup_s);
           return v;
         }));
  report("A6", "accuracy degradation", 0, needs_fixture([&] { return a6(*vmf_report, *dict_report); }));
  report("A7", "parameter recovery", 0, a7);
  report("A8", "pipeline determinism", 0, [&] { return a8(work); });
  std::printf("%s: %d of 8 criteria failed\n", failed ? "FAILED" : "ALL PASSED", failed);
  return failed ? 1 : 0;
}
