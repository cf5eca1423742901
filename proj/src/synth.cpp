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

#include "compnet/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "compnet/detail/binary_io.hpp"
#include "compnet/error.hpp"
#include "compnet/feature_io.hpp"
#include "compnet/random.hpp"
#include "compnet/vmf.hpp"

namespace compnet {

namespace {

using nlohmann::json;

Eigen::VectorXd sample_dirichlet(int size, double concentration, Rng& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Eigen::VectorXd v(size);
  for (;;) {
    for (int i = 0; i < size; ++i) v(i) = gamma(rng);
    const double total = v.sum();
    if (total > 0.0 && std::isfinite(total)) return v / total;
  }
}

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& weights, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  int last = 0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    if (weights(k) <= 0.0) continue;
    cumulative += weights(k);
    last = static_cast<int>(k);
    if (u < cumulative) return last;
  }
  return last;
}

int uniform_index(int n, Rng& rng) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

FeatureMap assemble(int height, int width, Eigen::MatrixXd data) {
  std::vector<std::uint8_t> active(static_cast<std::size_t>(data.cols()), 1);
  return FeatureMap(height, width, std::move(data), std::move(active));
}

FeatureMap sample_from_columns(const SyntheticWorld& world, const Eigen::MatrixXd& alphas, Rng& rng) {
  const auto& cfg = world.config;
  const auto& means = world.dictionary.means;
  Eigen::MatrixXd data(cfg.channels, alphas.cols());
  for (Eigen::Index p = 0; p < alphas.cols(); ++p) {
    const int k = sample_categorical(alphas.col(p), rng);
    data.col(p) = sample_vmf(means.row(k).transpose(), cfg.concentration, rng);
  }
  return assemble(cfg.height, cfg.width, std::move(data));
}

Eigen::MatrixXd background_columns(const SyntheticWorld& world) {
  return world.background.betas().replicate(1, world.config.height * world.config.width);
}

}  // namespace

void WorldConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (channels < 3) fail("synthetic world needs at least 3 channels");
  if (components < 2) fail("synthetic world needs at least 2 dictionary components");
  if (num_classes < 1 || mixtures < 1 || height < 1 || width < 1) fail("synthetic world dimensions must be positive");
  if (!(concentration >= 0.0) || !std::isfinite(concentration)) fail("concentration must be finite and non-negative");
  if (!(dirichlet > 0.0) || !(background_dirichlet > 0.0)) fail("Dirichlet concentrations must be positive");
  if (!(max_cosine > -1.0 && max_cosine <= 1.0)) fail("max_cosine must lie in (-1, 1]");
  if (texture_palette < 1) fail("texture palette needs at least one direction");
}

SyntheticWorld make_world(const WorldConfig& config) {
  config.validate();
  SyntheticWorld world;
  world.config = config;
  const int K = config.components;
  const int C = config.channels;
  const int P = config.height * config.width;

  auto rng = make_rng(config.seed, "world.dictionary");
  Eigen::MatrixXd means(K, C);
  const long budget = 100000L * K;
  long attempts = 0;
  for (int k = 0; k < K;) {
    if (++attempts > budget) throw Error(ErrorCode::InvalidConfig, "cannot place dictionary means under the cosine cap");
    const Eigen::VectorXd v = sample_uniform_sphere(C, rng);
    bool ok = true;
    for (int j = 0; j < k && ok; ++j) ok = means.row(j).dot(v) <= config.max_cosine;
    if (ok) means.row(k++) = v.transpose();
  }
  world.dictionary.means = means;
  world.dictionary.concentration = config.concentration;

  auto class_rng = make_rng(config.seed, "world.classes");
  world.classes.resize(static_cast<std::size_t>(config.num_classes));
  for (auto& poses : world.classes) {
    for (int m = 0; m < config.mixtures; ++m) {
      Eigen::MatrixXd alphas(K, P);
      for (int p = 0; p < P; ++p) alphas.col(p) = sample_dirichlet(K, config.dirichlet, class_rng);
      poses.emplace_back(config.height, config.width, std::move(alphas));
    }
  }

  auto bg_rng = make_rng(config.seed, "world.background");
  world.background = VmfBackground(sample_dirichlet(K, config.background_dirichlet, bg_rng));

  auto occ_rng = make_rng(config.seed, "world.occluders");
  world.white_direction = sample_uniform_sphere(C, occ_rng);
  world.texture_palette.resize(C, config.texture_palette);
  for (int t = 0; t < config.texture_palette; ++t) world.texture_palette.col(t) = sample_uniform_sphere(C, occ_rng);
  return world;
}

FeatureMap sample_image(const SyntheticWorld& world, int y, int m, std::uint64_t seed) {
  if (y < 0 || y >= static_cast<int>(world.classes.size())) throw Error(ErrorCode::InvalidConfig, "class index out of range");
  const auto& poses = world.classes[static_cast<std::size_t>(y)];
  if (m < 0 || m >= static_cast<int>(poses.size())) throw Error(ErrorCode::InvalidConfig, "mixture index out of range");
  Rng rng(seed);
  return sample_from_columns(world, poses[static_cast<std::size_t>(m)].alphas(), rng);
}

FeatureMap sample_background_image(const SyntheticWorld& world, std::uint64_t seed) {
  Rng rng(seed);
  return sample_from_columns(world, background_columns(world), rng);
}

OccludedImage apply_occluder(const FeatureMap& map, const SyntheticWorld& world, int image_class, OccluderType type,
                             OcclusionLevel level, std::uint64_t seed, const LevelBounds& bounds) {
  if (type == OccluderType::None || level == OcclusionLevel::None) {
    throw Error(ErrorCode::InvalidConfig, "apply_occluder needs an occluder type and level");
  }
  const int H = map.height();
  const int W = map.width();
  const int total_active = map.active_count();
  if (total_active == 0) throw Error(ErrorCode::InvalidConfig, "cannot occlude a map without active positions");
  const auto& range = bounds[level];

  // Summed-area table of active flags for O(1) rectangle counts.
  std::vector<int> sat(static_cast<std::size_t>((H + 1) * (W + 1)), 0);
  auto at = [&](int r, int c) -> int& { return sat[static_cast<std::size_t>(r * (W + 1) + c)]; };
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) at(r + 1, c + 1) = (map.active(r * W + c) ? 1 : 0) + at(r, c + 1) + at(r + 1, c) - at(r, c);
  }
  auto covered = [&](int top, int left, int h, int w) {
    return at(top + h, left + w) - at(top, left + w) - at(top + h, left) + at(top, left);
  };

  struct Placement {
    int top, left, h, w;
  };
  std::vector<std::vector<Placement>> shapes;
  for (int h = 1; h <= H; ++h) {
    for (int w = 1; w <= W; ++w) {
      std::vector<Placement> fits;
      for (int top = 0; top + h <= H; ++top) {
        for (int left = 0; left + w <= W; ++left) {
          if (range.contains(static_cast<double>(covered(top, left, h, w)) / total_active)) fits.push_back({top, left, h, w});
        }
      }
      if (!fits.empty()) shapes.push_back(std::move(fits));
    }
  }
  if (shapes.empty()) {
    throw Error(ErrorCode::InvalidConfig, "occlusion level " + std::string(to_string(level)) +
                                              " is unreachable with rectangles on this lattice");
  }

  Rng rng(seed);
  const auto& fits = shapes[static_cast<std::size_t>(uniform_index(static_cast<int>(shapes.size()), rng))];
  const auto rect = fits[static_cast<std::size_t>(uniform_index(static_cast<int>(fits.size()), rng))];

  const Eigen::MatrixXd* source = nullptr;
  Eigen::MatrixXd bg_cols;
  if (type == OccluderType::Object) {
    const int classes = static_cast<int>(world.classes.size());
    if (classes > 1) {
      int other = uniform_index(classes - 1, rng);
      if (other >= image_class) ++other;
      const auto& poses = world.classes[static_cast<std::size_t>(other)];
      source = &poses[static_cast<std::size_t>(uniform_index(static_cast<int>(poses.size()), rng))].alphas();
    } else {
      bg_cols = background_columns(world);
      source = &bg_cols;
    }
  }

  const double texture_s = world.config.concentration / 4.0;
  Eigen::MatrixXd data = map.data();
  std::vector<std::uint8_t> active = map.active_flags();
  std::vector<std::uint8_t> occluded(static_cast<std::size_t>(H * W), 0);
  for (int r = rect.top; r < rect.top + rect.h; ++r) {
    for (int c = rect.left; c < rect.left + rect.w; ++c) {
      const int p = r * W + c;
      if (!map.active(p)) continue;
      switch (type) {
        case OccluderType::White: data.col(p) = world.white_direction; break;
        case OccluderType::Noise: data.col(p) = sample_uniform_sphere(map.channels(), rng); break;
        case OccluderType::Texture: {
          const int t = uniform_index(static_cast<int>(world.texture_palette.cols()), rng);
          data.col(p) = sample_vmf(world.texture_palette.col(t), texture_s, rng);
          break;
        }
        case OccluderType::Object: {
          const int k = sample_categorical(source->col(p), rng);
          data.col(p) = sample_vmf(world.dictionary.means.row(k).transpose(), world.config.concentration, rng);
          break;
        }
        case OccluderType::None: break;
      }
      occluded[static_cast<std::size_t>(p)] = 1;
    }
  }
  return {FeatureMap(H, W, std::move(data), std::move(active)), OcclusionMask(H, W, std::move(occluded))};
}

double oracle_log_likelihood(const FeatureMap& map, const Eigen::MatrixXd& alphas, const Dictionary& dict) {
  long double total = 0.0L;
  for (int p = 0; p < map.positions(); ++p) {
    if (!map.active(p)) continue;
    long double mixture = 0.0L;
    for (int k = 0; k < dict.size(); ++k) {
      long double dot = 0.0L;
      for (int c = 0; c < dict.dimension(); ++c) {
        dot += static_cast<long double>(dict.means(k, c)) * static_cast<long double>(map.data()(c, p));
      }
      mixture += static_cast<long double>(alphas(k, p)) * std::exp(static_cast<long double>(dict.concentration) * dot);
    }
    total += std::log(mixture) + static_cast<long double>(dict.log_normalizer);
  }
  return static_cast<double>(total);
}

double oracle_log_likelihood(const FeatureMap& map, const Eigen::VectorXd& betas, const Dictionary& dict) {
  return oracle_log_likelihood(map, Eigen::MatrixXd(betas.replicate(1, map.positions())), dict);
}

double oracle_log_likelihood(const BinaryEncoding& enc, const Eigen::MatrixXd& alphas) {
  long double total = 0.0L;
  for (int p = 0; p < enc.positions(); ++p) {
    if (!enc.is_active(p)) continue;
    for (int k = 0; k < enc.parts(); ++k) {
      const auto a = static_cast<long double>(alphas(k, p));
      total += enc.bits(k, p) ? std::log(a) : std::log(1.0L - a);
    }
  }
  return static_cast<double>(total);
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const json& rows) {
  const auto R = static_cast<Eigen::Index>(rows.size());
  const auto C = R ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd m(R, C);
  for (Eigen::Index r = 0; r < R; ++r) {
    if (static_cast<Eigen::Index>(rows.at(r).size()) != C) throw Error(ErrorCode::InvalidConfig, "ragged matrix in world file");
    for (Eigen::Index c = 0; c < C; ++c) m(r, c) = rows.at(r).at(c).get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string world_to_json(const SyntheticWorld& world) {
  const auto& c = world.config;
  json doc;
  doc["config"] = {{"num_classes", c.num_classes},
                   {"mixtures", c.mixtures},
                   {"components", c.components},
                   {"height", c.height},
                   {"width", c.width},
                   {"channels", c.channels},
                   {"concentration", c.concentration},
                   {"dirichlet", c.dirichlet},
                   {"background_dirichlet", c.background_dirichlet},
                   {"max_cosine", c.max_cosine},
                   {"texture_palette", c.texture_palette},
                   {"seed", c.seed}};
  doc["dictionary"] = {{"concentration", world.dictionary.concentration}, {"means", matrix_json(world.dictionary.means)}};
  json classes = json::array();
  for (const auto& poses : world.classes) {
    json list = json::array();
    for (const auto& fg : poses) list.push_back(matrix_json(fg.alphas()));
    classes.push_back(std::move(list));
  }
  doc["classes"] = std::move(classes);
  doc["background"] = vector_json(world.background.betas());
  doc["white_direction"] = vector_json(world.white_direction);
  doc["texture_palette"] = matrix_json(world.texture_palette);
  return doc.dump(1) + "\n";
}

SyntheticWorld world_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
    SyntheticWorld world;
    auto& c = world.config;
    const auto& jc = doc.at("config");
    c.num_classes = jc.at("num_classes").get<int>();
    c.mixtures = jc.at("mixtures").get<int>();
    c.components = jc.at("components").get<int>();
    c.height = jc.at("height").get<int>();
    c.width = jc.at("width").get<int>();
    c.channels = jc.at("channels").get<int>();
    c.concentration = jc.at("concentration").get<double>();
    c.dirichlet = jc.at("dirichlet").get<double>();
    c.background_dirichlet = jc.at("background_dirichlet").get<double>();
    c.max_cosine = jc.at("max_cosine").get<double>();
    c.texture_palette = jc.at("texture_palette").get<int>();
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.validate();
    world.dictionary.means = json_matrix(doc.at("dictionary").at("means"));
    world.dictionary.concentration = doc.at("dictionary").at("concentration").get<double>();
    world.dictionary.validate();
    for (const auto& poses : doc.at("classes")) {
      auto& list = world.classes.emplace_back();
      for (const auto& alphas : poses) list.emplace_back(c.height, c.width, json_matrix(alphas));
    }
    world.background = VmfBackground(json_vector(doc.at("background")));
    world.white_direction = json_vector(doc.at("white_direction"));
    world.texture_palette = json_matrix(doc.at("texture_palette"));
    return world;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed world descriptor: ") + e.what());
  }
}

std::vector<const SyntheticSample*> SyntheticDataset::select(Split split) const {
  std::vector<const SyntheticSample*> out;
  for (const auto& s : samples) {
    if (s.split == split) out.push_back(&s);
  }
  return out;
}

namespace {

std::string sample_name(const char* dir, int y, int i, const char* suffix) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s/c%d_%06d%s", dir, y, i, suffix);
  return buf;
}

}  // namespace

SyntheticDataset generate_dataset(const DatasetConfig& config) {
  config.bounds.validate();
  if (config.train_per_class < 1 || config.test_per_class < 0 || config.background_images < 0) {
    throw Error(ErrorCode::InvalidConfig, "dataset split sizes must be non-negative with at least one training image");
  }
  SyntheticDataset ds;
  ds.world = make_world(config.world);
  const auto& world = ds.world;
  const std::uint64_t seed = config.world.seed;
  const int M = config.world.mixtures;

  for (int y = 0; y < config.world.num_classes; ++y) {
    auto pose_rng = make_rng(seed, "train.pose", static_cast<std::uint64_t>(y));
    for (int i = 0; i < config.train_per_class; ++i) {
      const int m = uniform_index(M, pose_rng);
      const auto idx = static_cast<std::uint64_t>(y) << 32 | static_cast<std::uint64_t>(i);
      ds.samples.push_back({sample_name("train", y, i, ".cfmp"), y, m, Split::Train, OcclusionLevel::None,
                            OccluderType::None, sample_image(world, y, m, substream_seed(seed, "train", idx)).cast<float>(),
                            std::nullopt});
    }
  }
  for (int i = 0; i < config.background_images; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "background/bg_%06d.cfmp", i);
    ds.samples.push_back({buf, -1, 0, Split::Background, OcclusionLevel::None, OccluderType::None,
                          sample_background_image(world, substream_seed(seed, "background", static_cast<std::uint64_t>(i)))
                              .cast<float>(),
                          std::nullopt});
  }
  for (int y = 0; y < config.world.num_classes; ++y) {
    auto pose_rng = make_rng(seed, "test.pose", static_cast<std::uint64_t>(y));
    for (int i = 0; i < config.test_per_class; ++i) {
      const int m = uniform_index(M, pose_rng);
      const auto idx = static_cast<std::uint64_t>(y) << 32 | static_cast<std::uint64_t>(i);
      // Occluders are applied to the file-precision image so unoccluded
      // positions match the clean entry bit for bit.
      const FeatureMap clean = sample_image(world, y, m, substream_seed(seed, "test", idx)).cast<float>().cast<double>();
      ds.samples.push_back({sample_name("test", y, i, "_occ0.cfmp"), y, m, Split::Test, OcclusionLevel::None,
                            OccluderType::None, clean.cast<float>(), std::nullopt});
      std::uint64_t condition = 0;
      for (auto level : kOccludedLevels) {
        for (auto type : kOccluderTypes) {
          const auto occ_seed = substream_seed(seed, "occluder", idx * 16 + condition++);
          auto occ = apply_occluder(clean, world, y, type, level, occ_seed, config.bounds);
          const std::string suffix = "_" + std::string(to_string(level)) + "_" + type_code(type);
          ds.samples.push_back({sample_name("test", y, i, (suffix + ".cfmp").c_str()), y, m, Split::Test, level, type,
                                occ.map.cast<float>(), std::move(occ.mask)});
        }
      }
    }
  }
  return ds;
}

DatasetManifest write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"train", "test", "background"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  DatasetManifest manifest;
  manifest.base_dir = dir;
  for (const auto& s : dataset.samples) {
    write_feature_map(s.map, dir / s.name);
    ManifestEntry entry;
    entry.feature_path = s.name;
    entry.label = s.split == Split::Background ? "background" : std::to_string(s.label);
    entry.occlusion_level = s.level;
    entry.occluder_type = s.type;
    entry.split = s.split;
    if (s.mask) {
      std::string mask_name = s.name.substr(0, s.name.size() - 5) + ".cmsk";
      write_mask(*s.mask, dir / mask_name);
      entry.mask_path = std::move(mask_name);
    }
    manifest.entries.push_back(std::move(entry));
  }
  save_manifest(manifest, dir / "manifest.json");
  detail::write_file(dir / "world.json", world_to_json(dataset.world));
  return manifest;
}

}  // namespace compnet
