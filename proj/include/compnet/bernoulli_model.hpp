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

// Dictionary-based baseline: binary part-detection encodings with
// position-wise Bernoulli foreground models and a position-independent
// Bernoulli background.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "compnet/dictionary.hpp"
#include "compnet/feature_map.hpp"
#include "compnet/score_map.hpp"

namespace compnet {

inline constexpr double kBernoulliEpsilon = 1e-3;

struct BinaryEncoding {
  int height = 0;
  int width = 0;
  /// K×P; b(k, p) is true when part k is detected at position p.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> bits;
  std::vector<std::uint8_t> active;

  int parts() const { return static_cast<int>(bits.rows()); }
  int positions() const { return height * width; }
  bool is_active(int p) const { return active[static_cast<std::size_t>(p)] != 0; }
  int active_count() const;
};

/// Clamped Bernoulli parameters alpha(k, p) for one (class, mixture) pair.
/// Log tables are cached at construction.
class BernoulliForeground {
 public:
  BernoulliForeground() = default;
  BernoulliForeground(int height, int width, Eigen::MatrixXd alphas, double eps = kBernoulliEpsilon);

  int height() const { return height_; }
  int width() const { return width_; }
  int parts() const { return static_cast<int>(alphas_.rows()); }
  int positions() const { return height_ * width_; }
  const Eigen::MatrixXd& alphas() const { return alphas_; }
  const Eigen::MatrixXd& log_on() const { return log_on_; }
  const Eigen::MatrixXd& log_off() const { return log_off_; }

 private:
  int height_ = 0;
  int width_ = 0;
  Eigen::MatrixXd alphas_;
  Eigen::MatrixXd log_on_;
  Eigen::MatrixXd log_off_;
};

class BernoulliBackground {
 public:
  BernoulliBackground() = default;
  explicit BernoulliBackground(Eigen::VectorXd betas, double eps = kBernoulliEpsilon);

  int parts() const { return static_cast<int>(betas_.size()); }
  const Eigen::VectorXd& betas() const { return betas_; }
  const Eigen::VectorXd& log_on() const { return log_on_; }
  const Eigen::VectorXd& log_off() const { return log_off_; }

 private:
  Eigen::VectorXd betas_;
  Eigen::VectorXd log_on_;
  Eigen::VectorXd log_off_;
};

/// b(k, p) = active(p) && cos(f_p, mu_k) > delta.
BinaryEncoding binarize(const FeatureMap& map, const Dictionary& dict, double delta);

/// alpha(k, p) = clamp(mean of b(k, p) over images where p is active).
/// Positions inactive in every image get eps.
BernoulliForeground estimate_bernoulli_foreground(std::span<const BinaryEncoding> encodings,
                                                  double eps = kBernoulliEpsilon);

/// Same estimate restricted to positions flagged visible (1) in the
/// per-image visibility maps. Rows without any visible observation keep the
/// corresponding row of `previous` when given, otherwise eps.
BernoulliForeground estimate_bernoulli_foreground(std::span<const BinaryEncoding> encodings,
                                                  std::span<const std::vector<std::uint8_t>> visibility,
                                                  const BernoulliForeground* previous, double eps = kBernoulliEpsilon);

/// Mean over J position rows drawn without replacement (partial Fisher-Yates
/// with mt19937_64(seed), j = uniform_int(i, N-1)) from the active rows of
/// all encodings, in image-then-position order. J = 0 uses every row.
BernoulliBackground estimate_bernoulli_background(std::span<const BinaryEncoding> encodings, std::size_t samples,
                                                  std::uint64_t seed, double eps = kBernoulliEpsilon);

/// log p(b_p | alpha_p) for one active position.
double bernoulli_position_log_likelihood(const BinaryEncoding& enc, const BernoulliForeground& fg, int p);
double bernoulli_position_log_likelihood(const BinaryEncoding& enc, const BernoulliBackground& bg, int p);

/// Sum over active positions and parts of b log alpha + (1 - b) log(1 - alpha).
double bernoulli_log_likelihood(const BinaryEncoding& enc, const BernoulliForeground& fg);

/// Per position max over {log p(b_p|alpha_p) + log pi, log p(b_p|beta) + log(1 - pi)}.
OcclusionLikelihood dict_occlusion_likelihood(const BinaryEncoding& enc, const BernoulliForeground& fg,
                                              const BernoulliBackground& bg, double pi);

OcclusionScoreMap dict_occlusion_score_map(const BinaryEncoding& enc, const BernoulliForeground& fg,
                                           const BernoulliBackground& bg, double pi);

}  // namespace compnet
