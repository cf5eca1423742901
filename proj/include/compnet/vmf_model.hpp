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

// Fully generative model: per-position vMF mixtures over real-valued
// features with a shared dictionary and a position-independent vMF mixture
// background.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "compnet/dictionary.hpp"
#include "compnet/feature_map.hpp"
#include "compnet/score_map.hpp"

namespace compnet {

inline constexpr double kSmoothingFloor = 1e-4;

/// Mixture coefficients alpha(k, p); every column lies on the simplex.
class VmfForeground {
 public:
  VmfForeground() = default;
  VmfForeground(int height, int width, Eigen::MatrixXd alphas);

  static VmfForeground uniform(int height, int width, int components);

  int height() const { return height_; }
  int width() const { return width_; }
  int components() const { return static_cast<int>(alphas_.rows()); }
  int positions() const { return height_ * width_; }
  const Eigen::MatrixXd& alphas() const { return alphas_; }
  const Eigen::MatrixXd& log_alphas() const { return log_alphas_; }

 private:
  int height_ = 0;
  int width_ = 0;
  Eigen::MatrixXd alphas_;
  Eigen::MatrixXd log_alphas_;
};

class VmfBackground {
 public:
  VmfBackground() = default;
  explicit VmfBackground(Eigen::VectorXd betas);

  int components() const { return static_cast<int>(betas_.size()); }
  const Eigen::VectorXd& betas() const { return betas_; }
  const Eigen::VectorXd& log_betas() const { return log_betas_; }

 private:
  Eigen::VectorXd betas_;
  Eigen::VectorXd log_betas_;
};

/// Kernel scores S·mu_k·f_p for every component and position of one map
/// (K×P, zero at inactive positions), without the log normalizer. Computing
/// this once per image serves every class, mixture component and background.
struct KernelEvidence {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd log_kernels;
  std::vector<std::uint8_t> active;
  double log_normalizer = 0.0;

  int positions() const { return height * width; }
  bool is_active(int p) const { return active[static_cast<std::size_t>(p)] != 0; }
  int active_count() const;
};

KernelEvidence kernel_evidence(const FeatureMap& map, const Dictionary& dict);
std::vector<KernelEvidence> kernel_evidence(std::span<const FeatureMap> maps, const Dictionary& dict);

/// Maximizes sum_k n_k log a_k over {a on the simplex, a_k >= floor} for
/// non-negative counts n summing to one.
Eigen::VectorXd floor_project(const Eigen::Ref<const Eigen::VectorXd>& counts, double floor);

struct EmOptions {
  int max_iters = 100;
  double tol = 1e-6;
  double smoothing = kSmoothingFloor;
};

struct AlphaEstimate {
  VmfForeground foreground;
  /// Group log-likelihood before every M-step and after the last; non-decreasing.
  std::vector<double> objective;
  int iterations = 0;
};

/// Per-position EM with a fixed dictionary. When `visibility` is given only
/// positions flagged 1 are observed; `init` warm-starts (default uniform).
/// Rows with no observation are set to 1/K.
AlphaEstimate estimate_alpha(std::span<const KernelEvidence> evidence, const EmOptions& options,
                             std::span<const std::vector<std::uint8_t>> visibility = {},
                             const VmfForeground* init = nullptr);

VmfForeground estimate_alpha(std::span<const FeatureMap> maps, const Dictionary& dict, int max_iters = 100,
                             double tol = 1e-6);

struct BackgroundEstimate {
  VmfBackground background;
  std::vector<double> objective;
  int iterations = 0;
};

/// Single pooled EM over every active position of the background maps.
BackgroundEstimate estimate_vmf_background(std::span<const KernelEvidence> evidence, const EmOptions& options);
VmfBackground estimate_vmf_background(std::span<const FeatureMap> maps, const Dictionary& dict, int max_iters = 100,
                                      double tol = 1e-6);

/// log p(f_p | alpha_p) and log p(f_p | beta) without the log normalizer.
double foreground_position_score(const KernelEvidence& ev, const VmfForeground& fg, int p);
double background_position_score(const KernelEvidence& ev, const VmfBackground& bg, int p);

double generative_log_likelihood(const KernelEvidence& ev, const VmfForeground& fg);
double generative_log_likelihood(const FeatureMap& map, const VmfForeground& fg, const Dictionary& dict);

/// Per position max over {log p(f_p|alpha_p) + log pi, log p(f_p|beta) + log(1 - pi)};
/// ties resolve to visible. Decisions are taken on normalizer-free scores.
OcclusionLikelihood occlusion_aware_log_likelihood(const KernelEvidence& ev, const VmfForeground& fg,
                                                   const VmfBackground& bg, double pi);
OcclusionLikelihood occlusion_aware_log_likelihood(const FeatureMap& map, const VmfForeground& fg,
                                                   const VmfBackground& bg, const Dictionary& dict, double pi);

OcclusionScoreMap occlusion_score_map(const KernelEvidence& ev, const VmfForeground& fg, const VmfBackground& bg,
                                      double pi);
OcclusionScoreMap occlusion_score_map(const FeatureMap& map, const VmfForeground& fg, const VmfBackground& bg,
                                      const Dictionary& dict, double pi);

struct LoglikGradient {
  /// d/d(theta) with alpha_p = softmax(theta_p), evaluated at theta = log alpha. K×P.
  Eigen::MatrixXd alpha_logits;
  /// Riemannian gradient w.r.t. each mean: tangent at mu_k. K×C.
  Eigen::MatrixXd means;
};

/// Gradient of sum over maps of generative_log_likelihood.
LoglikGradient loglik_gradient(std::span<const FeatureMap> maps, const VmfForeground& fg, const Dictionary& dict);

struct FinetuneResult {
  VmfForeground foreground;
  Dictionary dictionary;
  /// Summed log-likelihood before every step and after the last.
  std::vector<double> objective;
};

/// Riemannian gradient ascent on the mean per-observation log-likelihood:
/// logits take a plain step, means are retracted to the sphere. The updated
/// alpha rows are re-projected onto the floored simplex.
FinetuneResult finetune(std::span<const FeatureMap> maps, const VmfForeground& fg, const Dictionary& dict, int steps,
                        double learning_rate, double smoothing = kSmoothingFloor);

}  // namespace compnet
