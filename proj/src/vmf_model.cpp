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

#include "compnet/vmf_model.hpp"

#include <cmath>

#include "compnet/error.hpp"
#include "compnet/vmf.hpp"

namespace compnet {

namespace {

void check_columns_on_simplex(const Eigen::MatrixXd& a) {
  if (!a.allFinite() || (a.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidWeights, "mixture coefficients must be finite and non-negative");
  }
  for (Eigen::Index p = 0; p < a.cols(); ++p) {
    if (std::abs(a.col(p).sum() - 1.0) > kSimplexTolerance) {
      throw Error(ErrorCode::InvalidWeights, "mixture coefficients at position " + std::to_string(p) +
                                                 " do not sum to one");
    }
  }
}

void check_dims(const KernelEvidence& ev, const VmfForeground& fg) {
  if (ev.height != fg.height() || ev.width != fg.width() || ev.log_kernels.rows() != fg.components()) {
    throw Error(ErrorCode::DimensionMismatch, "feature map and vMF foreground disagree on dimensions");
  }
}

void check_dims(const KernelEvidence& ev, const VmfBackground& bg) {
  if (ev.log_kernels.rows() != bg.components()) {
    throw Error(ErrorCode::DimensionMismatch, "vMF background has the wrong component count");
  }
}

void check_same_lattice(std::span<const KernelEvidence> evidence) {
  if (evidence.empty()) throw Error(ErrorCode::InsufficientData, "need at least one feature map");
  const auto& first = evidence.front();
  for (const auto& ev : evidence) {
    if (ev.height != first.height || ev.width != first.width || ev.log_kernels.rows() != first.log_kernels.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "feature maps disagree on lattice or dictionary size");
    }
  }
}

}  // namespace

VmfForeground::VmfForeground(int height, int width, Eigen::MatrixXd alphas)
    : height_(height), width_(width), alphas_(std::move(alphas)) {
  if (alphas_.cols() != static_cast<Eigen::Index>(height_) * width_ || alphas_.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "alpha tensor does not match the lattice");
  }
  check_columns_on_simplex(alphas_);
  log_alphas_ = alphas_.array().log();
}

VmfForeground VmfForeground::uniform(int height, int width, int components) {
  return VmfForeground(height, width,
                       Eigen::MatrixXd::Constant(components, static_cast<Eigen::Index>(height) * width,
                                                 1.0 / components));
}

VmfBackground::VmfBackground(Eigen::VectorXd betas) : betas_(std::move(betas)) {
  check_columns_on_simplex(betas_);
  log_betas_ = betas_.array().log();
}

int KernelEvidence::active_count() const {
  int n = 0;
  for (auto a : active) n += a ? 1 : 0;
  return n;
}

KernelEvidence kernel_evidence(const FeatureMap& map, const Dictionary& dict) {
  if (map.channels() != dict.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "feature map has C=" + std::to_string(map.channels()) +
                                                  " but dictionary has C=" + std::to_string(dict.dimension()));
  }
  KernelEvidence ev;
  ev.height = map.height();
  ev.width = map.width();
  ev.active = map.active_flags();
  ev.log_normalizer = dict.log_normalizer;
  ev.log_kernels.noalias() = dict.concentration * (dict.means * map.data());
  return ev;
}

std::vector<KernelEvidence> kernel_evidence(std::span<const FeatureMap> maps, const Dictionary& dict) {
  std::vector<KernelEvidence> out;
  out.reserve(maps.size());
  for (const auto& m : maps) out.push_back(kernel_evidence(m, dict));
  return out;
}

Eigen::VectorXd floor_project(const Eigen::Ref<const Eigen::VectorXd>& counts, double floor) {
  const Eigen::Index k_count = counts.size();
  if (floor * static_cast<double>(k_count) >= 1.0) {
    throw Error(ErrorCode::InvalidConfig, "smoothing floor times K must be below one");
  }
  std::vector<bool> floored(static_cast<std::size_t>(k_count), false);
  double scale = 0.0;
  for (;;) {
    double free_mass = 0.0;
    Eigen::Index n_floored = 0;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      if (floored[k]) {
        ++n_floored;
      } else {
        free_mass += counts(k);
      }
    }
    scale = (1.0 - floor * static_cast<double>(n_floored)) / free_mass;
    bool changed = false;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      if (!floored[k] && scale * counts(k) < floor) {
        floored[k] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  Eigen::VectorXd out(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) out(k) = floored[k] ? floor : scale * counts(k);
  return out;
}

AlphaEstimate estimate_alpha(std::span<const KernelEvidence> evidence, const EmOptions& options,
                             std::span<const std::vector<std::uint8_t>> visibility, const VmfForeground* init) {
  check_same_lattice(evidence);
  const bool weighted = !visibility.empty();
  if (weighted && visibility.size() != evidence.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one visibility map per feature map required");
  }
  const auto& first = evidence.front();
  const int k_count = static_cast<int>(first.log_kernels.rows());
  const int positions = first.positions();
  if (init != nullptr) check_dims(first, *init);

  Eigen::MatrixXd alphas = init ? init->alphas() : VmfForeground::uniform(first.height, first.width, k_count).alphas();
  Eigen::MatrixXd log_alphas = alphas.array().log();
  Eigen::MatrixXd resp_sums(k_count, positions);
  Eigen::VectorXd counts(positions);
  Eigen::VectorXd terms(k_count);

  // Convergence is judged on the normalizer-free sum so that a constant
  // offset in the log kernels cannot change where iteration stops.
  AlphaEstimate out;
  double prev_relative = 0.0;
  for (int iter = 0;; ++iter) {
    resp_sums.setZero();
    counts.setZero();
    double loglik = 0.0;
    double relative = 0.0;
    for (std::size_t i = 0; i < evidence.size(); ++i) {
      const auto& ev = evidence[i];
      for (int p = 0; p < positions; ++p) {
        if (!ev.is_active(p) || (weighted && !visibility[i][p])) continue;
        terms.noalias() = log_alphas.col(p) + ev.log_kernels.col(p);
        const double lse = log_sum_exp(terms);
        loglik += lse + ev.log_normalizer;
        relative += lse;
        resp_sums.col(p).array() += (terms.array() - lse).exp();
        counts(p) += 1.0;
      }
    }
    out.objective.push_back(loglik);
    out.iterations = iter;
    if (iter == options.max_iters) break;
    if (iter > 0 && std::abs(relative - prev_relative) <= options.tol * std::abs(prev_relative)) break;
    prev_relative = relative;
    for (int p = 0; p < positions; ++p) {
      if (counts(p) > 0.0) {
        alphas.col(p) = floor_project(resp_sums.col(p) / counts(p), options.smoothing);
      } else {
        alphas.col(p).setConstant(1.0 / k_count);
      }
    }
    log_alphas = alphas.array().log();
  }
  out.foreground = VmfForeground(first.height, first.width, std::move(alphas));
  return out;
}

VmfForeground estimate_alpha(std::span<const FeatureMap> maps, const Dictionary& dict, int max_iters, double tol) {
  const auto evidence = kernel_evidence(maps, dict);
  EmOptions options;
  options.max_iters = max_iters;
  options.tol = tol;
  return estimate_alpha(evidence, options).foreground;
}

BackgroundEstimate estimate_vmf_background(std::span<const KernelEvidence> evidence, const EmOptions& options) {
  check_same_lattice(evidence);
  const int k_count = static_cast<int>(evidence.front().log_kernels.rows());
  Eigen::VectorXd betas = Eigen::VectorXd::Constant(k_count, 1.0 / k_count);
  Eigen::VectorXd log_betas = betas.array().log();
  Eigen::VectorXd resp_sum(k_count);
  Eigen::VectorXd terms(k_count);

  BackgroundEstimate out;
  double prev_relative = 0.0;
  for (int iter = 0;; ++iter) {
    resp_sum.setZero();
    double count = 0.0;
    double loglik = 0.0;
    double relative = 0.0;
    for (const auto& ev : evidence) {
      for (int p = 0; p < ev.positions(); ++p) {
        if (!ev.is_active(p)) continue;
        terms.noalias() = log_betas + ev.log_kernels.col(p);
        const double lse = log_sum_exp(terms);
        loglik += lse + ev.log_normalizer;
        relative += lse;
        resp_sum.array() += (terms.array() - lse).exp();
        count += 1.0;
      }
    }
    if (count == 0.0) throw Error(ErrorCode::InsufficientData, "background maps have no active positions");
    out.objective.push_back(loglik);
    out.iterations = iter;
    if (iter == options.max_iters) break;
    if (iter > 0 && std::abs(relative - prev_relative) <= options.tol * std::abs(prev_relative)) break;
    prev_relative = relative;
    betas = floor_project(resp_sum / count, options.smoothing);
    log_betas = betas.array().log();
  }
  out.background = VmfBackground(std::move(betas));
  return out;
}

VmfBackground estimate_vmf_background(std::span<const FeatureMap> maps, const Dictionary& dict, int max_iters,
                                      double tol) {
  const auto evidence = kernel_evidence(maps, dict);
  EmOptions options;
  options.max_iters = max_iters;
  options.tol = tol;
  return estimate_vmf_background(evidence, options).background;
}

double foreground_position_score(const KernelEvidence& ev, const VmfForeground& fg, int p) {
  return log_sum_exp(fg.log_alphas().col(p) + ev.log_kernels.col(p));
}

double background_position_score(const KernelEvidence& ev, const VmfBackground& bg, int p) {
  return log_sum_exp(bg.log_betas() + ev.log_kernels.col(p));
}

double generative_log_likelihood(const KernelEvidence& ev, const VmfForeground& fg) {
  check_dims(ev, fg);
  double total = 0.0;
  int active = 0;
  for (int p = 0; p < ev.positions(); ++p) {
    if (!ev.is_active(p)) continue;
    total += foreground_position_score(ev, fg, p);
    ++active;
  }
  return total + active * ev.log_normalizer;
}

double generative_log_likelihood(const FeatureMap& map, const VmfForeground& fg, const Dictionary& dict) {
  return generative_log_likelihood(kernel_evidence(map, dict), fg);
}

OcclusionLikelihood occlusion_aware_log_likelihood(const KernelEvidence& ev, const VmfForeground& fg,
                                                   const VmfBackground& bg, double pi) {
  check_prior(pi);
  check_dims(ev, fg);
  check_dims(ev, bg);
  const double log_fg_prior = std::log(pi);
  const double log_bg_prior = std::log1p(-pi);
  OcclusionLikelihood out;
  out.visibility.assign(static_cast<std::size_t>(ev.positions()), 1);
  int active = 0;
  for (int p = 0; p < ev.positions(); ++p) {
    if (!ev.is_active(p)) continue;
    const double fg_score = foreground_position_score(ev, fg, p) + log_fg_prior;
    const double bg_score = background_position_score(ev, bg, p) + log_bg_prior;
    const bool visible = fg_score >= bg_score;
    out.visibility[p] = visible ? 1 : 0;
    out.total += visible ? fg_score : bg_score;
    ++active;
  }
  out.relative_total = out.total;
  out.total += active * ev.log_normalizer;
  return out;
}

OcclusionLikelihood occlusion_aware_log_likelihood(const FeatureMap& map, const VmfForeground& fg,
                                                   const VmfBackground& bg, const Dictionary& dict, double pi) {
  return occlusion_aware_log_likelihood(kernel_evidence(map, dict), fg, bg, pi);
}

OcclusionScoreMap occlusion_score_map(const KernelEvidence& ev, const VmfForeground& fg, const VmfBackground& bg,
                                      double pi) {
  check_prior(pi);
  check_dims(ev, fg);
  check_dims(ev, bg);
  const double log_fg_prior = std::log(pi);
  const double log_bg_prior = std::log1p(-pi);
  OcclusionScoreMap out;
  out.height = ev.height;
  out.width = ev.width;
  out.active = ev.active;
  out.scores = Eigen::VectorXd::Zero(ev.positions());
  for (int p = 0; p < ev.positions(); ++p) {
    if (!ev.is_active(p)) continue;
    out.scores(p) =
        (background_position_score(ev, bg, p) + log_bg_prior) - (foreground_position_score(ev, fg, p) + log_fg_prior);
  }
  return out;
}

OcclusionScoreMap occlusion_score_map(const FeatureMap& map, const VmfForeground& fg, const VmfBackground& bg,
                                      const Dictionary& dict, double pi) {
  return occlusion_score_map(kernel_evidence(map, dict), fg, bg, pi);
}

LoglikGradient loglik_gradient(std::span<const FeatureMap> maps, const VmfForeground& fg, const Dictionary& dict) {
  const int k_count = fg.components();
  LoglikGradient grad;
  grad.alpha_logits = Eigen::MatrixXd::Zero(k_count, fg.positions());
  Eigen::MatrixXd euclidean = Eigen::MatrixXd::Zero(k_count, dict.dimension());
  Eigen::VectorXd terms(k_count);
  Eigen::VectorXd resp(k_count);
  for (const auto& map : maps) {
    const auto ev = kernel_evidence(map, dict);
    check_dims(ev, fg);
    for (int p = 0; p < ev.positions(); ++p) {
      if (!ev.is_active(p)) continue;
      terms.noalias() = fg.log_alphas().col(p) + ev.log_kernels.col(p);
      resp = (terms.array() - log_sum_exp(terms)).exp();
      grad.alpha_logits.col(p) += resp - fg.alphas().col(p);
      euclidean.noalias() += dict.concentration * resp * map.position(p).transpose();
    }
  }
  grad.means.resize(k_count, dict.dimension());
  for (int k = 0; k < k_count; ++k) {
    const auto mu = dict.means.row(k);
    grad.means.row(k) = euclidean.row(k) - euclidean.row(k).dot(mu) * mu;
  }
  return grad;
}

namespace {

double summed_log_likelihood(std::span<const FeatureMap> maps, const VmfForeground& fg, const Dictionary& dict,
                             int* observations) {
  double total = 0.0;
  int n = 0;
  for (const auto& m : maps) {
    total += generative_log_likelihood(m, fg, dict);
    n += m.active_count();
  }
  if (observations != nullptr) *observations = n;
  return total;
}

}  // namespace

FinetuneResult finetune(std::span<const FeatureMap> maps, const VmfForeground& fg, const Dictionary& dict, int steps,
                        double learning_rate, double smoothing) {
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be non-negative");
  FinetuneResult out{fg, dict, {}};
  if (steps <= 0 || learning_rate == 0.0) {
    out.objective.push_back(summed_log_likelihood(maps, fg, dict, nullptr));
    return out;
  }
  int observations = 0;
  out.objective.push_back(summed_log_likelihood(maps, out.foreground, out.dictionary, &observations));
  const double scale = learning_rate / std::max(observations, 1);
  for (int step = 0; step < steps; ++step) {
    const auto grad = loglik_gradient(maps, out.foreground, out.dictionary);
    Eigen::MatrixXd logits = out.foreground.log_alphas() + scale * grad.alpha_logits;
    Eigen::MatrixXd alphas(logits.rows(), logits.cols());
    for (Eigen::Index p = 0; p < logits.cols(); ++p) {
      const Eigen::VectorXd e = (logits.col(p).array() - logits.col(p).maxCoeff()).exp();
      alphas.col(p) = floor_project(e / e.sum(), smoothing);
    }
    out.foreground = VmfForeground(out.foreground.height(), out.foreground.width(), std::move(alphas));
    for (Eigen::Index k = 0; k < out.dictionary.means.rows(); ++k) {
      const Eigen::RowVectorXd moved = out.dictionary.means.row(k) + scale * grad.means.row(k);
      out.dictionary.means.row(k) = moved / moved.norm();
    }
    out.objective.push_back(summed_log_likelihood(maps, out.foreground, out.dictionary, nullptr));
  }
  return out;
}

}  // namespace compnet
