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

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "compnet/dictionary.hpp"
#include "compnet/error.hpp"
#include "compnet/feature_map.hpp"
#include "compnet/random.hpp"

namespace compnet {

inline constexpr double kSimplexTolerance = 1e-9;

template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& f, const Eigen::MatrixBase<DerivedB>& d) {
  return static_cast<double>(f.dot(d));
}

/// log(sum(exp(x))) without overflow; -inf for an empty or all -inf input.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

/// Unnormalized vMF log density S·mu_k·f plus the dictionary's log normalizer.
template <typename Derived>
double vmf_log_kernel(const Eigen::MatrixBase<Derived>& f, int k, const Dictionary& dict) {
  return dict.concentration * dict.means.row(k).dot(f.template cast<double>()) + dict.log_normalizer;
}

/// Throws InvalidWeights unless `weights` is a length-K probability vector.
void check_simplex(const Eigen::Ref<const Eigen::VectorXd>& weights, int expected_size);

/// log sum_k w_k exp(S·mu_k·f) (+ the dictionary's log normalizer).
template <typename Derived>
double mixture_log_likelihood(const Eigen::MatrixBase<Derived>& f, const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const Dictionary& dict) {
  check_simplex(weights, dict.size());
  const Eigen::VectorXd kernels = dict.concentration * (dict.means * f.template cast<double>());
  const Eigen::VectorXd terms = weights.array().log() + kernels.array();
  return log_sum_exp(terms) + dict.log_normalizer;
}

struct DictionaryLearningOptions {
  int components = 16;
  double concentration = 20.0;
  int max_iters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct DictionaryLearningResult {
  Dictionary dictionary;
  /// Clustering objective (sum of winning kernel scores) after every
  /// assignment step; non-decreasing.
  std::vector<double> objective;
  std::vector<int> assignment;
  int iterations = 0;
  bool converged = false;
};

/// Hard-assignment vMF EM (spherical k-means with kernel S) over the columns
/// of a C×N matrix of unit vectors. Seeding is k-means++ on cosine distance;
/// a cluster that empties is re-seeded with the point that has the lowest
/// winning cosine among clusters of size > 1.
DictionaryLearningResult learn_dictionary(const Eigen::MatrixXd& features, const DictionaryLearningOptions& options);

/// Active positions of all maps stacked as columns (map order, then position order).
Eigen::MatrixXd stack_active_features(const std::vector<FeatureMap>& maps);

/// One draw from vMF(mean, S) via Wood's rejection scheme. S = 0 is uniform.
Eigen::VectorXd sample_vmf(const Eigen::Ref<const Eigen::VectorXd>& mean, double concentration, Rng& rng);
Eigen::VectorXd sample_vmf(const Eigen::Ref<const Eigen::VectorXd>& mean, double concentration, std::uint64_t seed);

/// Uniform draw from the unit sphere in R^dim.
Eigen::VectorXd sample_uniform_sphere(int dim, Rng& rng);

}  // namespace compnet
