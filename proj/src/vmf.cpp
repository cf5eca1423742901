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

#include "compnet/vmf.hpp"

#include <algorithm>
#include <set>

namespace compnet {

void check_simplex(const Eigen::Ref<const Eigen::VectorXd>& weights, int expected_size) {
  if (weights.size() != expected_size) {
    throw Error(ErrorCode::InvalidWeights, "expected " + std::to_string(expected_size) + " weights, got " +
                                               std::to_string(weights.size()));
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::InvalidWeights, "weights are not on the probability simplex");
  }
}

Eigen::MatrixXd stack_active_features(const std::vector<FeatureMap>& maps) {
  Eigen::Index total = 0;
  for (const auto& m : maps) total += m.active_count();
  const Eigen::Index channels = maps.empty() ? 0 : maps.front().channels();
  Eigen::MatrixXd out(channels, total);
  Eigen::Index col = 0;
  for (const auto& m : maps) {
    if (m.channels() != channels) throw Error(ErrorCode::DimensionMismatch, "feature maps disagree on C");
    for (int p = 0; p < m.positions(); ++p) {
      if (m.active(p)) out.col(col++) = m.position(p);
    }
  }
  return out;
}

namespace {

int count_distinct_upto(const Eigen::MatrixXd& x, int limit) {
  std::set<std::vector<double>> seen;
  for (Eigen::Index i = 0; i < x.cols() && static_cast<int>(seen.size()) < limit; ++i) {
    seen.emplace(x.col(i).data(), x.col(i).data() + x.rows());
  }
  return static_cast<int>(seen.size());
}

Eigen::MatrixXd seed_means(const Eigen::MatrixXd& x, int k_count, Rng& rng) {
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd means(k_count, x.rows());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  means.row(0) = x.col(first(rng)).transpose();
  Eigen::VectorXd best_cos = (means.row(0) * x).transpose();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 1; k < k_count; ++k) {
    const Eigen::ArrayXd dist = (1.0 - best_cos.array()).max(0.0);
    const Eigen::ArrayXd weight = dist.square();
    const double total = weight.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = unif(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += weight(i);
        if (acc > target && weight(i) > 0.0) {
          pick = i;
          break;
        }
      }
    }
    means.row(k) = x.col(pick).transpose();
    best_cos = best_cos.cwiseMax((means.row(k) * x).transpose());
  }
  return means;
}

}  // namespace

DictionaryLearningResult learn_dictionary(const Eigen::MatrixXd& features, const DictionaryLearningOptions& options) {
  const int k_count = options.components;
  if (k_count < 1) throw Error(ErrorCode::InvalidConfig, "dictionary size must be at least 1");
  if (features.cols() < k_count || count_distinct_upto(features, k_count) < k_count) {
    throw Error(ErrorCode::InsufficientData, "need at least " + std::to_string(k_count) +
                                                 " distinct feature vectors, have " + std::to_string(features.cols()));
  }
  const Eigen::Index n = features.cols();
  Rng rng(options.seed);

  DictionaryLearningResult result;
  Eigen::MatrixXd means = seed_means(features, k_count, rng);
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd best(n);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const Eigen::MatrixXd cos = means * features;
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index winner = 0;
      best(i) = cos.col(i).maxCoeff(&winner);
      if (assignment[i] != static_cast<int>(winner)) {
        assignment[i] = static_cast<int>(winner);
        changed = true;
      }
    }
    const double objective = options.concentration * best.sum();
    result.objective.push_back(objective);
    result.iterations = iter + 1;
    if (iter > 0) {
      const double prev = result.objective[result.objective.size() - 2];
      if (!changed || std::abs(objective - prev) <= options.tol * std::abs(prev)) {
        result.converged = true;
        break;
      }
    }

    std::vector<int> counts(static_cast<std::size_t>(k_count), 0);
    for (int a : assignment) ++counts[a];
    for (int k = 0; k < k_count; ++k) {
      if (counts[k] > 0) continue;
      Eigen::Index worst = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[assignment[i]] > 1 && (worst < 0 || best(i) < best(worst))) worst = i;
      }
      --counts[assignment[worst]];
      assignment[worst] = k;
      counts[k] = 1;
      best(worst) = 1.0;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k_count, features.rows());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(assignment[i]) += features.col(i).transpose();
    for (int k = 0; k < k_count; ++k) {
      const double norm = sums.row(k).norm();
      if (norm > 1e-12) means.row(k) = sums.row(k) / norm;
    }
  }

  result.dictionary.means = std::move(means);
  result.dictionary.concentration = options.concentration;
  result.assignment = std::move(assignment);
  return result;
}

Eigen::VectorXd sample_uniform_sphere(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

Eigen::VectorXd sample_vmf(const Eigen::Ref<const Eigen::VectorXd>& mean, double concentration, Rng& rng) {
  const int dim = static_cast<int>(mean.size());
  if (dim < 2) throw Error(ErrorCode::InvalidConfig, "vMF sampling needs dimension >= 2");
  if (!(concentration >= 0.0) || !std::isfinite(concentration)) {
    throw Error(ErrorCode::InvalidConfig, "vMF concentration must be finite and non-negative");
  }
  if (concentration == 0.0) return sample_uniform_sphere(dim, rng);

  const double d1 = dim - 1.0;
  const double b = d1 / (2.0 * concentration + std::sqrt(4.0 * concentration * concentration + d1 * d1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = concentration * x0 + d1 * std::log(1.0 - x0 * x0);
  std::gamma_distribution<double> gamma(d1 / 2.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double w = 0.0;
  for (;;) {
    const double ga = gamma(rng);
    const double gb = gamma(rng);
    const double z = ga / (ga + gb);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = unif(rng);
    if (concentration * w + d1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  // Direction orthogonal to the mean, uniform on the tangent sphere.
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    v -= v.dot(mean) * mean;
    norm = v.norm();
  } while (norm < 1e-12);
  Eigen::VectorXd out = w * mean + std::sqrt(std::max(0.0, 1.0 - w * w)) * (v / norm);
  return out / out.norm();
}

Eigen::VectorXd sample_vmf(const Eigen::Ref<const Eigen::VectorXd>& mean, double concentration, std::uint64_t seed) {
  Rng rng(seed);
  return sample_vmf(mean, concentration, rng);
}

}  // namespace compnet
