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

// Shared fixtures for the unit tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compnet/dictionary.hpp"
#include "compnet/feature_map.hpp"
#include "compnet/random.hpp"
#include "compnet/vmf.hpp"

namespace compnet::testing {

inline Eigen::MatrixXd random_unit_columns(int dim, int n, Rng& rng) {
  Eigen::MatrixXd m(dim, n);
  for (int i = 0; i < n; ++i) m.col(i) = sample_uniform_sphere(dim, rng);
  return m;
}

/// Map with unit columns; each position is inactive with probability `inactive`.
inline FeatureMap random_map(int h, int w, int c, Rng& rng, double inactive = 0.0) {
  Eigen::MatrixXd data = random_unit_columns(c, h * w, rng);
  std::vector<std::uint8_t> active(static_cast<std::size_t>(h * w), 1);
  std::bernoulli_distribution drop(inactive);
  for (int p = 0; p < h * w; ++p) {
    if (inactive > 0.0 && drop(rng)) {
      active[static_cast<std::size_t>(p)] = 0;
      data.col(p).setZero();
    }
  }
  return FeatureMap(h, w, std::move(data), std::move(active));
}

inline Dictionary random_dictionary(int k, int c, double s, Rng& rng) {
  Dictionary d;
  d.means = random_unit_columns(c, k, rng).transpose();
  d.concentration = s;
  return d;
}

/// Columns drawn uniformly from the simplex (Dirichlet(1)).
inline Eigen::MatrixXd random_simplex_columns(int k, int n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::MatrixXd m(k, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < k; ++i) m(i, j) = e(rng);
    m.col(j) /= m.col(j).sum();
  }
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("compnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace compnet::testing
