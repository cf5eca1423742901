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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compnet/error.hpp"

namespace compnet {

/// Positions whose pre-normalization norm falls below this are inactive.
inline constexpr double kInactiveNorm = 1e-6;
inline constexpr double kUnitNormTolerance = 1e-6;

/// An H×W lattice of C-dimensional unit feature vectors.
///
/// Storage is C×(H·W), one column per position in row-major lattice order,
/// so the channels of a position are contiguous. Inactive positions hold the
/// zero vector and are skipped by every likelihood.
template <typename Scalar>
class FeatureMapT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  FeatureMapT() = default;

  FeatureMapT(int height, int width, Matrix data, std::vector<std::uint8_t> active)
      : height_(height), width_(width), data_(std::move(data)), active_(std::move(active)) {
    validate();
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return static_cast<int>(data_.rows()); }
  int positions() const { return height_ * width_; }

  const Matrix& data() const { return data_; }
  auto position(int p) const { return data_.col(p); }

  bool active(int p) const { return active_[static_cast<std::size_t>(p)] != 0; }
  const std::vector<std::uint8_t>& active_flags() const { return active_; }

  int active_count() const {
    int n = 0;
    for (auto a : active_) n += a ? 1 : 0;
    return n;
  }

  template <typename Other>
  FeatureMapT<Other> cast() const {
    return FeatureMapT<Other>(height_, width_, data_.template cast<Other>(), active_);
  }

  bool operator==(const FeatureMapT& other) const {
    return height_ == other.height_ && width_ == other.width_ && active_ == other.active_ &&
           data_.rows() == other.data_.rows() && data_ == other.data_;
  }

 private:
  void validate() const {
    if (height_ < 1 || width_ < 1 || data_.rows() < 1) {
      throw Error(ErrorCode::InvalidFeature, "feature map dimensions must be positive");
    }
    if (data_.cols() != static_cast<Eigen::Index>(height_) * width_ ||
        active_.size() != static_cast<std::size_t>(height_) * width_) {
      throw Error(ErrorCode::DimensionMismatch, "feature data does not match the H×W lattice");
    }
    for (int p = 0; p < positions(); ++p) {
      const double norm = data_.col(p).template cast<double>().norm();
      if (active_[p] > 1) throw Error(ErrorCode::InvalidFeature, "active flag must be 0 or 1 at " + where(p));
      // Written so that a NaN norm fails both branches.
      if (active_[p] ? !(std::abs(norm - 1.0) <= kUnitNormTolerance) : norm != 0.0) {
        throw Error(ErrorCode::InvalidFeature, "norm " + std::to_string(norm) + " violates the " +
                                                   (active_[p] ? "unit" : "inactive-zero") + " rule at " + where(p));
      }
    }
  }

  std::string where(int p) const {
    return "position (" + std::to_string(p / width_) + ", " + std::to_string(p % width_) + ")";
  }

  int height_ = 0;
  int width_ = 0;
  Matrix data_;
  std::vector<std::uint8_t> active_;
};

using FeatureMap = FeatureMapT<double>;

/// L2-normalizes every position of a raw C×(H·W) activation tensor.
template <typename Derived>
FeatureMapT<typename Derived::Scalar> normalize_features(int height, int width, const Eigen::MatrixBase<Derived>& raw) {
  using Scalar = typename Derived::Scalar;
  if (height < 1 || width < 1 || raw.rows() < 1) {
    throw Error(ErrorCode::InvalidFeature, "H, W and C must be at least 1");
  }
  if (raw.cols() != static_cast<Eigen::Index>(height) * width) {
    throw Error(ErrorCode::DimensionMismatch, "raw tensor has " + std::to_string(raw.cols()) + " positions, lattice " +
                                                  std::to_string(height) + "x" + std::to_string(width));
  }
  typename FeatureMapT<Scalar>::Matrix data(raw.rows(), raw.cols());
  std::vector<std::uint8_t> active(static_cast<std::size_t>(raw.cols()), 0);
  for (Eigen::Index p = 0; p < raw.cols(); ++p) {
    if (!raw.col(p).allFinite()) {
      throw Error(ErrorCode::InvalidFeature, "non-finite value at position (" + std::to_string(p / width) + ", " +
                                                 std::to_string(p % width) + ")");
    }
    const Scalar norm = raw.col(p).norm();
    if (static_cast<double>(norm) < kInactiveNorm) {
      data.col(p).setZero();
    } else {
      data.col(p) = raw.col(p) / norm;
      active[static_cast<std::size_t>(p)] = 1;
    }
  }
  return FeatureMapT<Scalar>(height, width, std::move(data), std::move(active));
}

}  // namespace compnet
