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

#include "compnet/bernoulli_model.hpp"

#include <cmath>
#include <numeric>

#include "compnet/error.hpp"
#include "compnet/random.hpp"

namespace compnet {

int BinaryEncoding::active_count() const {
  int n = 0;
  for (auto a : active) n += a ? 1 : 0;
  return n;
}

BernoulliForeground::BernoulliForeground(int height, int width, Eigen::MatrixXd alphas, double eps)
    : height_(height), width_(width), alphas_(std::move(alphas)) {
  if (alphas_.cols() != static_cast<Eigen::Index>(height_) * width_) {
    throw Error(ErrorCode::DimensionMismatch, "alpha tensor does not match the lattice");
  }
  alphas_ = alphas_.cwiseMax(eps).cwiseMin(1.0 - eps);
  log_on_ = alphas_.array().log();
  log_off_ = (1.0 - alphas_.array()).log();
}

BernoulliBackground::BernoulliBackground(Eigen::VectorXd betas, double eps) : betas_(std::move(betas)) {
  betas_ = betas_.cwiseMax(eps).cwiseMin(1.0 - eps);
  log_on_ = betas_.array().log();
  log_off_ = (1.0 - betas_.array()).log();
}

BinaryEncoding binarize(const FeatureMap& map, const Dictionary& dict, double delta) {
  if (map.channels() != dict.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "feature map has C=" + std::to_string(map.channels()) +
                                                  " but dictionary has C=" + std::to_string(dict.dimension()));
  }
  BinaryEncoding enc;
  enc.height = map.height();
  enc.width = map.width();
  enc.active = map.active_flags();
  const Eigen::MatrixXd cos = dict.means * map.data();
  enc.bits = cos.array() > delta;
  for (int p = 0; p < map.positions(); ++p) {
    if (!map.active(p)) enc.bits.col(p).setConstant(false);
  }
  return enc;
}

namespace {

void check_same_lattice(std::span<const BinaryEncoding> encodings) {
  if (encodings.empty()) throw Error(ErrorCode::InsufficientData, "need at least one encoding");
  const auto& first = encodings.front();
  for (const auto& e : encodings) {
    if (e.height != first.height || e.width != first.width || e.parts() != first.parts()) {
      throw Error(ErrorCode::DimensionMismatch, "encodings disagree on lattice or dictionary size");
    }
  }
}

}  // namespace

BernoulliForeground estimate_bernoulli_foreground(std::span<const BinaryEncoding> encodings,
                                                  std::span<const std::vector<std::uint8_t>> visibility,
                                                  const BernoulliForeground* previous, double eps) {
  check_same_lattice(encodings);
  const auto& first = encodings.front();
  const bool weighted = !visibility.empty();
  if (weighted && visibility.size() != encodings.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one visibility map per encoding required");
  }
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(first.parts(), first.positions());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(first.positions());
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    const auto& e = encodings[i];
    for (int p = 0; p < e.positions(); ++p) {
      if (!e.is_active(p) || (weighted && !visibility[i][p])) continue;
      sums.col(p) += e.bits.col(p).cast<double>().matrix();
      counts(p) += 1.0;
    }
  }
  Eigen::MatrixXd alphas(first.parts(), first.positions());
  for (int p = 0; p < first.positions(); ++p) {
    if (counts(p) > 0.0) {
      alphas.col(p) = sums.col(p) / counts(p);
    } else if (previous != nullptr) {
      alphas.col(p) = previous->alphas().col(p);
    } else {
      alphas.col(p).setConstant(eps);
    }
  }
  return BernoulliForeground(first.height, first.width, std::move(alphas), eps);
}

BernoulliForeground estimate_bernoulli_foreground(std::span<const BinaryEncoding> encodings, double eps) {
  return estimate_bernoulli_foreground(encodings, {}, nullptr, eps);
}

BernoulliBackground estimate_bernoulli_background(std::span<const BinaryEncoding> encodings, std::size_t samples,
                                                  std::uint64_t seed, double eps) {
  check_same_lattice(encodings);
  std::vector<std::pair<std::size_t, int>> rows;
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    for (int p = 0; p < encodings[i].positions(); ++p) {
      if (encodings[i].is_active(p)) rows.emplace_back(i, p);
    }
  }
  if (rows.empty()) throw Error(ErrorCode::InsufficientData, "background encodings have no active positions");
  if (samples == 0) samples = rows.size();
  if (samples > rows.size()) {
    throw Error(ErrorCode::InsufficientData, "requested " + std::to_string(samples) + " background rows, only " +
                                                 std::to_string(rows.size()) + " available");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(encodings.front().parts());
  for (std::size_t i = 0; i < samples; ++i) {
    sum += encodings[rows[i].first].bits.col(rows[i].second).cast<double>().matrix();
  }
  return BernoulliBackground(sum / static_cast<double>(samples), eps);
}

double bernoulli_position_log_likelihood(const BinaryEncoding& enc, const BernoulliForeground& fg, int p) {
  return enc.bits.col(p).select(fg.log_on().col(p).array(), fg.log_off().col(p).array()).sum();
}

double bernoulli_position_log_likelihood(const BinaryEncoding& enc, const BernoulliBackground& bg, int p) {
  return enc.bits.col(p).select(bg.log_on().array(), bg.log_off().array()).sum();
}

namespace {

void check_dims(const BinaryEncoding& enc, const BernoulliForeground& fg) {
  if (enc.height != fg.height() || enc.width != fg.width() || enc.parts() != fg.parts()) {
    throw Error(ErrorCode::DimensionMismatch, "encoding and foreground model disagree on dimensions");
  }
}

void check_dims(const BinaryEncoding& enc, const BernoulliBackground& bg) {
  if (enc.parts() != bg.parts()) throw Error(ErrorCode::DimensionMismatch, "background has wrong part count");
}

}  // namespace

double bernoulli_log_likelihood(const BinaryEncoding& enc, const BernoulliForeground& fg) {
  check_dims(enc, fg);
  double total = 0.0;
  for (int p = 0; p < enc.positions(); ++p) {
    if (enc.is_active(p)) total += bernoulli_position_log_likelihood(enc, fg, p);
  }
  return total;
}

OcclusionLikelihood dict_occlusion_likelihood(const BinaryEncoding& enc, const BernoulliForeground& fg,
                                              const BernoulliBackground& bg, double pi) {
  check_prior(pi);
  check_dims(enc, fg);
  check_dims(enc, bg);
  const double log_fg_prior = std::log(pi);
  const double log_bg_prior = std::log1p(-pi);
  OcclusionLikelihood out;
  out.visibility.assign(static_cast<std::size_t>(enc.positions()), 1);
  for (int p = 0; p < enc.positions(); ++p) {
    if (!enc.is_active(p)) continue;
    const double fg_score = bernoulli_position_log_likelihood(enc, fg, p) + log_fg_prior;
    const double bg_score = bernoulli_position_log_likelihood(enc, bg, p) + log_bg_prior;
    const bool visible = fg_score >= bg_score;
    out.visibility[p] = visible ? 1 : 0;
    out.total += visible ? fg_score : bg_score;
  }
  out.relative_total = out.total;
  return out;
}

OcclusionScoreMap dict_occlusion_score_map(const BinaryEncoding& enc, const BernoulliForeground& fg,
                                           const BernoulliBackground& bg, double pi) {
  check_prior(pi);
  check_dims(enc, fg);
  check_dims(enc, bg);
  const double log_fg_prior = std::log(pi);
  const double log_bg_prior = std::log1p(-pi);
  OcclusionScoreMap out;
  out.height = enc.height;
  out.width = enc.width;
  out.active = enc.active;
  out.scores = Eigen::VectorXd::Zero(enc.positions());
  for (int p = 0; p < enc.positions(); ++p) {
    if (!enc.is_active(p)) continue;
    out.scores(p) = (bernoulli_position_log_likelihood(enc, bg, p) + log_bg_prior) -
                    (bernoulli_position_log_likelihood(enc, fg, p) + log_fg_prior);
  }
  return out;
}

}  // namespace compnet
