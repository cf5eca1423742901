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

#include "compnet/mixtures.hpp"

#include <algorithm>
#include <limits>
#include <type_traits>

#include "compnet/error.hpp"
#include "compnet/random.hpp"
#include "compnet/vmf.hpp"

namespace compnet {

std::string_view to_string(ModelFamily family) { return family == ModelFamily::Bernoulli ? "dict" : "vmf"; }

ModelFamily parse_family(std::string_view s) {
  if (s == "dict" || s == "bernoulli") return ModelFamily::Bernoulli;
  if (s == "vmf") return ModelFamily::Vmf;
  throw Error(ErrorCode::InvalidConfig, "unknown model family '" + std::string(s) + "' (expected dict or vmf)");
}

int ClassModel::mixtures() const {
  return std::visit([](const auto& list) { return static_cast<int>(list.size()); }, components);
}

std::vector<std::uint8_t> MixtureAssignment::indicator(std::size_t i) const {
  std::vector<std::uint8_t> nu(static_cast<std::size_t>(mixtures), 0);
  nu[static_cast<std::size_t>(component[i])] = 1;
  return nu;
}

std::vector<int> MixtureAssignment::sizes() const {
  std::vector<int> n(static_cast<std::size_t>(mixtures), 0);
  for (int c : component) ++n[static_cast<std::size_t>(c)];
  return n;
}

ImageEvidence image_evidence(const FeatureMap& map, const Dictionary& dict, double delta) {
  if (map.channels() != dict.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "feature map has C=" + std::to_string(map.channels()) +
                                                  " but dictionary has C=" + std::to_string(dict.dimension()));
  }
  const Eigen::MatrixXd cos = dict.means * map.data();
  ImageEvidence ev;
  ev.kernels.height = ev.encoding.height = map.height();
  ev.kernels.width = ev.encoding.width = map.width();
  ev.kernels.active = ev.encoding.active = map.active_flags();
  ev.kernels.log_normalizer = dict.log_normalizer;
  ev.kernels.log_kernels = dict.concentration * cos;
  ev.encoding.bits = cos.array() > delta;
  for (int p = 0; p < map.positions(); ++p) {
    if (!map.active(p)) ev.encoding.bits.col(p).setConstant(false);
  }
  return ev;
}

namespace {

template <typename Fn>
decltype(auto) visit_family(const ClassModel& model, const Background& bg, Fn&& fn) {
  if (model.family() == ModelFamily::Bernoulli) {
    const auto* b = std::get_if<BernoulliBackground>(&bg);
    if (b == nullptr) throw Error(ErrorCode::DimensionMismatch, "Bernoulli model needs a Bernoulli background");
    return fn(std::get<0>(model.components), *b);
  }
  const auto* v = std::get_if<VmfBackground>(&bg);
  if (v == nullptr) throw Error(ErrorCode::DimensionMismatch, "vMF model needs a vMF background");
  return fn(std::get<1>(model.components), *v);
}

ComponentScore plain_score(const ImageEvidence& ev, const BernoulliForeground& fg) {
  ComponentScore s;
  s.total = s.relative_total = bernoulli_log_likelihood(ev.encoding, fg);
  s.visibility.assign(ev.encoding.active.size(), 1);
  return s;
}

ComponentScore plain_score(const ImageEvidence& ev, const VmfForeground& fg) {
  ComponentScore s;
  int active = 0;
  for (int p = 0; p < ev.kernels.positions(); ++p) {
    if (!ev.kernels.is_active(p)) continue;
    s.relative_total += foreground_position_score(ev.kernels, fg, p);
    ++active;
  }
  s.total = s.relative_total + active * ev.kernels.log_normalizer;
  s.visibility.assign(ev.kernels.active.size(), 1);
  return s;
}

ComponentScore occluded_score(const ImageEvidence& ev, const BernoulliForeground& fg, const BernoulliBackground& bg,
                              double pi) {
  auto r = dict_occlusion_likelihood(ev.encoding, fg, bg, pi);
  return {r.total, r.relative_total, std::move(r.visibility)};
}

ComponentScore occluded_score(const ImageEvidence& ev, const VmfForeground& fg, const VmfBackground& bg, double pi) {
  auto r = occlusion_aware_log_likelihood(ev.kernels, fg, bg, pi);
  return {r.total, r.relative_total, std::move(r.visibility)};
}

}  // namespace

ComponentScore score_component(const ImageEvidence& ev, const ClassModel& model, int component,
                               const Background& bg, double pi, bool occlusion_aware) {
  return visit_family(model, bg, [&](const auto& list, const auto& background) {
    const auto& fg = list.at(static_cast<std::size_t>(component));
    return occlusion_aware ? occluded_score(ev, fg, background, pi) : plain_score(ev, fg);
  });
}

OcclusionScoreMap component_score_map(const ImageEvidence& ev, const ClassModel& model, int component,
                                      const Background& bg, double pi) {
  return visit_family(model, bg, [&](const auto& list, const auto& background) {
    const auto& fg = list.at(static_cast<std::size_t>(component));
    if constexpr (std::is_same_v<std::decay_t<decltype(background)>, BernoulliBackground>) {
      return dict_occlusion_score_map(ev.encoding, fg, background, pi);
    } else {
      return occlusion_score_map(ev.kernels, fg, background, pi);
    }
  });
}

MixtureAssignment init_assignments(std::span<const FeatureMap> maps, int mixtures, const Dictionary& dict,
                                   std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(maps.size());
  if (mixtures < 1) throw Error(ErrorCode::InvalidConfig, "mixture count must be at least 1");
  if (n < mixtures) {
    throw Error(ErrorCode::InsufficientData, "need at least " + std::to_string(mixtures) + " images, have " +
                                                 std::to_string(n));
  }
  MixtureAssignment out;
  out.mixtures = mixtures;
  out.component.assign(maps.size(), 0);
  if (mixtures == 1) return out;

  // Spatial responsibility profile of every image, one column each.
  const auto first = kernel_evidence(maps[0], dict);
  const Eigen::Index dim = first.log_kernels.size();
  Eigen::MatrixXd profiles(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ev = kernel_evidence(maps[static_cast<std::size_t>(i)], dict);
    if (ev.log_kernels.size() != dim) throw Error(ErrorCode::DimensionMismatch, "feature maps disagree on lattice");
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(ev.log_kernels.rows(), ev.log_kernels.cols());
    for (int p = 0; p < ev.positions(); ++p) {
      if (!ev.is_active(p)) continue;
      const auto col = ev.log_kernels.col(p);
      resp.col(p) = (col.array() - log_sum_exp(col)).exp();
    }
    profiles.col(i) = resp.reshaped();
  }

  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Eigen::MatrixXd centers(dim, mixtures);
  centers.col(0) = profiles.col(pick(rng));
  Eigen::VectorXd min_dist = (profiles.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  for (int m = 1; m < mixtures; ++m) {
    Eigen::Index far = 0;
    min_dist.maxCoeff(&far);
    centers.col(m) = profiles.col(far);
    min_dist = min_dist.cwiseMin((profiles.colwise() - centers.col(m)).colwise().squaredNorm().transpose());
  }

  Eigen::MatrixXd dist(mixtures, n);
  for (int iter = 0; iter < 50; ++iter) {
    for (int m = 0; m < mixtures; ++m) {
      dist.row(m) = (profiles.colwise() - centers.col(m)).colwise().squaredNorm();
    }
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist.col(i).minCoeff(&best);
      if (out.component[i] != static_cast<int>(best) || iter == 0) {
        changed = changed || out.component[i] != static_cast<int>(best);
        out.component[i] = static_cast<int>(best);
      }
    }
    // Empty clusters take the point farthest from its own center.
    auto sizes = out.sizes();
    for (int m = 0; m < mixtures; ++m) {
      if (sizes[m] > 0) continue;
      Eigen::Index worst = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int c = out.component[i];
        if (sizes[c] > 1 && (worst < 0 || dist(c, i) > dist(out.component[worst], worst))) worst = i;
      }
      --sizes[out.component[worst]];
      out.component[worst] = m;
      sizes[m] = 1;
      changed = true;
    }
    if (!changed && iter > 0) break;
    centers.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centers.col(out.component[i]) += profiles.col(i);
    for (int m = 0; m < mixtures; ++m) centers.col(m) /= sizes[m];
  }
  return out;
}

namespace {

template <typename Foreground, typename BackgroundT>
struct Trainer;

template <>
struct Trainer<BernoulliForeground, BernoulliBackground> {
  static BernoulliForeground fit(const std::vector<const ImageEvidence*>& members, const TrainOptions& options) {
    std::vector<BinaryEncoding> enc;
    for (const auto* m : members) enc.push_back(m->encoding);
    return estimate_bernoulli_foreground(enc, options.bernoulli_eps);
  }
  static BernoulliForeground blend(const BernoulliForeground& a, const BernoulliForeground& b, double t,
                                   const TrainOptions& options) {
    return BernoulliForeground(a.height(), a.width(), (1.0 - t) * a.alphas() + t * b.alphas(), options.bernoulli_eps);
  }
};

template <>
struct Trainer<VmfForeground, VmfBackground> {
  static VmfForeground fit(const std::vector<const ImageEvidence*>& members, const VmfForeground* previous,
                           const TrainOptions& options) {
    std::vector<KernelEvidence> ev;
    for (const auto* m : members) ev.push_back(m->kernels);
    return estimate_alpha(ev, options.em, {}, previous).foreground;
  }
  static VmfForeground fit(const std::vector<const ImageEvidence*>& members, const TrainOptions& options) {
    return fit(members, nullptr, options);
  }
  static VmfForeground blend(const VmfForeground& a, const VmfForeground& b, double t, const TrainOptions&) {
    return VmfForeground(a.height(), a.width(), (1.0 - t) * a.alphas() + t * b.alphas());
  }
};

template <typename Foreground>
Foreground refit(const std::vector<const ImageEvidence*>& members, const Foreground* previous,
                 const TrainOptions& options) {
  if constexpr (std::is_same_v<Foreground, VmfForeground>) {
    return Trainer<VmfForeground, VmfBackground>::fit(members, previous, options);
  } else {
    return Trainer<BernoulliForeground, BernoulliBackground>::fit(members, options);
  }
}

template <typename Foreground>
double members_score(const std::vector<const ImageEvidence*>& members, const Foreground& fg, const Background& bg,
                     const TrainOptions& options) {
  ClassModel single;
  single.components = std::vector<Foreground>{fg};
  double total = 0.0;
  for (const auto* m : members) total += score_component(*m, single, 0, bg, options.pi, options.occlusion_aware).relative_total;
  return total;
}

template <typename Foreground, typename BackgroundT>
TrainResult train_family(const std::vector<ImageEvidence>& evidence, MixtureAssignment assignment,
                         const std::string& label, const BackgroundT& bg, const TrainOptions& options) {
  const std::size_t n = evidence.size();
  const int mixtures = options.mixtures;
  std::vector<Foreground> components(static_cast<std::size_t>(mixtures));
  std::vector<bool> fitted(static_cast<std::size_t>(mixtures), false);

  ClassModel scratch;
  scratch.label = label;
  const Background any_bg = bg;

  TrainResult result;
  result.assignment = assignment;
  for (int round = 0; round < options.rounds; ++round) {
    for (int m = 0; m < mixtures; ++m) {
      std::vector<const ImageEvidence*> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (result.assignment.component[i] == m) members.push_back(&evidence[i]);
      }
      if (!fitted[m]) {
        components[m] = Trainer<Foreground, BackgroundT>::fit(members, options);
        fitted[m] = true;
        continue;
      }
      // Training images are unoccluded, so the fit uses every active
      // position. Backtracking towards the previous parameters keeps the
      // members' assigned score from dropping.
      const auto& previous = components[m];
      const double before = members_score(members, previous, any_bg, options);
      const auto target = refit(members, &previous, options);
      Foreground next = previous;
      for (double t = 1.0; t > 1e-6; t /= 2.0) {
        auto candidate = t == 1.0 ? target : Trainer<Foreground, BackgroundT>::blend(previous, target, t, options);
        if (members_score(members, candidate, any_bg, options) >= before) {
          next = std::move(candidate);
          break;
        }
      }
      components[m] = std::move(next);
    }
    scratch.components = components;

    std::vector<double> best(n, 0.0);
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int winner = 0;
      ComponentScore winning;
      for (int m = 0; m < mixtures; ++m) {
        auto s = score_component(evidence[i], scratch, m, any_bg, options.pi, options.occlusion_aware);
        if (m == 0 || s.relative_total > winning.relative_total) {
          winner = m;
          winning = std::move(s);
        }
      }
      if (winner != result.assignment.component[i]) changed = true;
      result.assignment.component[i] = winner;
      best[i] = winning.relative_total;
      objective += winning.total;
    }
    result.objective.push_back(objective);
    result.rounds_run = round + 1;

    bool reseeded = false;
    auto sizes = result.assignment.sizes();
    for (int m = 0; m < mixtures; ++m) {
      if (sizes[m] > 0) continue;
      std::size_t worst = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[result.assignment.component[i]] > 1 && (worst == n || best[i] < best[worst])) worst = i;
      }
      --sizes[result.assignment.component[worst]];
      result.assignment.component[worst] = m;
      sizes[m] = 1;
      fitted[m] = false;
      reseeded = true;
    }
    if (!changed && !reseeded) break;
  }
  result.model.label = label;
  result.model.components = std::move(components);
  return result;
}

}  // namespace

TrainResult train_class_model(std::span<const FeatureMap> maps, const std::string& label, const Dictionary& dict,
                              const Background& bg, const TrainOptions& options) {
  if (options.rounds < 1) throw Error(ErrorCode::InvalidConfig, "rounds must be at least 1");
  check_prior(options.pi);
  auto assignment = init_assignments(maps, options.mixtures, dict, options.seed);
  std::vector<ImageEvidence> evidence;
  evidence.reserve(maps.size());
  for (const auto& m : maps) evidence.push_back(image_evidence(m, dict, options.delta));

  if (options.family == ModelFamily::Bernoulli) {
    const auto* b = std::get_if<BernoulliBackground>(&bg);
    if (b == nullptr) throw Error(ErrorCode::DimensionMismatch, "Bernoulli training needs a Bernoulli background");
    return train_family<BernoulliForeground>(evidence, std::move(assignment), label, *b, options);
  }
  const auto* v = std::get_if<VmfBackground>(&bg);
  if (v == nullptr) throw Error(ErrorCode::DimensionMismatch, "vMF training needs a vMF background");
  return train_family<VmfForeground>(evidence, std::move(assignment), label, *v, options);
}

MixtureChoice assign_mixture(const ImageEvidence& ev, const ClassModel& model, const Background& bg, double pi) {
  MixtureChoice choice;
  for (int m = 0; m < model.mixtures(); ++m) {
    const auto s = score_component(ev, model, m, bg, pi);
    if (m == 0 || s.relative_total > choice.relative_score) {
      choice.component = m;
      choice.score = s.total;
      choice.relative_score = s.relative_total;
    }
  }
  return choice;
}

MixtureChoice assign_mixture(const FeatureMap& map, const ClassModel& model, const Dictionary& dict,
                             const Background& bg, double pi, double delta) {
  return assign_mixture(image_evidence(map, dict, delta), model, bg, pi);
}

}  // namespace compnet
