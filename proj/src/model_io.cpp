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

#include "compnet/model_io.hpp"

#include <algorithm>

#include "compnet/detail/binary_io.hpp"
#include "compnet/error.hpp"

namespace compnet {

namespace {

void put_matrix(detail::ByteWriter& w, const Eigen::MatrixXd& a) {
  for (Eigen::Index p = 0; p < a.cols(); ++p) {
    for (Eigen::Index k = 0; k < a.rows(); ++k) w.put_f32(static_cast<float>(a(k, p)));
  }
}

Eigen::MatrixXd get_matrix(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index p = 0; p < cols; ++p) {
    for (Eigen::Index k = 0; k < rows; ++k) a(k, p) = r.get_f32();
  }
  return a;
}

// Float storage perturbs row sums by ~1e-7; restore the floored simplex.
Eigen::MatrixXd restore_simplex(Eigen::MatrixXd a) {
  for (Eigen::Index p = 0; p < a.cols(); ++p) {
    const double sum = a.col(p).sum();
    if (!(sum > 0.0)) throw Error(ErrorCode::InvalidWeights, "stored mixture coefficients sum to zero");
    const double floor = std::min(a.col(p).minCoeff() / sum, kSmoothingFloor);
    a.col(p) = floor > 0.0 ? floor_project(a.col(p) / sum, floor) : Eigen::VectorXd(a.col(p) / sum);
  }
  return a;
}

}  // namespace

std::string_view model_extension(ModelFamily family) { return family == ModelFamily::Bernoulli ? ".cbrn" : ".cvmf"; }

std::string encode_class_model(const ClassModel& model, const Background& bg, std::uint64_t dictionary_hash) {
  detail::ByteWriter w;
  const bool vmf = model.family() == ModelFamily::Vmf;
  if (vmf != std::holds_alternative<VmfBackground>(bg)) {
    throw Error(ErrorCode::DimensionMismatch, "background family does not match the class model");
  }
  w.put_magic(vmf ? "CVMF" : "CBRN");
  w.put_u32(kModelFormatVersion);
  std::visit(
      [&](const auto& list) {
        if (list.empty()) throw Error(ErrorCode::InvalidConfig, "class model has no components");
        const auto& first = list.front();
        w.put_u32(static_cast<std::uint32_t>(first.height()));
        w.put_u32(static_cast<std::uint32_t>(first.width()));
        w.put_u32(static_cast<std::uint32_t>(first.alphas().rows()));
        w.put_u32(static_cast<std::uint32_t>(list.size()));
        w.put_string(model.label);
        for (const auto& c : list) put_matrix(w, c.alphas());
      },
      model.components);
  std::visit([&](const auto& b) { put_matrix(w, b.betas()); }, bg);
  if (vmf) w.put_u64(dictionary_hash);
  return w.release();
}

ModelFile decode_class_model(std::string_view bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::Truncated, "model file shorter than its magic");
  const std::string_view magic = bytes.substr(0, 4);
  if (magic != "CBRN" && magic != "CVMF") throw Error(ErrorCode::BadMagic, "expected magic 'CBRN' or 'CVMF'");
  const bool vmf = magic == "CVMF";
  detail::ByteReader r(bytes);
  r.expect_magic(magic);
  r.expect_version(kModelFormatVersion);
  const int h = static_cast<int>(r.get_u32());
  const int w = static_cast<int>(r.get_u32());
  const int k = static_cast<int>(r.get_u32());
  const auto m = r.get_u32();
  if (h < 1 || w < 1 || k < 1 || m < 1) throw Error(ErrorCode::InvalidFeature, "zero dimension in model header");
  ModelFile out;
  out.model.label = r.get_string();
  const std::size_t positions = static_cast<std::size_t>(h) * w;
  r.expect_remaining((m * positions * k + k) * 4 + (vmf ? 8 : 0));
  if (vmf) {
    std::vector<VmfForeground> list;
    for (std::uint32_t i = 0; i < m; ++i) list.emplace_back(h, w, restore_simplex(get_matrix(r, k, positions)));
    out.model.components = std::move(list);
    out.background = VmfBackground(restore_simplex(get_matrix(r, k, 1)).col(0));
    out.dictionary_hash = r.get_u64();
  } else {
    std::vector<BernoulliForeground> list;
    for (std::uint32_t i = 0; i < m; ++i) list.emplace_back(h, w, get_matrix(r, k, positions));
    out.model.components = std::move(list);
    out.background = BernoulliBackground(get_matrix(r, k, 1).col(0));
  }
  return out;
}

void write_class_model(const ClassModel& model, const Background& bg, std::uint64_t dictionary_hash,
                       const std::filesystem::path& path) {
  detail::write_file(path, encode_class_model(model, bg, dictionary_hash));
}

ModelFile read_class_model(const std::filesystem::path& path) {
  return decode_class_model(detail::read_file(path));
}

std::vector<ModelFile> read_model_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, "model directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (ext == ".cbrn" || ext == ".cvmf") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw Error(ErrorCode::InvalidFeature, "no model files in " + dir.string());
  std::vector<ModelFile> out;
  for (const auto& p : paths) out.push_back(read_class_model(p));
  for (const auto& f : out) {
    if (f.model.family() != out.front().model.family() || f.dictionary_hash != out.front().dictionary_hash) {
      throw Error(ErrorCode::DimensionMismatch, "model files in " + dir.string() + " mix families or dictionaries");
    }
  }
  return out;
}

}  // namespace compnet
