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

#include "compnet/feature_io.hpp"

#include <fstream>
#include <iterator>

#include "compnet/detail/binary_io.hpp"

namespace compnet {

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace detail

std::string encode_feature_map(const FeatureMapT<float>& map) {
  detail::ByteWriter w;
  w.put_magic("CFMP");
  w.put_u32(kFeatureFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(map.height()));
  w.put_u32(static_cast<std::uint32_t>(map.width()));
  w.put_u32(static_cast<std::uint32_t>(map.channels()));
  const auto& data = map.data();
  for (Eigen::Index p = 0; p < data.cols(); ++p) {
    for (Eigen::Index c = 0; c < data.rows(); ++c) w.put_f32(data(c, p));
  }
  for (auto a : map.active_flags()) w.put_u8(a);
  return w.release();
}

FeatureMapT<float> decode_feature_map(std::string_view bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("CFMP");
  r.expect_version(kFeatureFormatVersion);
  const std::uint32_t h = r.get_u32();
  const std::uint32_t w = r.get_u32();
  const std::uint32_t c = r.get_u32();
  if (h == 0 || w == 0 || c == 0) throw Error(ErrorCode::InvalidFeature, "zero dimension in CFMP header");
  const std::size_t positions = static_cast<std::size_t>(h) * w;
  r.expect_remaining(positions * c * 4 + positions);
  FeatureMapT<float>::Matrix data(c, static_cast<Eigen::Index>(positions));
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::uint32_t k = 0; k < c; ++k) data(k, static_cast<Eigen::Index>(p)) = r.get_f32();
  }
  std::vector<std::uint8_t> active(positions);
  for (auto& a : active) a = r.get_u8();
  return FeatureMapT<float>(static_cast<int>(h), static_cast<int>(w), std::move(data), std::move(active));
}

std::string encode_mask(const OcclusionMask& mask) {
  detail::ByteWriter w;
  w.put_magic("CMSK");
  w.put_u32(kMaskFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(mask.height()));
  w.put_u32(static_cast<std::uint32_t>(mask.width()));
  for (auto v : mask.values()) w.put_u8(v);
  return w.release();
}

OcclusionMask decode_mask(std::string_view bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("CMSK");
  r.expect_version(kMaskFormatVersion);
  const std::uint32_t h = r.get_u32();
  const std::uint32_t w = r.get_u32();
  if (h == 0 || w == 0) throw Error(ErrorCode::InvalidFeature, "zero dimension in CMSK header");
  const std::size_t positions = static_cast<std::size_t>(h) * w;
  r.expect_remaining(positions);
  std::vector<std::uint8_t> values(positions);
  for (auto& v : values) v = r.get_u8();
  return OcclusionMask(static_cast<int>(h), static_cast<int>(w), std::move(values));
}

template <typename Scalar>
void write_feature_map(const FeatureMapT<Scalar>& map, const std::filesystem::path& path) {
  detail::write_file(path, encode_feature_map(map));
}

template <typename Scalar>
FeatureMapT<Scalar> read_feature_map(const std::filesystem::path& path) {
  auto map = decode_feature_map(detail::read_file(path));
  if constexpr (std::is_same_v<Scalar, float>) {
    return map;
  } else {
    return map.template cast<Scalar>();
  }
}

template void write_feature_map(const FeatureMapT<float>&, const std::filesystem::path&);
template void write_feature_map(const FeatureMapT<double>&, const std::filesystem::path&);
template FeatureMapT<float> read_feature_map(const std::filesystem::path&);
template FeatureMapT<double> read_feature_map(const std::filesystem::path&);

void write_mask(const OcclusionMask& mask, const std::filesystem::path& path) {
  detail::write_file(path, encode_mask(mask));
}

OcclusionMask read_mask(const std::filesystem::path& path) { return decode_mask(detail::read_file(path)); }

}  // namespace compnet
