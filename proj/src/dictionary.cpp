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

#include "compnet/dictionary.hpp"

#include <cmath>

#include "compnet/detail/binary_io.hpp"
#include "compnet/error.hpp"
#include "compnet/random.hpp"

namespace compnet {

void Dictionary::validate() const {
  if (means.rows() < 1 || means.cols() < 1) throw Error(ErrorCode::InvalidConfig, "empty dictionary");
  if (!std::isfinite(concentration) || concentration < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "concentration must be finite and non-negative");
  }
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    if (std::abs(means.row(k).norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::InvalidFeature, "dictionary mean " + std::to_string(k) + " is not unit-norm");
    }
  }
}

std::string encode_dictionary(const Dictionary& dict) {
  detail::ByteWriter w;
  w.put_magic("CDIC");
  w.put_u32(kDictionaryFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(dict.size()));
  w.put_u32(static_cast<std::uint32_t>(dict.dimension()));
  w.put_f64(dict.concentration);
  for (Eigen::Index k = 0; k < dict.means.rows(); ++k) {
    for (Eigen::Index c = 0; c < dict.means.cols(); ++c) w.put_f32(static_cast<float>(dict.means(k, c)));
  }
  return w.release();
}

Dictionary decode_dictionary(std::string_view bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("CDIC");
  r.expect_version(kDictionaryFormatVersion);
  const std::uint32_t k = r.get_u32();
  const std::uint32_t c = r.get_u32();
  Dictionary dict;
  dict.concentration = r.get_f64();
  r.expect_remaining(static_cast<std::size_t>(k) * c * 4);
  dict.means.resize(k, c);
  for (std::uint32_t i = 0; i < k; ++i) {
    for (std::uint32_t j = 0; j < c; ++j) dict.means(i, j) = r.get_f32();
  }
  dict.validate();
  return dict;
}

void write_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  detail::write_file(path, encode_dictionary(dict));
}

Dictionary read_dictionary(const std::filesystem::path& path) { return decode_dictionary(detail::read_file(path)); }

std::uint64_t content_hash(const Dictionary& dict) {
  const std::string bytes = encode_dictionary(dict);
  return fnv1a(bytes.data(), bytes.size());
}

}  // namespace compnet
