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

// Little-endian byte buffers shared by every on-disk format.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "compnet/error.hpp"

namespace compnet::detail {

class ByteWriter {
 public:
  void put_magic(std::string_view magic) { buf_.append(magic); }

  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }
  void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

  void put_string(std::string_view s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }

  const std::string& bytes() const { return buf_; }
  std::string release() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  void expect_magic(std::string_view magic) {
    if (data_.size() < magic.size() || data_.substr(0, magic.size()) != magic) {
      throw Error(ErrorCode::BadMagic, "expected magic '" + std::string(magic) + "'");
    }
    pos_ = magic.size();
  }

  void expect_version(std::uint32_t expected) {
    const std::uint32_t v = get_u32();
    if (v != expected) {
      throw Error(ErrorCode::VersionMismatch,
                  "expected version " + std::to_string(expected) + ", found " + std::to_string(v));
    }
  }

  std::uint32_t get_u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t get_u64() {
    require(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }

  float get_f32() { return std::bit_cast<float>(get_u32()); }
  double get_f64() { return std::bit_cast<double>(get_u64()); }

  std::uint8_t get_u8() {
    require(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  std::string get_string() {
    const std::uint32_t n = get_u32();
    require(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  /// Checks that exactly `payload` more bytes remain.
  void expect_remaining(std::size_t payload) const {
    const std::size_t left = data_.size() - pos_;
    if (left < payload) {
      throw Error(ErrorCode::Truncated, "payload has " + std::to_string(left) + " bytes, header declares " +
                                            std::to_string(payload));
    }
    if (left > payload) {
      throw Error(ErrorCode::SizeMismatch, "payload has " + std::to_string(left) + " bytes, header declares " +
                                               std::to_string(payload));
    }
  }

  void expect_end() const { expect_remaining(0); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void require(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::Truncated, "unexpected end of data");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace compnet::detail
