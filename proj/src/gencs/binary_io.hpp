/*
Copyright 2026 The gencs Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

// Little-endian binary helpers shared by the GENW and observation formats.

#include "gencs/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gencs::binary {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

/// FNV-1a, 64-bit.
inline std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

class Writer {
public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  template <class T>
  void put(T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf_.insert(buf_.end(), raw, raw + sizeof(T));
  }

  /// Appends the checksum of everything written so far.
  void seal() { put<std::uint64_t>(fnv1a64(buf_.data(), buf_.size())); }

  const std::vector<std::uint8_t>& buffer() const noexcept { return buf_; }

  void write_file(const std::filesystem::path& path) const { binary::write_file(path, buf_); }

private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
public:
  Reader(std::vector<std::uint8_t> data, std::string what)
      : data_(std::move(data)), what_(std::move(what)) {}

  static Reader from_file(const std::filesystem::path& path, std::string what) {
    return Reader(read_file(path), std::move(what));
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  void expect_magic(std::string_view magic) {
    need(magic.size());
    if (std::memcmp(data_.data() + pos_, magic.data(), magic.size()) != 0) {
      fail(ErrorCode::MalformedFile, what_ + ": bad magic, expected \"" + std::string(magic) + "\"");
    }
    pos_ += magic.size();
  }

  template <class T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void need(std::size_t n) const {
    if (remaining() < n) {
      fail(ErrorCode::MalformedFile, what_ + ": truncated at byte " + std::to_string(pos_));
    }
  }

  /// Reads the trailing checksum, compares it with the bytes before it and
  /// requires that nothing follows.
  void verify_seal() {
    const std::uint64_t expected = fnv1a64(data_.data(), pos_);
    const auto stored = get<std::uint64_t>();
    if (stored != expected) {
      fail(ErrorCode::ChecksumMismatch, what_ + ": checksum mismatch");
    }
    if (remaining() != 0) {
      fail(ErrorCode::MalformedFile, what_ + ": trailing bytes after checksum");
    }
  }

  const std::string& what() const noexcept { return what_; }

private:
  std::vector<std::uint8_t> data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace gencs::binary
