// Copyright 2026 the graphguard authors
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

#ifndef GRAPHGUARD_BYTES_HPP_
#define GRAPHGUARD_BYTES_HPP_

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphguard {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

/// Base class for every error this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class Endian { big, little };

/// Thrown when a reader runs off the end of its buffer.
class Truncated : public Error {
 public:
  explicit Truncated(const std::string& what) : Error(what) {}
};

/// Bounds-checked sequential reader over a byte span. Does not own the data.
class ByteReader {
 public:
  explicit ByteReader(BytesView data) : data_(data) {}

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  uint16_t u16(Endian e) {
    need(2);
    uint16_t v;
    if (e == Endian::big) {
      v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    } else {
      v = static_cast<uint16_t>(data_[pos_ + 1] << 8 | data_[pos_]);
    }
    pos_ += 2;
    return v;
  }

  uint32_t u32(Endian e) {
    need(4);
    uint32_t v = 0;
    if (e == Endian::big) {
      for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
    } else {
      for (int i = 3; i >= 0; --i) v = v << 8 | data_[pos_ + i];
    }
    pos_ += 4;
    return v;
  }

  uint64_t u64(Endian e) {
    uint64_t hi, lo;
    if (e == Endian::big) {
      hi = u32(e);
      lo = u32(e);
    } else {
      lo = u32(e);
      hi = u32(e);
    }
    return hi << 32 | lo;
  }

  /// Copies out exactly n bytes.
  Bytes bytes(size_t n) {
    need(n);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }

  BytesView view(size_t n) {
    need(n);
    BytesView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  BytesView rest() { return view(remaining()); }

  void skip(size_t n) {
    need(n);
    pos_ += n;
  }

  /// Advances to the next multiple of `alignment` relative to offset 0.
  void align(size_t alignment) {
    size_t rem = pos_ % alignment;
    if (rem != 0) skip(alignment - rem);
  }

 private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Truncated("input truncated: need " + std::to_string(n) +
                      " bytes at offset " + std::to_string(pos_));
    }
  }

  BytesView data_;
  size_t pos_ = 0;
};

/// Append-only byte buffer with explicit-endian integer writers.
class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }

  void u16(uint16_t v, Endian e) {
    if (e == Endian::big) {
      out_.push_back(static_cast<uint8_t>(v >> 8));
      out_.push_back(static_cast<uint8_t>(v));
    } else {
      out_.push_back(static_cast<uint8_t>(v));
      out_.push_back(static_cast<uint8_t>(v >> 8));
    }
  }

  void u32(uint32_t v, Endian e) {
    if (e == Endian::big) {
      u16(static_cast<uint16_t>(v >> 16), e);
      u16(static_cast<uint16_t>(v), e);
    } else {
      u16(static_cast<uint16_t>(v), e);
      u16(static_cast<uint16_t>(v >> 16), e);
    }
  }

  void u64(uint64_t v, Endian e) {
    if (e == Endian::big) {
      u32(static_cast<uint32_t>(v >> 32), e);
      u32(static_cast<uint32_t>(v), e);
    } else {
      u32(static_cast<uint32_t>(v), e);
      u32(static_cast<uint32_t>(v >> 32), e);
    }
  }

  void bytes(BytesView b) { out_.insert(out_.end(), b.begin(), b.end()); }

  void pad_to(size_t alignment, uint8_t fill = 0) {
    while (out_.size() % alignment != 0) out_.push_back(fill);
  }

  size_t size() const { return out_.size(); }
  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

inline std::string to_hex(BytesView data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

/// Parses a hex string (whitespace ignored) into bytes.
inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int hi = -1;
  for (char c : hex) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
    int n = nibble(c);
    if (n < 0) throw Error(std::string("invalid hex character: ") + c);
    if (hi < 0) {
      hi = n;
    } else {
      out.push_back(static_cast<uint8_t>(hi << 4 | n));
      hi = -1;
    }
  }
  if (hi >= 0) throw Error("odd-length hex string");
  return out;
}

}  // namespace graphguard

#endif  // GRAPHGUARD_BYTES_HPP_
