// Copyright 2026 The crag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <sodium.h>

namespace crag {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Error taxonomy used across all modules. AuthError covers failed
// decryption/authentication, VerificationError failed attestation or chain
// checks, GovernanceError refused administrative actions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AuthError : Error {
  using Error::Error;
};
struct VerificationError : Error {
  using Error::Error;
};
struct GovernanceError : Error {
  using Error::Error;
};

inline void crypto_init() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error("libsodium initialization failed");
}

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline Bytes random_bytes(std::size_t n) {
  crypto_init();
  Bytes out(n);
  if (n > 0) randombytes_buf(out.data(), n);
  return out;
}

// Hex encoding for wire formats and persisted files.

inline std::string hex_encode(ByteView data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error("invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

// Big-endian integer helpers shared by every binary format in the project.

inline void append_u32be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_u64be(Bytes& out, std::uint64_t v) {
  append_u32be(out, static_cast<std::uint32_t>(v >> 32));
  append_u32be(out, static_cast<std::uint32_t>(v));
}

inline void append_bytes(Bytes& out, ByteView data) {
  out.insert(out.end(), data.begin(), data.end());
}

// Length-prefixed field: u32 big-endian size followed by the raw bytes.
inline void append_lp(Bytes& out, ByteView data) {
  append_u32be(out, static_cast<std::uint32_t>(data.size()));
  append_bytes(out, data);
}

inline void append_lp(Bytes& out, std::string_view s) { append_lp(out, as_bytes(s)); }

// Bounds-checked cursor over a byte buffer; every parser in the project
// reads through one of these so truncated input fails cleanly.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  std::uint32_t u32be() {
    need(4);
    std::uint32_t v = (static_cast<std::uint32_t>(data_[pos_]) << 24) |
                      (static_cast<std::uint32_t>(data_[pos_ + 1]) << 16) |
                      (static_cast<std::uint32_t>(data_[pos_ + 2]) << 8) |
                      static_cast<std::uint32_t>(data_[pos_ + 3]);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64be() {
    std::uint64_t hi = u32be();
    return (hi << 32) | u32be();
  }

  ByteView take(std::size_t n) {
    need(n);
    ByteView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }

  Bytes take_copy(std::size_t n) {
    ByteView v = take(n);
    return Bytes(v.begin(), v.end());
  }

  Bytes take_lp() { return take_copy(u32be()); }

  std::string take_lp_string() {
    Bytes b = take_lp();
    return to_string(b);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw Error("truncated input");
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace crag
