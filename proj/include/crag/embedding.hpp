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

#include <cctype>
#include <cmath>

#include "crag/common.hpp"

// Deterministic lexical embedder: hashed character trigrams with signed
// buckets, L2-normalized. It runs inside the trust boundary (query plaintext
// is its input), so it is deliberately tiny and allocation-light. Equal text
// always embeds to the identical vector, a property the store's audit and
// dedup paths rely on.

namespace crag {

constexpr std::size_t kDefaultEmbeddingDim = 64;

constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(ByteView data) {
  std::uint64_t h = kFnvOffsetBasis;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(as_bytes(s)); }

// Lowercases ASCII letters and collapses runs of whitespace to single spaces,
// trimming the ends. Text that differs only in case or spacing embeds
// identically.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (uc >= 'A' && uc <= 'Z') uc = static_cast<unsigned char>(uc + 32);
    out.push_back(static_cast<char>(uc));
  }
  return out;
}

class Embedder {
 public:
  explicit Embedder(std::size_t dim = kDefaultEmbeddingDim) : dim_(dim) {
    if (dim_ == 0) throw Error("embedding dimension must be positive");
  }

  std::size_t dim() const { return dim_; }

  // Embeds text as signed hashed trigrams. Each trigram's hash contributes
  // +-1 (low bit) to one bucket (remaining bits mod dim); the bucket index
  // must not reuse the sign bit or bucket and sign would correlate.
  std::vector<float> embed(std::string_view text) const {
    std::string t = normalize_text(text);
    if (t.empty()) throw Error("cannot embed empty text");

    std::vector<float> v(dim_, 0.0f);
    auto add_gram = [&](std::string_view gram) {
      std::uint64_t h = fnv1a64(gram);
      float sign = (h & 1u) ? 1.0f : -1.0f;
      v[(h >> 1) % dim_] += sign;
    };
    if (t.size() < 3) {
      add_gram(t);
    } else {
      for (std::size_t i = 0; i + 3 <= t.size(); ++i) add_gram(std::string_view(t).substr(i, 3));
    }

    double norm_sq = 0.0;
    for (float x : v) norm_sq += static_cast<double>(x) * x;
    if (norm_sq == 0.0) throw Error("text embeds to the zero vector");
    float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
    for (float& x : v) x *= inv;
    return v;
  }

 private:
  std::size_t dim_;
};

// Cosine similarity of two unit vectors is their dot product; the embedder
// always returns unit vectors, so no renormalization happens here.
inline float cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw Error("vector dimensions differ");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
  return static_cast<float>(dot);
}

inline Bytes embedding_to_bytes(const std::vector<float>& v) {
  Bytes out;
  out.reserve(4 + v.size() * 4);
  append_u32be(out, static_cast<std::uint32_t>(v.size()));
  for (float x : v) {
    std::uint32_t u;
    std::memcpy(&u, &x, 4);
    append_u32be(out, u);
  }
  return out;
}

inline std::vector<float> embedding_from_bytes(ByteView raw) {
  ByteReader r(raw);
  std::uint32_t n = r.u32be();
  std::vector<float> v(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t u = r.u32be();
    std::memcpy(&v[i], &u, 4);
  }
  if (!r.done()) throw Error("trailing bytes after embedding");
  return v;
}

}  // namespace crag
