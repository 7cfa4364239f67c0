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

// Frozen reference values computed by independent implementations
// (FIPS 180-4 test values, RFC 5869 appendix vectors, and an offline
// reference scorer). Tests compare library output against these
// constants rather than against the library itself.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "crag/embedding.hpp"
#include "crag/records.hpp"

namespace crag::test {

// --- SHA-256 (FIPS 180-4 published values) ---
inline constexpr const char* kSha256Empty =
    "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";
inline constexpr const char* kSha256Abc =
    "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";
inline constexpr const char* kSha256448Bit =  // "abcdbcde...nopq"
    "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1";

// --- FNV-1a 64 (reference values from the published parameter set) ---
inline constexpr std::uint64_t kFnvEmpty = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvA = 0xaf63dc4c8601ec8cull;

// --- RFC 5869 HKDF-SHA256 appendix A vectors ---
struct HkdfVector {
  const char* ikm_hex;
  const char* salt_hex;
  const char* info_hex;
  std::size_t out_len;
  const char* okm_hex;
};

inline constexpr HkdfVector kHkdfCase1{
    "0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b",
    "000102030405060708090a0b0c",
    "f0f1f2f3f4f5f6f7f8f9",
    42,
    "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf"
    "34007208d5b887185865"};

inline constexpr HkdfVector kHkdfCase3{
    "0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b",
    "",
    "",
    42,
    "8da4e775a563c18f715f802a063c5a31b8a11f5c5ee1879ec3454e5f3c738d2d"
    "9d201395faa4b61a96c8"};

// --- Embedding similarity fixtures (values frozen from an offline
// reference implementation of the same published hash/bucket scheme) ---
inline constexpr const char* kSimQuery = "patient blood pressure medication";
inline constexpr const char* kSimMedical =
    "the clinic adjusted the patient blood pressure medication dosage";
inline constexpr const char* kSimTax =
    "quarterly corporate tax filing deadlines were extended";
inline constexpr float kSimMedicalExpected = 0.594295f;
inline constexpr float kSimTaxExpected = 0.026261f;
inline constexpr float kSimTolerance = 1e-3f;

// --- Extractive generator fixture ---
// Prompt and context block with per-sentence overlap scores worked out
// by hand: sentence 1 scores 2 ("library", "online"), sentence 2
// scores 1 ("library"), sentence 3 scores 0.
inline constexpr const char* kGenPrompt = "renew library card online";
inline constexpr std::uint64_t kGenBlockId = 22;
inline constexpr const char* kGenBlockText =
    "Library cards can be renewed online. Visit the library desk with "
    "photo ID. A renewal takes five minutes.";
inline constexpr const char* kGenExpectedText =
    "Library cards can be renewed online. Visit the library desk with "
    "photo ID.";

// --- Independent top-k scorer over plaintext records ---
// Deliberately re-derives ranking with its own comparator and loop so
// store results are cross-checked against a second implementation.
struct OracleHit {
  RecordId record_id = 0;
  float score = 0.0f;
};

inline std::vector<OracleHit> reference_topk(const Embedder& embedder,
                                             const std::vector<CommunityRecord>& corpus,
                                             const std::string& query_text,
                                             std::size_t k,
                                             bool include_open,
                                             bool include_private) {
  const auto query = embedder.embed(query_text);
  std::vector<OracleHit> hits;
  for (const auto& record : corpus) {
    const bool is_private = record.visibility == Visibility::Private;
    if (is_private && !include_private) continue;
    if (!is_private && !include_open) continue;
    const auto emb = embedder.embed(record.text);
    float dot = 0.0f;
    for (std::size_t i = 0; i < emb.size(); ++i) dot += emb[i] * query[i];
    hits.push_back({record.record_id, dot});
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

// Distinctive markers that no fixture text or redaction rule touches;
// used for secret-leak sweeps over persisted artifacts.
inline std::string make_canary(std::size_t index) {
  static constexpr const char* kSuffixes[] = {
      "qzvxkw", "jmplrt", "hgydnc", "bwfsuo", "xkcqve", "rlzmga",
      "tnhypd", "vcjbks", "wmqfxe", "glpzru", "dykntc", "sbhvjo",
      "fqwxmz", "cprgle", "uvdskn", "ozjthy", "kxbmwq", "enrvgf",
      "ylcpds", "mhtuzj"};
  const std::size_t n = sizeof(kSuffixes) / sizeof(kSuffixes[0]);
  return "canaryt0ken" + std::to_string(index) + kSuffixes[index % n];
}

}  // namespace crag::test
