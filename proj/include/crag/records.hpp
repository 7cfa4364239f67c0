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

#include "crag/crypto.hpp"

// Shared data model for community records and retrieval results.

namespace crag {

using RecordId = std::uint64_t;

// Private records hold sensitive community data and are redacted before any
// retrieval use; open records are member-visible and bypass redaction.
enum class Visibility : std::uint8_t { Open = 0, Private = 1 };

inline std::string_view visibility_name(Visibility v) {
  return v == Visibility::Open ? "open" : "private";
}

inline Visibility visibility_from_name(std::string_view name) {
  if (name == "open") return Visibility::Open;
  if (name == "private") return Visibility::Private;
  throw Error("unknown visibility: " + std::string(name));
}

struct CommunityRecord {
  RecordId record_id = 0;
  std::string text;
  Visibility visibility = Visibility::Open;
  std::string contributor;
};

// A scored search hit. The text field is populated only while execution is
// inside an enclave session; id+score pairs are what cross the boundary.
struct RetrievedChunk {
  RecordId record_id = 0;
  float score = 0.0f;
  std::string text;
};

struct SearchHit {
  RecordId record_id = 0;
  float score = 0.0f;

  bool operator==(const SearchHit&) const = default;
};

// Total order for search results: higher score first, record id breaking ties.
inline bool search_order(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.record_id < b.record_id;
}

inline Digest record_id_digest(RecordId id) {
  Bytes b;
  append_u64be(b, id);
  return digest(b);
}

}  // namespace crag
