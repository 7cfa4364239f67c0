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

#include <chrono>
#include <fstream>
#include <functional>
#include <mutex>

#include <json.hpp>

#include "crag/crypto.hpp"

// Hash-chained, enclave-signed audit log. Entries carry digests only: the
// subject field is Digest-typed so raw text structurally cannot enter the
// chain, and the actor field is gated to a short identifier alphabet. The
// file format is JSON Lines with hex-encoded binary fields.

namespace crag {

enum class EventKind : std::uint8_t {
  Ingest = 0,
  QueryReceived = 1,
  Retrieval = 2,
  Response = 3,
  Update = 4,
  Delete = 5,
  Proposal = 6,
  Approval = 7,
  Execution = 8,
  AuthFailure = 9,
  DriftCheck = 10,
};

inline std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Ingest: return "ingest";
    case EventKind::QueryReceived: return "query-received";
    case EventKind::Retrieval: return "retrieval";
    case EventKind::Response: return "response";
    case EventKind::Update: return "update";
    case EventKind::Delete: return "delete";
    case EventKind::Proposal: return "proposal";
    case EventKind::Approval: return "approval";
    case EventKind::Execution: return "execution";
    case EventKind::AuthFailure: return "auth-failure";
    case EventKind::DriftCheck: return "drift-check";
  }
  throw Error("unknown event kind");
}

inline EventKind event_kind_from_name(std::string_view name) {
  for (std::uint8_t i = 0; i <= 10; ++i) {
    EventKind k = static_cast<EventKind>(i);
    if (event_kind_name(k) == name) return k;
  }
  throw Error("unknown event kind: " + std::string(name));
}

struct AuditEntry {
  std::uint64_t seq = 0;
  Digest prev_digest;
  EventKind event_kind = EventKind::Ingest;
  std::string actor;
  std::vector<Digest> subject_digests;
  std::uint64_t timestamp_ms = 0;
  Digest entry_digest;
  Signature signature;

  // Canonical byte form covered by entry_digest: every field above the
  // digest, fixed-width integers big-endian, strings length-prefixed.
  Bytes canonical_bytes() const {
    Bytes b;
    append_u64be(b, seq);
    append_bytes(b, prev_digest.view());
    b.push_back(static_cast<std::uint8_t>(event_kind));
    append_lp(b, as_bytes(actor));
    append_u32be(b, static_cast<std::uint32_t>(subject_digests.size()));
    for (const Digest& d : subject_digests) append_bytes(b, d.view());
    append_u64be(b, timestamp_ms);
    return b;
  }

  nlohmann::json to_json() const {
    nlohmann::json subjects = nlohmann::json::array();
    for (const Digest& d : subject_digests) subjects.push_back(d.hex());
    return {
        {"seq", seq},
        {"prev", prev_digest.hex()},
        {"kind", std::string(event_kind_name(event_kind))},
        {"actor", actor},
        {"subjects", subjects},
        {"ts", timestamp_ms},
        {"digest", entry_digest.hex()},
        {"sig", signature.hex()},
    };
  }

  static AuditEntry from_json(const nlohmann::json& j) {
    AuditEntry e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.prev_digest = Digest::from_hex(j.at("prev").get<std::string>());
    e.event_kind = event_kind_from_name(j.at("kind").get<std::string>());
    e.actor = j.at("actor").get<std::string>();
    for (const auto& s : j.at("subjects")) e.subject_digests.push_back(Digest::from_hex(s.get<std::string>()));
    e.timestamp_ms = j.at("ts").get<std::uint64_t>();
    e.entry_digest = Digest::from_hex(j.at("digest").get<std::string>());
    e.signature = Signature::from_hex(j.at("sig").get<std::string>());
    return e;
  }
};

enum class ChainFault { digest_mismatch, link_mismatch, bad_signature, seq_gap };

inline std::string_view chain_fault_name(ChainFault f) {
  switch (f) {
    case ChainFault::digest_mismatch: return "digest-mismatch";
    case ChainFault::link_mismatch: return "link-mismatch";
    case ChainFault::bad_signature: return "bad-signature";
    case ChainFault::seq_gap: return "seq-gap";
  }
  throw Error("unknown chain fault");
}

struct ChainVerdict {
  bool valid = true;
  std::optional<std::uint64_t> first_bad_seq;
  std::optional<ChainFault> fault;
};

// Verifies the full chain: seq continuity, digest recomputation, prev
// linkage, and signature, in that order per entry. first_bad_seq is the
// expected sequence number at the earliest failing position, so a mutation
// at index i (byte flip, splice, reorder) is reported at i.
inline ChainVerdict verify_chain(const std::vector<AuditEntry>& entries,
                                 ByteView enclave_signing_public) {
  Digest prev = Digest::zero();
  for (std::uint64_t i = 0; i < entries.size(); ++i) {
    const AuditEntry& e = entries[static_cast<std::size_t>(i)];
    if (e.seq != i) return {false, i, ChainFault::seq_gap};
    if (digest(e.canonical_bytes()) != e.entry_digest)
      return {false, i, ChainFault::digest_mismatch};
    if (e.prev_digest != prev) return {false, i, ChainFault::link_mismatch};
    if (!verify(enclave_signing_public, e.entry_digest.view(), e.signature))
      return {false, i, ChainFault::bad_signature};
    prev = e.entry_digest;
  }
  return {true, std::nullopt, std::nullopt};
}

// Actors are short machine identifiers, never free text; this gate is what
// keeps prose (and canaries) out of the only string field in the chain.
inline bool valid_actor_id(std::string_view actor) {
  if (actor.empty() || actor.size() > 64) return false;
  for (char c : actor) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '.' || c == '_' || c == ':' || c == '-';
    if (!ok) return false;
  }
  return true;
}

struct EventFilter {
  std::optional<EventKind> kind;
  std::optional<std::string> actor;
  std::optional<Digest> subject;
  std::optional<std::uint64_t> seq_min;
  std::optional<std::uint64_t> seq_max;

  bool matches(const AuditEntry& e) const {
    if (kind && e.event_kind != *kind) return false;
    if (actor && e.actor != *actor) return false;
    if (seq_min && e.seq < *seq_min) return false;
    if (seq_max && e.seq > *seq_max) return false;
    if (subject) {
      bool found = false;
      for (const Digest& d : e.subject_digests)
        if (d == *subject) { found = true; break; }
      if (!found) return false;
    }
    return true;
  }
};

inline std::vector<AuditEntry> parse_audit_lines(std::istream& in) {
  std::vector<AuditEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    entries.push_back(AuditEntry::from_json(nlohmann::json::parse(line)));
  }
  return entries;
}

inline std::vector<AuditEntry> load_audit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open audit log: " + path);
  return parse_audit_lines(in);
}

// Append-only log bound to an enclave signing key through an injected signer
// callback. Appends serialize through one mutex, giving the strict total
// order the chain requires; reads copy a snapshot.
class AuditLog {
 public:
  using Signer = std::function<Signature(ByteView)>;

  // Opens or creates the log file. An existing file is loaded and its tail
  // becomes the chain head, so a restarted service continues the same chain.
  AuditLog(std::string path, Signer signer) : path_(std::move(path)), signer_(std::move(signer)) {
    if (!signer_) throw Error("audit log requires a signer");
    std::ifstream in(path_);
    if (in) entries_ = parse_audit_lines(in);
    out_.open(path_, std::ios::app);
    if (!out_) throw Error("cannot open audit log for append: " + path_);
  }

  AuditEntry append_event(EventKind kind, std::string_view actor,
                          std::vector<Digest> subject_digests) {
    if (!valid_actor_id(actor))
      throw Error("audit actor must be a short identifier");
    std::lock_guard lock(mu_);
    AuditEntry e;
    e.seq = entries_.size();
    e.prev_digest = entries_.empty() ? Digest::zero() : entries_.back().entry_digest;
    e.event_kind = kind;
    e.actor = std::string(actor);
    e.subject_digests = std::move(subject_digests);
    e.timestamp_ms = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    e.entry_digest = digest(e.canonical_bytes());
    e.signature = signer_(e.entry_digest.view());
    out_ << e.to_json().dump() << '\n';
    out_.flush();
    entries_.push_back(e);
    return e;
  }

  std::vector<AuditEntry> query_events(const EventFilter& filter = {}) const {
    std::lock_guard lock(mu_);
    std::vector<AuditEntry> out;
    for (const AuditEntry& e : entries_)
      if (filter.matches(e)) out.push_back(e);
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  std::vector<AuditEntry> snapshot() const { return query_events(); }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  Signer signer_;
  mutable std::mutex mu_;
  std::vector<AuditEntry> entries_;
  std::ofstream out_;
};

}  // namespace crag
