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

#include <filesystem>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "crag/audit.hpp"
#include "crag/enclave.hpp"

// Registry of approved artifact measurements, and the deployment-drift check:
// given a live attestation report, decide whether the deployed measurement
// matches what the registry expects for that artifact name and version.
// Persisted as a JSON body followed by a digest footer line so casual file
// edits are detected on load.

namespace crag {

struct ArtifactRecord {
  std::string name;
  std::string version;
  Digest measurement;
  std::optional<Digest> eval_attestation_digest;
  std::uint64_t registered_seq = 0;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"name", name},
                        {"version", version},
                        {"measurement", measurement.hex()},
                        {"registered_seq", registered_seq}};
    if (eval_attestation_digest) j["eval_attestation_digest"] = eval_attestation_digest->hex();
    return j;
  }

  static ArtifactRecord from_json(const nlohmann::json& j) {
    ArtifactRecord r;
    r.name = j.at("name").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.measurement = Digest::from_hex(j.at("measurement").get<std::string>());
    if (j.contains("eval_attestation_digest"))
      r.eval_attestation_digest = Digest::from_hex(j.at("eval_attestation_digest").get<std::string>());
    r.registered_seq = j.at("registered_seq").get<std::uint64_t>();
    return r;
  }
};

enum class DriftStatus { Match, Drift, UnknownArtifact };

inline std::string_view drift_status_name(DriftStatus s) {
  switch (s) {
    case DriftStatus::Match: return "match";
    case DriftStatus::Drift: return "drift";
    case DriftStatus::UnknownArtifact: return "unknown";
  }
  throw Error("unknown drift status");
}

struct DriftVerdict {
  DriftStatus status = DriftStatus::UnknownArtifact;
  std::optional<Digest> expected;
  Digest observed;
};

class ArtifactRegistry {
 public:
  // Opens or creates the registry file. A present file must carry a valid
  // digest footer.
  explicit ArtifactRegistry(std::string path, AuditLog* audit = nullptr)
      : path_(std::move(path)), audit_(audit) {
    if (std::filesystem::exists(path_)) load();
  }

  // Registers an artifact measurement. A (name, version) pair is immutable:
  // re-registration, even with the same measurement, is refused.
  ArtifactRecord register_artifact(const std::string& name, const std::string& version,
                                   const Digest& measurement,
                                   std::optional<Digest> eval_digest = std::nullopt) {
    std::lock_guard lock(mu_);
    if (name.empty() || version.empty()) throw Error("artifact name and version required");
    for (const auto& a : artifacts_)
      if (a.name == name && a.version == version)
        throw Error("artifact already registered: " + name + "@" + version);
    ArtifactRecord rec{name, version, measurement, eval_digest, next_seq_++};
    artifacts_.push_back(rec);
    persist();
    if (audit_)
      audit_->append_event(EventKind::Ingest, "registry",
                           {digest(name + "@" + version), measurement});
    return rec;
  }

  std::optional<ArtifactRecord> lookup(const std::string& name, const std::string& version) const {
    std::lock_guard lock(mu_);
    for (const auto& a : artifacts_)
      if (a.name == name && a.version == version) return a;
    return std::nullopt;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return artifacts_.size();
  }

  // The drift check: verifies the report endorsement, then compares the
  // reported measurement against the registered one. An invalid root
  // signature is a verification failure, not a drift verdict; either way
  // exactly one drift-check audit event is left behind.
  DriftVerdict check_deployment(const std::string& name, const std::string& version,
                                const AttestationReport& report, ByteView root_public) const {
    bool signature_ok = verify(root_public, report.signed_portion(), report.root_signature);
    if (audit_)
      audit_->append_event(EventKind::DriftCheck, "registry",
                           {digest(name + "@" + version), report.measurement});
    if (!signature_ok)
      throw VerificationError("attestation report root signature invalid");

    DriftVerdict verdict;
    verdict.observed = report.measurement;
    std::optional<ArtifactRecord> rec = lookup(name, version);
    if (!rec) {
      verdict.status = DriftStatus::UnknownArtifact;
      return verdict;
    }
    verdict.expected = rec->measurement;
    verdict.status =
        rec->measurement == report.measurement ? DriftStatus::Match : DriftStatus::Drift;
    return verdict;
  }

  const std::string& path() const { return path_; }

 private:
  void persist() {
    std::string body = nlohmann::json{{"artifacts", artifacts_json()}}.dump();
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw Error("cannot write registry file: " + path_);
    out << body << '\n' << digest(body).hex() << '\n';
  }

  void load() {
    std::ifstream in(path_);
    if (!in) throw Error("cannot open registry file: " + path_);
    std::string body, footer;
    if (!std::getline(in, body) || !std::getline(in, footer))
      throw Error("registry file truncated: " + path_);
    if (digest(body).hex() != footer)
      throw VerificationError("registry file integrity footer mismatch");
    nlohmann::json j = nlohmann::json::parse(body);
    for (const auto& a : j.at("artifacts")) {
      artifacts_.push_back(ArtifactRecord::from_json(a));
      next_seq_ = std::max(next_seq_, artifacts_.back().registered_seq + 1);
    }
  }

  nlohmann::json artifacts_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : artifacts_) arr.push_back(a.to_json());
    return arr;
  }

  std::string path_;
  AuditLog* audit_;
  mutable std::mutex mu_;
  std::vector<ArtifactRecord> artifacts_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace crag
