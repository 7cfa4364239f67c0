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

#include <atomic>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include <json.hpp>

#include "crag/crypto.hpp"

// Threshold-approved administration: destructive or policy-changing
// operations execute only with t-of-n representative co-signatures. Each
// representative signs independently with a plain Ed25519 key; the service
// verifies t distinct signatures. True threshold signatures (single combined
// signature) would be a drop-in upgrade with identical authorization
// semantics.

namespace crag {

constexpr std::size_t kProposalNonceSize = 16;

enum class AdminOperation : std::uint8_t {
  DeleteRecord = 0,
  ExtractRecord = 1,
  ChangeRules = 2,
  RotatePolicy = 3,
};

inline std::string_view admin_operation_name(AdminOperation op) {
  switch (op) {
    case AdminOperation::DeleteRecord: return "delete-record";
    case AdminOperation::ExtractRecord: return "extract-record";
    case AdminOperation::ChangeRules: return "change-rules";
    case AdminOperation::RotatePolicy: return "rotate-policy";
  }
  throw Error("unknown admin operation");
}

inline AdminOperation admin_operation_from_name(std::string_view name) {
  if (name == "delete-record") return AdminOperation::DeleteRecord;
  if (name == "extract-record") return AdminOperation::ExtractRecord;
  if (name == "change-rules") return AdminOperation::ChangeRules;
  if (name == "rotate-policy") return AdminOperation::RotatePolicy;
  throw GovernanceError("unknown admin operation: " + std::string(name));
}

// Operation parameters as a flat string map. std::map keeps keys sorted,
// which the canonical encoding depends on.
using AdminParams = std::map<std::string, std::string>;

// Canonical encoding hashed into payload_digest: operation name then each
// key/value pair in key order, everything length-prefixed. Digest-stable
// across implementations.
inline Bytes canonical_params(AdminOperation op, const AdminParams& params) {
  Bytes b;
  append_lp(b, as_bytes(admin_operation_name(op)));
  append_u32be(b, static_cast<std::uint32_t>(params.size()));
  for (const auto& [k, v] : params) {
    append_lp(b, as_bytes(k));
    append_lp(b, as_bytes(v));
  }
  return b;
}

struct Representative {
  std::string rep_id;
  Bytes signing_public;
};

struct GovernancePolicy {
  std::vector<Representative> representatives;
  std::size_t threshold = 0;

  void validate() const {
    if (representatives.empty()) throw GovernanceError("policy has no representatives");
    if (threshold < 1 || threshold > representatives.size())
      throw GovernanceError("threshold must satisfy 1 <= t <= n");
    for (std::size_t i = 0; i < representatives.size(); ++i) {
      if (representatives[i].signing_public.size() != kPublicKeySize)
        throw GovernanceError("representative key must be 32 bytes");
      for (std::size_t j = i + 1; j < representatives.size(); ++j)
        if (representatives[i].rep_id == representatives[j].rep_id)
          throw GovernanceError("duplicate rep_id: " + representatives[i].rep_id);
    }
  }

  const Representative* find(std::string_view rep_id) const {
    for (const auto& r : representatives)
      if (r.rep_id == rep_id) return &r;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : representatives)
      reps.push_back({{"rep_id", r.rep_id}, {"public_key", hex_encode(r.signing_public)}});
    return {{"threshold", threshold}, {"representatives", reps}};
  }

  static GovernancePolicy from_json(const nlohmann::json& j) {
    GovernancePolicy p;
    p.threshold = j.at("threshold").get<std::size_t>();
    for (const auto& r : j.at("representatives"))
      p.representatives.push_back(
          {r.at("rep_id").get<std::string>(), hex_decode(r.at("public_key").get<std::string>())});
    p.validate();
    return p;
  }
};

inline GovernancePolicy load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open governance policy: " + path);
  return GovernancePolicy::from_json(nlohmann::json::parse(in));
}

inline void save_policy_file(const std::string& path, const GovernancePolicy& policy) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write governance policy: " + path);
  out << policy.to_json().dump(2) << '\n';
}

struct AdminProposal {
  std::uint64_t proposal_id = 0;
  AdminOperation operation = AdminOperation::DeleteRecord;
  Digest payload_digest;
  std::array<std::uint8_t, kProposalNonceSize> nonce{};
  std::uint64_t created_seq = 0;

  // The byte string each approval signs: proposal id, parameter digest, and
  // the proposal nonce, so approvals bind to exactly one proposal instance.
  Bytes approval_message() const {
    Bytes b;
    append_u64be(b, proposal_id);
    append_bytes(b, payload_digest.view());
    append_bytes(b, {nonce.data(), nonce.size()});
    return b;
  }

  nlohmann::json to_json() const {
    return {{"proposal_id", proposal_id},
            {"operation", std::string(admin_operation_name(operation))},
            {"payload_digest", payload_digest.hex()},
            {"nonce", hex_encode({nonce.data(), nonce.size()})},
            {"created_seq", created_seq}};
  }

  static AdminProposal from_json(const nlohmann::json& j) {
    AdminProposal p;
    p.proposal_id = j.at("proposal_id").get<std::uint64_t>();
    p.operation = admin_operation_from_name(j.at("operation").get<std::string>());
    p.payload_digest = Digest::from_hex(j.at("payload_digest").get<std::string>());
    Bytes n = hex_decode(j.at("nonce").get<std::string>());
    if (n.size() != kProposalNonceSize) throw Error("proposal nonce must be 16 bytes");
    std::memcpy(p.nonce.data(), n.data(), n.size());
    p.created_seq = j.at("created_seq").get<std::uint64_t>();
    return p;
  }
};

struct Approval {
  std::uint64_t proposal_id = 0;
  std::string rep_id;
  Signature signature;

  nlohmann::json to_json() const {
    return {{"proposal_id", proposal_id}, {"rep_id", rep_id}, {"signature", signature.hex()}};
  }

  static Approval from_json(const nlohmann::json& j) {
    Approval a;
    a.proposal_id = j.at("proposal_id").get<std::uint64_t>();
    a.rep_id = j.at("rep_id").get<std::string>();
    a.signature = Signature::from_hex(j.at("signature").get<std::string>());
    return a;
  }
};

// Signs an approval for a proposal. Standalone so representatives can approve
// offline and transport the approval as a file.
inline Approval make_approval(const AdminProposal& proposal, std::string_view rep_id,
                              ByteView rep_signing_secret) {
  Approval a;
  a.proposal_id = proposal.proposal_id;
  a.rep_id = std::string(rep_id);
  a.signature = sign(rep_signing_secret, proposal.approval_message());
  return a;
}

// Proof that a proposal passed the threshold gate. Gated operations consume
// the token exactly once; the consumed flag is shared across copies so a
// duplicated token cannot authorize two actions.
class ExecutedProposal {
 public:
  ExecutedProposal(AdminProposal proposal, AdminParams params)
      : proposal_(std::move(proposal)),
        params_(std::move(params)),
        consumed_(std::make_shared<std::atomic<bool>>(false)) {
    if (digest(canonical_params(proposal_.operation, params_)) != proposal_.payload_digest)
      throw GovernanceError("executed proposal params do not match payload digest");
  }

  const AdminProposal& proposal() const { return proposal_; }
  AdminOperation operation() const { return proposal_.operation; }
  const AdminParams& params() const { return params_; }

  std::string param(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end())
      throw GovernanceError("executed proposal missing param: " + key);
    return it->second;
  }

  // Marks the token used for the given operation. Throws if the operation
  // does not match or the token was already spent.
  void consume(AdminOperation expected) const {
    if (proposal_.operation != expected)
      throw GovernanceError("executed proposal authorizes a different operation");
    bool was = consumed_->exchange(true);
    if (was) throw GovernanceError("executed proposal token already used");
  }

 private:
  AdminProposal proposal_;
  AdminParams params_;
  std::shared_ptr<std::atomic<bool>> consumed_;
};

// In-memory book of proposals and their approvals. Mutations serialize under
// one lock; audit linkage is injected so the book stays independent of the
// log implementation.
class GovernanceBook {
 public:
  using AuditHook = std::function<void(std::string_view event, std::string_view actor,
                                       const Digest& subject)>;

  explicit GovernanceBook(GovernancePolicy policy, AuditHook audit = nullptr)
      : policy_(std::move(policy)), audit_(std::move(audit)) {
    policy_.validate();
  }

  const GovernancePolicy& policy() const { return policy_; }

  AdminProposal propose(AdminOperation operation, const AdminParams& params,
                        std::string_view proposer = "admin") {
    std::lock_guard lock(mu_);
    AdminProposal p;
    p.proposal_id = next_id_++;
    p.operation = operation;
    p.payload_digest = digest(canonical_params(operation, params));
    Bytes nonce = random_bytes(kProposalNonceSize);
    std::memcpy(p.nonce.data(), nonce.data(), nonce.size());
    p.created_seq = p.proposal_id;
    proposals_.push_back({p, params, {}, false});
    if (audit_) audit_("proposal", proposer, p.payload_digest);
    return p;
  }

  // Records an approval after checking the representative is registered, the
  // proposal exists, the signature verifies, and this rep has not yet
  // approved it.
  void record_approval(const Approval& approval) {
    std::lock_guard lock(mu_);
    Entry& entry = find_entry(approval.proposal_id);
    const Representative* rep = policy_.find(approval.rep_id);
    if (!rep) throw GovernanceError("unknown representative: " + approval.rep_id);
    if (!verify(rep->signing_public, entry.proposal.approval_message(), approval.signature))
      throw GovernanceError("approval signature invalid");
    for (const auto& a : entry.approvals)
      if (a.rep_id == approval.rep_id)
        throw GovernanceError("duplicate approval from " + approval.rep_id);
    entry.approvals.push_back(approval);
    if (audit_) audit_("approval", approval.rep_id, entry.proposal.payload_digest);
  }

  Approval approve(std::uint64_t proposal_id, std::string_view rep_id,
                   ByteView rep_signing_secret) {
    AdminProposal p = proposal(proposal_id);
    Approval a = make_approval(p, rep_id, rep_signing_secret);
    record_approval(a);
    return a;
  }

  // Threshold gate. Approvals with invalid signatures or unknown reps are
  // voided individually; duplicates count once. Succeeds iff the surviving
  // distinct set has at least t members and the proposal is unexecuted.
  ExecutedProposal execute(std::uint64_t proposal_id,
                           const std::vector<Approval>& approvals,
                           std::string_view executor = "admin") {
    std::lock_guard lock(mu_);
    Entry& entry = find_entry(proposal_id);
    if (entry.executed) throw GovernanceError("proposal already executed");

    std::vector<std::string> counted;
    for (const Approval& a : approvals) {
      if (a.proposal_id != proposal_id) continue;
      const Representative* rep = policy_.find(a.rep_id);
      if (!rep) continue;
      if (!verify(rep->signing_public, entry.proposal.approval_message(), a.signature)) continue;
      bool dup = false;
      for (const auto& c : counted)
        if (c == a.rep_id) { dup = true; break; }
      if (!dup) counted.push_back(a.rep_id);
    }
    if (counted.size() < policy_.threshold)
      throw GovernanceError("insufficient approvals: " + std::to_string(counted.size()) + " of " +
                            std::to_string(policy_.threshold) + " required");

    entry.executed = true;
    if (audit_) audit_("execution", executor, entry.proposal.payload_digest);
    return ExecutedProposal(entry.proposal, entry.params);
  }

  ExecutedProposal execute(std::uint64_t proposal_id, std::string_view executor = "admin") {
    std::vector<Approval> approvals;
    {
      std::lock_guard lock(mu_);
      approvals = find_entry(proposal_id).approvals;
    }
    return execute(proposal_id, approvals, executor);
  }

  AdminProposal proposal(std::uint64_t proposal_id) const {
    std::lock_guard lock(mu_);
    return const_cast<GovernanceBook*>(this)->find_entry(proposal_id).proposal;
  }

  AdminParams params_of(std::uint64_t proposal_id) const {
    std::lock_guard lock(mu_);
    return const_cast<GovernanceBook*>(this)->find_entry(proposal_id).params;
  }

 private:
  struct Entry {
    AdminProposal proposal;
    AdminParams params;
    std::vector<Approval> approvals;
    bool executed = false;
  };

  Entry& find_entry(std::uint64_t proposal_id) {
    for (auto& e : proposals_)
      if (e.proposal.proposal_id == proposal_id) return e;
    throw GovernanceError("unknown proposal: " + std::to_string(proposal_id));
  }

  GovernancePolicy policy_;
  AuditHook audit_;
  mutable std::mutex mu_;
  std::vector<Entry> proposals_;
  std::uint64_t next_id_ = 1;
};

}  // namespace crag
