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

#include <doctest.h>

#include "crag/governance.hpp"
#include "support/tmpdir.hpp"

using namespace crag;

namespace {

struct Council {
  std::vector<KeyPair> keys;
  GovernancePolicy policy;

  Council(std::size_t n, std::size_t t) {
    for (std::size_t i = 0; i < n; ++i) {
      keys.push_back(generate_keypair(KeyKind::Signing));
      policy.representatives.push_back({"rep-" + std::to_string(i), keys[i].public_key});
    }
    policy.threshold = t;
  }

  GovernanceBook book() const { return GovernanceBook(policy); }
};

const AdminParams kDeleteParams = {{"record_id", "7"}};

}  // namespace

TEST_CASE("policy validation") {
  Council c(3, 2);
  GovernancePolicy p = c.policy;
  p.validate();

  p.threshold = 0;
  CHECK_THROWS_AS(p.validate(), GovernanceError);
  p.threshold = 4;
  CHECK_THROWS_AS(p.validate(), GovernanceError);
  p.threshold = 2;
  p.representatives[1].rep_id = "rep-0";
  CHECK_THROWS_AS(p.validate(), GovernanceError);

  GovernancePolicy empty;
  empty.threshold = 1;
  CHECK_THROWS_AS(empty.validate(), GovernanceError);
}

TEST_CASE("canonical parameter encoding is order independent and value sensitive") {
  AdminParams a = {{"record_id", "7"}, {"reason", "request"}};
  AdminParams b = {{"reason", "request"}, {"record_id", "7"}};
  CHECK(canonical_params(AdminOperation::DeleteRecord, a) ==
        canonical_params(AdminOperation::DeleteRecord, b));

  AdminParams changed = {{"record_id", "8"}, {"reason", "request"}};
  CHECK(canonical_params(AdminOperation::DeleteRecord, a) !=
        canonical_params(AdminOperation::DeleteRecord, changed));
  CHECK(canonical_params(AdminOperation::DeleteRecord, a) !=
        canonical_params(AdminOperation::ExtractRecord, a));
}

TEST_CASE("proposals bind the operation and parameters by digest") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  CHECK(p.payload_digest == digest(canonical_params(AdminOperation::DeleteRecord, kDeleteParams)));

  AdminProposal q = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  CHECK(q.proposal_id != p.proposal_id);
  CHECK(q.nonce != p.nonce);  // same payload, distinct instances
  CHECK(q.payload_digest == p.payload_digest);
}

TEST_CASE("operation names round trip and unknown names are refused") {
  for (auto op : {AdminOperation::DeleteRecord, AdminOperation::ExtractRecord,
                  AdminOperation::ChangeRules, AdminOperation::RotatePolicy}) {
    CHECK(admin_operation_from_name(admin_operation_name(op)) == op);
  }
  CHECK_THROWS_AS(admin_operation_from_name("drop-table"), GovernanceError);
}

TEST_CASE("approvals are checked at registration") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);

  book.approve(p.proposal_id, "rep-0", c.keys[0].secret_key);

  // Unknown representative.
  KeyPair stranger = generate_keypair(KeyKind::Signing);
  Approval fake = make_approval(p, "rep-9", stranger.secret_key);
  CHECK_THROWS_AS(book.record_approval(fake), GovernanceError);

  // Registered representative, wrong key.
  Approval forged = make_approval(p, "rep-1", stranger.secret_key);
  CHECK_THROWS_AS(book.record_approval(forged), GovernanceError);

  // Second approval from the same representative.
  CHECK_THROWS_AS(book.approve(p.proposal_id, "rep-0", c.keys[0].secret_key), GovernanceError);

  // Approval for a proposal that does not exist.
  Approval orphan = make_approval(p, "rep-1", c.keys[1].secret_key);
  orphan.proposal_id = 99;
  CHECK_THROWS_AS(book.record_approval(orphan), GovernanceError);
}

TEST_CASE("two of three threshold: every sufficient subset executes, none below") {
  Council c(3, 2);

  // Each single approval is insufficient.
  for (std::size_t i = 0; i < 3; ++i) {
    GovernanceBook book = c.book();
    AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
    book.approve(p.proposal_id, "rep-" + std::to_string(i), c.keys[i].secret_key);
    CHECK_THROWS_AS(book.execute(p.proposal_id), GovernanceError);
  }

  // Each two-subset suffices.
  const std::pair<std::size_t, std::size_t> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
  for (auto [i, j] : pairs) {
    GovernanceBook book = c.book();
    AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
    book.approve(p.proposal_id, "rep-" + std::to_string(i), c.keys[i].secret_key);
    book.approve(p.proposal_id, "rep-" + std::to_string(j), c.keys[j].secret_key);
    ExecutedProposal done = book.execute(p.proposal_id);
    CHECK(done.operation() == AdminOperation::DeleteRecord);
    CHECK(done.param("record_id") == "7");
  }
}

TEST_CASE("duplicate signatures from one representative count once") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  Approval a = make_approval(p, "rep-0", c.keys[0].secret_key);
  CHECK_THROWS_AS(book.execute(p.proposal_id, std::vector<Approval>{a, a, a}), GovernanceError);
}

TEST_CASE("invalid approvals are voided individually") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);

  KeyPair stranger = generate_keypair(KeyKind::Signing);
  Approval bad = make_approval(p, "rep-0", stranger.secret_key);  // wrong key
  Approval good1 = make_approval(p, "rep-1", c.keys[1].secret_key);
  Approval good2 = make_approval(p, "rep-2", c.keys[2].secret_key);

  // bad + good1 is one valid approval: refused.
  CHECK_THROWS_AS(book.execute(p.proposal_id, std::vector<Approval>{bad, good1}),
                  GovernanceError);
  // bad + good1 + good2 still has two valid approvals: executes.
  ExecutedProposal done = book.execute(p.proposal_id, {bad, good1, good2});
  CHECK(done.operation() == AdminOperation::DeleteRecord);
}

TEST_CASE("approvals bind to one proposal instance") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal first = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  AdminProposal second = book.propose(AdminOperation::DeleteRecord, kDeleteParams);

  // Signatures gathered for the first proposal, replayed against the second.
  Approval a0 = make_approval(first, "rep-0", c.keys[0].secret_key);
  Approval a1 = make_approval(first, "rep-1", c.keys[1].secret_key);
  a0.proposal_id = second.proposal_id;
  a1.proposal_id = second.proposal_id;
  // Same payload digest, but the nonce differs, so the signatures are void.
  CHECK_THROWS_AS(book.execute(second.proposal_id, std::vector<Approval>{a0, a1}),
                  GovernanceError);
}

TEST_CASE("a proposal executes at most once") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  Approval a0 = book.approve(p.proposal_id, "rep-0", c.keys[0].secret_key);
  Approval a1 = book.approve(p.proposal_id, "rep-1", c.keys[1].secret_key);
  book.execute(p.proposal_id);
  // Replaying the same approvals cannot execute it again.
  CHECK_THROWS_AS(book.execute(p.proposal_id, std::vector<Approval>{a0, a1}), GovernanceError);
}

TEST_CASE("executed proposal token is single shot and operation bound") {
  Council c(3, 2);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  book.approve(p.proposal_id, "rep-0", c.keys[0].secret_key);
  book.approve(p.proposal_id, "rep-1", c.keys[1].secret_key);
  ExecutedProposal token = book.execute(p.proposal_id);

  CHECK_THROWS_AS(token.consume(AdminOperation::ExtractRecord), GovernanceError);
  token.consume(AdminOperation::DeleteRecord);
  CHECK_THROWS_AS(token.consume(AdminOperation::DeleteRecord), GovernanceError);

  CHECK_THROWS_AS(token.param("missing"), GovernanceError);
}

TEST_CASE("executed proposal rejects parameters that do not match the digest") {
  Council c(1, 1);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams);
  AdminParams tampered = {{"record_id", "8"}};
  CHECK_THROWS_AS(ExecutedProposal(p, tampered), GovernanceError);
}

TEST_CASE("one of one policy works") {
  Council c(1, 1);
  GovernanceBook book = c.book();
  AdminProposal p = book.propose(AdminOperation::RotatePolicy, {{"policy", "v2"}});
  book.approve(p.proposal_id, "rep-0", c.keys[0].secret_key);
  ExecutedProposal done = book.execute(p.proposal_id);
  CHECK(done.operation() == AdminOperation::RotatePolicy);
}

TEST_CASE("audit hook sees proposal, approval, and execution") {
  Council c(3, 2);
  std::vector<std::string> events;
  GovernanceBook book(c.policy, [&](std::string_view event, std::string_view actor,
                                    const Digest&) {
    events.push_back(std::string(event) + ":" + std::string(actor));
  });
  AdminProposal p = book.propose(AdminOperation::DeleteRecord, kDeleteParams, "admin-1");
  book.approve(p.proposal_id, "rep-0", c.keys[0].secret_key);
  book.approve(p.proposal_id, "rep-2", c.keys[2].secret_key);
  book.execute(p.proposal_id, "admin-1");
  REQUIRE(events.size() == 4);
  CHECK(events[0] == "proposal:admin-1");
  CHECK(events[1] == "approval:rep-0");
  CHECK(events[2] == "approval:rep-2");
  CHECK(events[3] == "execution:admin-1");
}

TEST_CASE("policy file round trip") {
  Council c(3, 2);
  test::TempDir dir;
  std::string path = dir.file("policy.json");
  save_policy_file(path, c.policy);
  GovernancePolicy back = load_policy_file(path);
  back.validate();
  CHECK(back.threshold == 2);
  REQUIRE(back.representatives.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.representatives[i].rep_id == c.policy.representatives[i].rep_id);
    CHECK(back.representatives[i].signing_public == c.policy.representatives[i].signing_public);
  }
  CHECK_THROWS_AS(load_policy_file(dir.file("missing.json")), Error);
}
