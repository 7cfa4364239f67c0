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

#include "crag/registry.hpp"
#include "support/tmpdir.hpp"

using namespace crag;

namespace {

struct RegistryFixture {
  test::TempDir dir;
  std::string path = dir.file("registry.json");
  KeyPair root = generate_keypair(KeyKind::Signing);
  Enclave enclave = boot_enclave("model-v1", to_bytes("cfg"), Bytes(kSymmetricKeySize, 0x44));

  AttestationReport report(const Enclave& e) const {
    return e.attest(digest("deployment"), root.secret_key);
  }
};

}  // namespace

TEST_CASE("register and look up an artifact") {
  RegistryFixture fx;
  ArtifactRegistry reg(fx.path);
  Digest eval = digest("evaluation summary 0.91");
  ArtifactRecord rec = reg.register_artifact("model", "1.0.0", fx.enclave.measurement(), eval);
  CHECK(rec.registered_seq == 0);

  auto found = reg.lookup("model", "1.0.0");
  REQUIRE(found.has_value());
  CHECK(found->measurement == fx.enclave.measurement());
  CHECK(found->eval_attestation_digest == eval);
  CHECK_FALSE(reg.lookup("model", "2.0.0").has_value());
  CHECK_FALSE(reg.lookup("other", "1.0.0").has_value());
}

TEST_CASE("registered artifacts are immutable") {
  RegistryFixture fx;
  ArtifactRegistry reg(fx.path);
  reg.register_artifact("model", "1.0.0", fx.enclave.measurement());
  // Re-registration is refused even with the identical measurement.
  CHECK_THROWS_AS(reg.register_artifact("model", "1.0.0", fx.enclave.measurement()), Error);
  CHECK_THROWS_AS(reg.register_artifact("model", "1.0.0", digest("other")), Error);
  CHECK(reg.size() == 1);
  // A new version is a new artifact.
  reg.register_artifact("model", "1.0.1", digest("other"));
  CHECK(reg.size() == 2);
}

TEST_CASE("registration requires name and version") {
  RegistryFixture fx;
  ArtifactRegistry reg(fx.path);
  CHECK_THROWS_AS(reg.register_artifact("", "1.0.0", digest("m")), Error);
  CHECK_THROWS_AS(reg.register_artifact("model", "", digest("m")), Error);
}

TEST_CASE("drift check covers every registry and signature combination") {
  RegistryFixture fx;
  ArtifactRegistry reg(fx.path);
  reg.register_artifact("model", "1.0.0", fx.enclave.measurement());

  AttestationReport honest = fx.report(fx.enclave);

  // Valid signature, registered, matching measurement.
  DriftVerdict match = reg.check_deployment("model", "1.0.0", honest, fx.root.public_key);
  CHECK(match.status == DriftStatus::Match);
  CHECK(match.expected == fx.enclave.measurement());
  CHECK(match.observed == fx.enclave.measurement());

  // Valid signature, registered, different measurement: drift.
  Enclave drifted = boot_enclave("model-v1-patched", to_bytes("cfg"),
                                 Bytes(kSymmetricKeySize, 0x44));
  DriftVerdict drift =
      reg.check_deployment("model", "1.0.0", fx.report(drifted), fx.root.public_key);
  CHECK(drift.status == DriftStatus::Drift);
  CHECK(drift.expected == fx.enclave.measurement());
  CHECK(drift.observed == drifted.measurement());

  // Valid signature, artifact not registered.
  DriftVerdict unknown = reg.check_deployment("ghost", "9.9.9", honest, fx.root.public_key);
  CHECK(unknown.status == DriftStatus::UnknownArtifact);
  CHECK_FALSE(unknown.expected.has_value());

  // Invalid root signature: a verification failure in all three registry
  // states, never a drift verdict.
  AttestationReport forged = honest;
  forged.measurement = digest("tampered");
  CHECK_THROWS_AS(reg.check_deployment("model", "1.0.0", forged, fx.root.public_key),
                  VerificationError);
  CHECK_THROWS_AS(reg.check_deployment("ghost", "9.9.9", forged, fx.root.public_key),
                  VerificationError);
  KeyPair wrong_root = generate_keypair(KeyKind::Signing);
  CHECK_THROWS_AS(reg.check_deployment("model", "1.0.0", honest, wrong_root.public_key),
                  VerificationError);
}

TEST_CASE("every drift check leaves exactly one audit event") {
  RegistryFixture fx;
  KeyPair logkey = generate_keypair(KeyKind::Signing);
  Bytes secret = logkey.secret_key;
  AuditLog audit(fx.dir.file("audit.jsonl"),
                 [secret](ByteView m) { return sign(secret, m); });
  ArtifactRegistry reg(fx.path, &audit);
  reg.register_artifact("model", "1.0.0", fx.enclave.measurement());

  AttestationReport honest = fx.report(fx.enclave);
  reg.check_deployment("model", "1.0.0", honest, fx.root.public_key);
  reg.check_deployment("ghost", "1.0.0", honest, fx.root.public_key);
  AttestationReport forged = honest;
  forged.report_data = digest("x");
  CHECK_THROWS_AS(reg.check_deployment("model", "1.0.0", forged, fx.root.public_key),
                  VerificationError);

  // Three checks, three drift-check events, even for the failed one.
  CHECK(audit.query_events({.kind = EventKind::DriftCheck}).size() == 3);
  CHECK(verify_chain(audit.query_events(), logkey.public_key).valid);
}

TEST_CASE("registry persists and reloads") {
  RegistryFixture fx;
  {
    ArtifactRegistry reg(fx.path);
    reg.register_artifact("model", "1.0.0", fx.enclave.measurement(), digest("eval"));
    reg.register_artifact("index", "2.1.0", digest("other"));
  }
  ArtifactRegistry back(fx.path);
  CHECK(back.size() == 2);
  auto rec = back.lookup("model", "1.0.0");
  REQUIRE(rec.has_value());
  CHECK(rec->measurement == fx.enclave.measurement());
  CHECK(rec->eval_attestation_digest == digest("eval"));
  CHECK(back.lookup("index", "2.1.0")->registered_seq == 1);
  // Sequence numbering continues after reload.
  CHECK(back.register_artifact("model", "1.1.0", digest("next")).registered_seq == 2);
}

TEST_CASE("a tampered registry file is rejected on load") {
  RegistryFixture fx;
  {
    ArtifactRegistry reg(fx.path);
    reg.register_artifact("model", "1.0.0", fx.enclave.measurement());
  }
  std::string raw = test::read_file(fx.path);
  std::size_t pos = raw.find("1.0.0");
  REQUIRE(pos != std::string::npos);
  raw.replace(pos, 5, "1.0.9");
  fx.dir.write_file("registry.json", raw);
  CHECK_THROWS_AS(ArtifactRegistry(fx.path), VerificationError);
}

TEST_CASE("a truncated registry footer is rejected") {
  RegistryFixture fx;
  {
    ArtifactRegistry reg(fx.path);
    reg.register_artifact("model", "1.0.0", fx.enclave.measurement());
  }
  std::string raw = test::read_file(fx.path);
  fx.dir.write_file("registry.json", raw.substr(0, raw.size() - 10));
  CHECK_THROWS_AS(ArtifactRegistry(fx.path), Error);
}
