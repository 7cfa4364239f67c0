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

#include <httplib.h>

#include "crag/rag.hpp"

// Client-side protocol driver. The trust rules are asymmetric and strict:
// nothing plaintext-bearing is transmitted before the server's attestation
// verifies against the trusted root and expected measurement, and no response
// is decrypted before its own attestation verifies and binds the ciphertext.

namespace crag {

struct ServerIdentity {
  Bytes pk_tee;
  AttestationReport report;
};

// Fetches and verifies the server's startup attestation. The report must be
// root-endorsed, carry the expected measurement, and bind the advertised
// pk_TEE in its report data; only then is the key trusted for encryption.
inline ServerIdentity fetch_verified_identity(httplib::Client& http, ByteView root_public,
                                              const Digest& expected_measurement) {
  auto res = http.Get("/v1/attestation");
  if (!res || res->status != 200)
    throw VerificationError("attestation endpoint unreachable or failed");
  nlohmann::json j = nlohmann::json::parse(res->body);
  ServerIdentity identity;
  identity.report = AttestationReport::from_hex(j.at("report").get<std::string>());
  identity.pk_tee = hex_decode(j.at("pk").get<std::string>());

  ReportVerdict verdict = verify_report(identity.report, root_public, expected_measurement);
  if (!verdict.accepted) {
    throw VerificationError(verdict.reason == ReportVerdict::Reason::bad_root_signature
                                ? "server attestation has an invalid root signature"
                                : "server attestation measurement mismatch");
  }
  if (identity.report.report_data != digest(identity.pk_tee))
    throw VerificationError("server attestation does not bind the advertised key");
  return identity;
}

struct ClientCredentials {
  std::string client_id;
  Bytes signing_secret;
};

// Full protocol round trip: verify the endpoint, encrypt the signed query to
// pk_TEE under a fresh response keypair, send, then verify and decrypt the
// response. Throws VerificationError before transmitting anything if the
// endpoint's attestation fails.
inline GeneratedResponse run_query(httplib::Client& http, const std::string& prompt,
                                   const std::optional<std::string>& private_context,
                                   const ClientCredentials& creds, ByteView root_public,
                                   const Digest& expected_measurement) {
  ServerIdentity identity = fetch_verified_identity(http, root_public, expected_measurement);

  KeyPair response_key = generate_keypair(KeyKind::Agreement);
  UserQuery query = make_user_query(prompt, private_context, response_key.public_key,
                                    creds.client_id, creds.signing_secret);
  EnvelopeCiphertext envelope = encrypt_query(identity.pk_tee, query);

  nlohmann::json body = {{"envelope", envelope.hex()}};
  auto res = http.Post("/v1/query", body.dump(), "application/json");
  if (!res) throw Error("query request failed to send");
  if (res->status == 401) throw AuthError("server rejected query authentication");
  if (res->status != 200)
    throw Error("query failed with status " + std::to_string(res->status));

  ResponseEnvelope response = ResponseEnvelope::from_json(nlohmann::json::parse(res->body));
  return open_response(response, response_key.secret_key, root_public, expected_measurement);
}

// Encrypts and submits one record. The record body is signed by the client
// and hybrid-encrypted to the verified pk_TEE; the contributor is the
// authenticated client.
inline RecordId submit_record(httplib::Client& http, const CommunityRecord& record,
                              const ClientCredentials& creds, ByteView root_public,
                              const Digest& expected_measurement) {
  ServerIdentity identity = fetch_verified_identity(http, root_public, expected_measurement);

  nlohmann::json body = {{"record_id", record.record_id},
                         {"text", record.text},
                         {"visibility", std::string(visibility_name(record.visibility))},
                         {"contributor", record.contributor},
                         {"client_id", creds.client_id}};
  std::string unsigned_body = body.dump();
  body["signature"] = sign(creds.signing_secret, digest(unsigned_body).view()).hex();

  EnvelopeCiphertext envelope =
      hybrid_encrypt(identity.pk_tee, as_bytes(body.dump()), as_bytes("crag/ingest/v1"));
  auto res = http.Post("/v1/records", nlohmann::json{{"envelope", envelope.hex()}}.dump(),
                       "application/json");
  if (!res) throw Error("record submission failed to send");
  if (res->status == 401) throw AuthError("server rejected record authentication");
  if (res->status != 200)
    throw Error("record submission failed with status " + std::to_string(res->status) +
                (res->body.empty() ? "" : ": " + res->body));
  return nlohmann::json::parse(res->body).at("record_id").get<RecordId>();
}

// Encrypts and submits a contributor update for an existing record.
inline std::uint64_t submit_update(httplib::Client& http, RecordId id,
                                   const std::string& new_text, const ClientCredentials& creds,
                                   ByteView root_public, const Digest& expected_measurement) {
  ServerIdentity identity = fetch_verified_identity(http, root_public, expected_measurement);

  nlohmann::json body = {
      {"record_id", id}, {"new_text", new_text}, {"client_id", creds.client_id}};
  std::string unsigned_body = body.dump();
  body["signature"] = sign(creds.signing_secret, digest(unsigned_body).view()).hex();

  EnvelopeCiphertext envelope =
      hybrid_encrypt(identity.pk_tee, as_bytes(body.dump()), as_bytes("crag/update/v1"));
  auto res = http.Post("/v1/records/" + std::to_string(id) + "/update",
                       nlohmann::json{{"envelope", envelope.hex()}}.dump(), "application/json");
  if (!res) throw Error("update failed to send");
  if (res->status == 401) throw AuthError("server rejected update authentication");
  if (res->status == 403) throw GovernanceError("update refused: " + res->body);
  if (res->status != 200)
    throw Error("update failed with status " + std::to_string(res->status));
  return nlohmann::json::parse(res->body).at("created_seq").get<std::uint64_t>();
}

}  // namespace crag
