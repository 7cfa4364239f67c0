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

// Operator and client command line for the confidential RAG engine.
//
// Exit codes: 0 ok, 2 verification failure, 3 governance refusal,
// 4 startup error, 1 other errors.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "crag/crag.hpp"

namespace {

crag::Gateway* g_gateway = nullptr;

void handle_shutdown_signal(int) {
  if (g_gateway) g_gateway->stop();
}

// Expected-measurement sources for client-side verification: either an
// explicit hex digest or a (registry file, name, version) lookup.
struct ExpectArgs {
  std::string measurement_hex;
  std::string registry_path;
  std::string artifact_name;
  std::string artifact_version;

  crag::Digest resolve() const {
    if (!measurement_hex.empty()) return crag::Digest::from_hex(measurement_hex);
    if (registry_path.empty() || artifact_name.empty() || artifact_version.empty())
      throw crag::Error(
          "expected measurement required: --expect-measurement or --registry with "
          "--artifact-name/--artifact-version");
    crag::ArtifactRegistry registry(registry_path);
    auto rec = registry.lookup(artifact_name, artifact_version);
    if (!rec)
      throw crag::Error("artifact not in registry: " + artifact_name + "@" + artifact_version);
    return rec->measurement;
  }
};

void add_expect_options(CLI::App* cmd, ExpectArgs& args) {
  cmd->add_option("--expect-measurement", args.measurement_hex,
                  "Expected enclave measurement (hex)");
  cmd->add_option("--registry", args.registry_path, "Registry file to resolve the measurement");
  cmd->add_option("--artifact-name", args.artifact_name, "Registry artifact name");
  cmd->add_option("--artifact-version", args.artifact_version, "Registry artifact version");
}

crag::ClientCredentials load_credentials(const std::string& client_id,
                                         const std::string& key_path) {
  return {client_id,
          crag::read_hex_key_file(key_path, crypto_sign_SECRETKEYBYTES, "client signing key")};
}

int run(int argc, char** argv) {
  CLI::App app{"crag: confidential retrieval-augmented-generation engine"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the gateway service");
  std::string config_path = "crag.json";
  serve->add_option("--config", config_path, "Server config file (CRAG_CONFIG overrides)");

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Generate a keypair as hex files");
  std::string kg_kind = "signing";
  std::string kg_out = "key";
  keygen->add_option("--kind", kg_kind, "signing | agreement")
      ->check(CLI::IsMember({"signing", "agreement"}));
  keygen->add_option("--out", kg_out, "Output prefix; writes <out>.pub and <out>.key");

  // attest
  auto* attest = app.add_subcommand("attest", "Boot the enclave from config and print its attestation");
  std::string at_config = "crag.json";
  attest->add_option("--config", at_config, "Server config file");

  // export-pk
  auto* exportpk = app.add_subcommand("export-pk", "Boot the enclave from config and print pk_TEE");
  std::string ep_config = "crag.json";
  exportpk->add_option("--config", ep_config, "Server config file");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Encrypt and submit a record to a server");
  std::string in_server, in_client, in_key, in_root_pk, in_text, in_visibility = "private";
  std::uint64_t in_id = 0;
  ExpectArgs in_expect;
  ingest->add_option("--server", in_server, "Server base URL")->required();
  ingest->add_option("--client-id", in_client, "Registered client id")->required();
  ingest->add_option("--key", in_key, "Client signing secret key file")->required();
  ingest->add_option("--root-pk", in_root_pk, "Attestation root public key (hex)")->required();
  ingest->add_option("--id", in_id, "Record id")->required();
  ingest->add_option("--text", in_text, "Record text")->required();
  ingest->add_option("--visibility", in_visibility, "private | open")
      ->check(CLI::IsMember({"private", "open"}));
  add_expect_options(ingest, in_expect);

  // query
  auto* query = app.add_subcommand("query", "Run an end-to-end confidential query");
  std::string q_server, q_client, q_key, q_root_pk, q_prompt, q_context;
  ExpectArgs q_expect;
  query->add_option("--server", q_server, "Server base URL")->required();
  query->add_option("--client-id", q_client, "Registered client id")->required();
  query->add_option("--key", q_key, "Client signing secret key file")->required();
  query->add_option("--root-pk", q_root_pk, "Attestation root public key (hex)")->required();
  query->add_option("--context", q_context, "Optional private context");
  query->add_option("prompt", q_prompt, "Query prompt")->required();
  add_expect_options(query, q_expect);

  // audit-verify
  auto* audit_verify = app.add_subcommand("audit-verify", "Verify an audit log chain");
  std::string av_log, av_pk;
  audit_verify->add_option("log", av_log, "Audit log file (JSON lines)")->required();
  audit_verify->add_option("--enclave-pk", av_pk, "Enclave signing public key (hex)")->required();

  // registry
  auto* registry = app.add_subcommand("registry", "Artifact registry operations");
  registry->require_subcommand(1);
  auto* reg_register = registry->add_subcommand("register", "Register an artifact measurement");
  std::string rr_path, rr_name, rr_version, rr_measurement, rr_eval;
  reg_register->add_option("--registry", rr_path, "Registry file")->required();
  reg_register->add_option("name", rr_name, "Artifact name")->required();
  reg_register->add_option("version", rr_version, "Artifact version")->required();
  reg_register->add_option("--measurement", rr_measurement, "Measurement digest (hex)")->required();
  reg_register->add_option("--eval-digest", rr_eval, "Evaluation attestation digest (hex)");

  auto* reg_check = registry->add_subcommand("check", "Check a deployment against the registry");
  std::string rc_path, rc_name, rc_version, rc_report, rc_server, rc_root_pk;
  reg_check->add_option("--registry", rc_path, "Registry file")->required();
  reg_check->add_option("name", rc_name, "Artifact name")->required();
  reg_check->add_option("version", rc_version, "Artifact version")->required();
  reg_check->add_option("--report", rc_report, "Attestation report (hex)");
  reg_check->add_option("--server", rc_server, "Fetch the report from this server instead");
  reg_check->add_option("--root-pk", rc_root_pk, "Attestation root public key (hex)")->required();

  // govern
  auto* govern = app.add_subcommand("govern", "Threshold governance operations");
  govern->require_subcommand(1);
  auto* gov_propose = govern->add_subcommand("propose", "Create a proposal on the server");
  std::string gp_server, gp_operation;
  std::vector<std::string> gp_params;
  gov_propose->add_option("--server", gp_server, "Server base URL")->required();
  gov_propose->add_option("--operation", gp_operation,
                          "delete-record | extract-record | change-rules | rotate-policy")
      ->required();
  gov_propose->add_option("--param", gp_params, "Operation parameter key=value (repeatable)");

  auto* gov_approve = govern->add_subcommand("approve", "Sign and submit an approval");
  std::string ga_server, ga_proposal_json, ga_rep, ga_key;
  gov_approve->add_option("--server", ga_server, "Server base URL")->required();
  gov_approve->add_option("--proposal", ga_proposal_json, "Proposal JSON (from propose)")
      ->required();
  gov_approve->add_option("--rep-id", ga_rep, "Representative id")->required();
  gov_approve->add_option("--key", ga_key, "Representative signing secret key file")->required();

  auto* gov_execute = govern->add_subcommand("execute", "Execute a proposal past the threshold");
  std::string ge_server;
  std::uint64_t ge_proposal_id = 0;
  gov_execute->add_option("--server", ge_server, "Server base URL")->required();
  gov_execute->add_option("--proposal-id", ge_proposal_id, "Proposal id")->required();

  CLI11_PARSE(app, argc, argv);

  if (*serve) {
    crag::ServerConfig config;
    crag::Gateway* gateway = nullptr;
    try {
      config = crag::ServerConfig::load(crag::resolve_config_path(config_path));
      static crag::Gateway gw(config, &std::cerr);
      gateway = &gw;
    } catch (const std::exception& e) {
      std::cerr << "startup failed: " << e.what() << "\n";
      return crag::kExitStartupError;
    }
    g_gateway = gateway;
    std::signal(SIGTERM, handle_shutdown_signal);
    std::signal(SIGINT, handle_shutdown_signal);
    std::cout << "measurement " << gateway->measurement().hex() << "\n"
              << "pk " << crag::hex_encode(gateway->enclave().encryption_public_key()) << "\n"
              << std::flush;
    gateway->serve();
    return crag::kExitOk;
  }

  if (*keygen) {
    crag::KeyPair kp = crag::generate_keypair(
        kg_kind == "signing" ? crag::KeyKind::Signing : crag::KeyKind::Agreement);
    crag::write_hex_key_file(kg_out + ".pub", kp.public_key);
    crag::write_hex_key_file(kg_out + ".key", kp.secret_key);
    std::cout << "public " << crag::hex_encode(kp.public_key) << "\n";
    return crag::kExitOk;
  }

  if (*attest) {
    crag::ServerConfig config = crag::ServerConfig::load(crag::resolve_config_path(at_config));
    crag::Bytes device_secret = crag::read_hex_key_file(config.device_secret_path,
                                                        crag::kSymmetricKeySize, "device secret");
    crag::Enclave enclave = crag::boot_enclave(crag::kServerCodeIdentity,
                                               config.measurement_config(), device_secret);
    crag::Bytes root_secret = crag::read_hex_key_file(config.root_secret_path,
                                                      crypto_sign_SECRETKEYBYTES, "root secret");
    crag::AttestationReport report =
        enclave.attest(crag::digest(enclave.encryption_public_key()), root_secret);
    nlohmann::json out = {{"measurement", enclave.measurement().hex()},
                          {"pk", crag::hex_encode(enclave.encryption_public_key())},
                          {"signing_pk", crag::hex_encode(enclave.signing_public_key())},
                          {"report", report.hex()}};
    std::cout << out.dump(2) << "\n";
    return crag::kExitOk;
  }

  if (*exportpk) {
    crag::ServerConfig config = crag::ServerConfig::load(crag::resolve_config_path(ep_config));
    crag::Bytes device_secret = crag::read_hex_key_file(config.device_secret_path,
                                                        crag::kSymmetricKeySize, "device secret");
    crag::Enclave enclave = crag::boot_enclave(crag::kServerCodeIdentity,
                                               config.measurement_config(), device_secret);
    std::cout << crag::hex_encode(enclave.encryption_public_key()) << "\n";
    return crag::kExitOk;
  }

  if (*ingest) {
    httplib::Client http(in_server);
    crag::CommunityRecord record{in_id, in_text, crag::visibility_from_name(in_visibility),
                                 in_client};
    crag::RecordId id =
        crag::submit_record(http, record, load_credentials(in_client, in_key),
                            crag::hex_decode(in_root_pk), in_expect.resolve());
    std::cout << nlohmann::json{{"record_id", id}}.dump() << "\n";
    return crag::kExitOk;
  }

  if (*query) {
    httplib::Client http(q_server);
    std::optional<std::string> context;
    if (!q_context.empty()) context = q_context;
    crag::GeneratedResponse response =
        crag::run_query(http, q_prompt, context, load_credentials(q_client, q_key),
                        crag::hex_decode(q_root_pk), q_expect.resolve());
    nlohmann::json out = {{"text", response.text},
                          {"provenance", response.provenance},
                          {"generator", response.generator_id}};
    std::cout << out.dump(2) << "\n";
    return crag::kExitOk;
  }

  if (*audit_verify) {
    std::vector<crag::AuditEntry> entries = crag::load_audit_file(av_log);
    crag::ChainVerdict verdict = crag::verify_chain(entries, crag::hex_decode(av_pk));
    if (verdict.valid) {
      std::cout << "valid (" << entries.size() << " entries)\n";
      return crag::kExitOk;
    }
    std::cout << "invalid at seq " << *verdict.first_bad_seq << ": "
              << crag::chain_fault_name(*verdict.fault) << "\n";
    return crag::kExitVerificationFailure;
  }

  if (*reg_register) {
    crag::ArtifactRegistry reg(rr_path);
    std::optional<crag::Digest> eval;
    if (!rr_eval.empty()) eval = crag::Digest::from_hex(rr_eval);
    crag::ArtifactRecord rec = reg.register_artifact(
        rr_name, rr_version, crag::Digest::from_hex(rr_measurement), eval);
    std::cout << rec.to_json().dump(2) << "\n";
    return crag::kExitOk;
  }

  if (*reg_check) {
    crag::AttestationReport report;
    if (!rc_report.empty()) {
      report = crag::AttestationReport::from_hex(rc_report);
    } else if (!rc_server.empty()) {
      httplib::Client http(rc_server);
      auto res = http.Get("/v1/attestation");
      if (!res || res->status != 200)
        throw crag::VerificationError("cannot fetch attestation from " + rc_server);
      report = crag::AttestationReport::from_hex(
          nlohmann::json::parse(res->body).at("report").get<std::string>());
    } else {
      throw crag::Error("registry check needs --report or --server");
    }
    crag::ArtifactRegistry reg(rc_path);
    crag::DriftVerdict verdict =
        reg.check_deployment(rc_name, rc_version, report, crag::hex_decode(rc_root_pk));
    std::cout << crag::drift_status_name(verdict.status) << "\n";
    return verdict.status == crag::DriftStatus::Drift ? crag::kExitVerificationFailure
                                                      : crag::kExitOk;
  }

  if (*gov_propose) {
    nlohmann::json params = nlohmann::json::object();
    for (const std::string& kv : gp_params) {
      std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw crag::Error("--param expects key=value");
      params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    httplib::Client http(gp_server);
    auto res = http.Post("/v1/admin/propose",
                         nlohmann::json{{"operation", gp_operation}, {"params", params}}.dump(),
                         "application/json");
    if (!res) throw crag::Error("propose request failed");
    if (res->status == 403) throw crag::GovernanceError(res->body);
    if (res->status != 200) throw crag::Error("propose failed: " + res->body);
    std::cout << res->body << "\n";
    return crag::kExitOk;
  }

  if (*gov_approve) {
    crag::AdminProposal proposal =
        crag::AdminProposal::from_json(nlohmann::json::parse(ga_proposal_json));
    crag::Bytes rep_secret =
        crag::read_hex_key_file(ga_key, crypto_sign_SECRETKEYBYTES, "representative key");
    crag::Approval approval = crag::make_approval(proposal, ga_rep, rep_secret);
    httplib::Client http(ga_server);
    auto res = http.Post("/v1/admin/approve",
                         nlohmann::json{{"approval", approval.to_json()}}.dump(),
                         "application/json");
    if (!res) throw crag::Error("approve request failed");
    if (res->status == 403) throw crag::GovernanceError(res->body);
    if (res->status != 200) throw crag::Error("approve failed: " + res->body);
    std::cout << approval.to_json().dump() << "\n";
    return crag::kExitOk;
  }

  if (*gov_execute) {
    httplib::Client http(ge_server);
    auto res = http.Post("/v1/admin/execute",
                         nlohmann::json{{"proposal_id", ge_proposal_id}}.dump(),
                         "application/json");
    if (!res) throw crag::Error("execute request failed");
    if (res->status == 403) throw crag::GovernanceError(res->body);
    if (res->status != 200) throw crag::Error("execute failed: " + res->body);
    std::cout << res->body << "\n";
    return crag::kExitOk;
  }

  return crag::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const crag::GovernanceError& e) {
    std::cerr << "governance refusal: " << e.what() << "\n";
    return crag::kExitGovernanceRefusal;
  } catch (const crag::VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return crag::kExitVerificationFailure;
  } catch (const crag::AuthError& e) {
    std::cerr << "authentication failure: " << e.what() << "\n";
    return crag::kExitVerificationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
