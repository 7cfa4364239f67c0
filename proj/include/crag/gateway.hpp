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

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "crag/rag.hpp"
#include "crag/registry.hpp"

// Service surface binding all modules: one process, one enclave identity,
// HTTP/1.1 + JSON with hex-encoded binary fields. Startup is fail-fast; every
// failure names the subsystem that refused to come up.

namespace crag {

constexpr std::string_view kServerCodeIdentity = "crag-enclave/1.0.0";
constexpr std::string_view kServerArtifactName = "crag-enclave";
constexpr std::string_view kServerArtifactVersion = "1.0.0";

// Exit codes shared by the CLI and integration tests.
constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 2;
constexpr int kExitGovernanceRefusal = 3;
constexpr int kExitStartupError = 4;

struct ServerConfig {
  std::string listen_address = "127.0.0.1:8472";
  std::string store_path;
  std::string audit_log_path;
  std::string registry_path;
  std::string rules_path;
  std::string governance_policy_path;
  std::string clients_path;
  std::string device_secret_path;
  std::string root_public_key;  // hex, 32 bytes
  std::string root_secret_path;
  std::size_t k = 4;
  bool provenance = true;
  std::size_t embedding_dim = kDefaultEmbeddingDim;

  nlohmann::json to_json() const {
    return {{"listen_address", listen_address},
            {"store_path", store_path},
            {"audit_log_path", audit_log_path},
            {"registry_path", registry_path},
            {"rules_path", rules_path},
            {"governance_policy_path", governance_policy_path},
            {"clients_path", clients_path},
            {"device_secret_path", device_secret_path},
            {"root_public_key", root_public_key},
            {"root_secret_path", root_secret_path},
            {"k", k},
            {"provenance", provenance},
            {"embedding_dim", embedding_dim}};
  }

  static ServerConfig from_json(const nlohmann::json& j) {
    ServerConfig c;
    c.listen_address = j.value("listen_address", c.listen_address);
    c.store_path = j.at("store_path").get<std::string>();
    c.audit_log_path = j.at("audit_log_path").get<std::string>();
    c.registry_path = j.at("registry_path").get<std::string>();
    c.rules_path = j.at("rules_path").get<std::string>();
    c.governance_policy_path = j.value("governance_policy_path", std::string{});
    c.clients_path = j.at("clients_path").get<std::string>();
    c.device_secret_path = j.at("device_secret_path").get<std::string>();
    c.root_public_key = j.at("root_public_key").get<std::string>();
    c.root_secret_path = j.at("root_secret_path").get<std::string>();
    c.k = j.value("k", c.k);
    c.provenance = j.value("provenance", c.provenance);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    return c;
  }

  static ServerConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    return from_json(nlohmann::json::parse(in));
  }

  // The canonical configuration bytes folded into the enclave measurement:
  // retrieval-relevant settings only, serialized with sorted keys.
  Bytes measurement_config() const {
    nlohmann::json j = {{"dim", embedding_dim}, {"k", k}, {"provenance", provenance}};
    return to_bytes(j.dump());
  }
};

// CRAG_CONFIG, when set, overrides any config path given on the command line.
inline std::string resolve_config_path(const std::string& cli_path) {
  if (const char* env = std::getenv("CRAG_CONFIG"); env && *env) return env;
  return cli_path;
}

inline std::string_view client_scope_name(ClientScope s) {
  return s == ClientScope::Private ? "private" : "open";
}

inline ClientScope client_scope_from_name(std::string_view name) {
  if (name == "open") return ClientScope::Open;
  if (name == "private") return ClientScope::Private;
  throw Error("unknown client scope: " + std::string(name));
}

inline std::vector<ClientRegistration> load_clients_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open clients file: " + path);
  std::vector<ClientRegistration> clients;
  nlohmann::json j = nlohmann::json::parse(in);
  for (const auto& c : j) {
    ClientRegistration reg;
    reg.client_id = c.at("client_id").get<std::string>();
    reg.signing_public = hex_decode(c.at("signing_public").get<std::string>());
    reg.scope = client_scope_from_name(c.at("scope").get<std::string>());
    for (const auto& prior : clients)
      if (prior.client_id == reg.client_id)
        throw Error("duplicate client_id in clients file: " + reg.client_id);
    clients.push_back(std::move(reg));
  }
  return clients;
}

inline void save_clients_file(const std::string& path,
                              const std::vector<ClientRegistration>& clients) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : clients)
    arr.push_back({{"client_id", c.client_id},
                   {"signing_public", hex_encode(c.signing_public)},
                   {"scope", std::string(client_scope_name(c.scope))}});
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write clients file: " + path);
  out << arr.dump(2) << '\n';
}

// Reads a hex-encoded key file, enforcing the expected byte length.
inline Bytes read_hex_key_file(const std::string& path, std::size_t expected_len,
                               std::string_view what) {
  std::ifstream in(path);
  if (!in) throw Error(std::string(what) + " file unreadable: " + path);
  std::string hex;
  in >> hex;
  Bytes key = hex_decode(hex);
  if (key.size() != expected_len)
    throw Error(std::string(what) + " must be " + std::to_string(expected_len) + " bytes: " +
                path);
  return key;
}

inline void write_hex_key_file(const std::string& path, ByteView key) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write key file: " + path);
  out << hex_encode(key) << '\n';
}

class Gateway {
 public:
  // Boots the full service stack. Any failure throws with a message naming
  // the failing subsystem; the CLI maps that to the startup-error exit code.
  explicit Gateway(ServerConfig config, std::ostream* log = nullptr)
      : config_(std::move(config)),
        log_(log),
        enclave_(boot_gateway_enclave(config_)),
        root_public_(load_root_public(config_)),
        root_secret_(load_root_secret(config_, root_public_)) {
    audit_ = std::make_unique<AuditLog>(
        config_.audit_log_path,
        [this](ByteView msg) { return enclave_.sign(msg); });

    store_ = VectorStore::open_or_create(config_.store_path, config_.embedding_dim, enclave_,
                                         audit_.get());
    if (store_->dim() != config_.embedding_dim)
      throw Error("store: header dimension " + std::to_string(store_->dim()) +
                  " does not match configured dimension " +
                  std::to_string(config_.embedding_dim));

    registry_ = std::make_unique<ArtifactRegistry>(config_.registry_path, audit_.get());

    if (!std::filesystem::exists(config_.rules_path))
      save_rules_file(config_.rules_path, default_rule_pack());
    redactor_ = std::make_shared<const Redactor>(compile_rules(load_rules_file(config_.rules_path)));

    if (!std::filesystem::exists(config_.clients_path))
      save_clients_file(config_.clients_path, {});
    clients_ = load_clients_file(config_.clients_path);

    if (!config_.governance_policy_path.empty() &&
        std::filesystem::exists(config_.governance_policy_path)) {
      book_ = std::make_shared<GovernanceBook>(
          load_policy_file(config_.governance_policy_path),
          [this](std::string_view event, std::string_view actor, const Digest& subject) {
            audit_->append_event(event_kind_from_name(event), actor, {subject});
          });
    }

    rag_ = std::make_unique<RagService>(
        enclave_, *store_, *audit_, RagConfig{config_.k, config_.provenance},
        [this](std::string_view id) { return find_client(id); }, root_secret_);

    startup_report_ = enclave_.attest(digest(enclave_.encryption_public_key()), root_secret_);

    // Boot self-check doubles as the genesis audit entry on a fresh log.
    startup_verdict_ = registry_->check_deployment(std::string(kServerArtifactName),
                                                   std::string(kServerArtifactVersion),
                                                   startup_report_, root_public_);
    setup_routes();
  }

  ~Gateway() { stop(); }

  const Enclave& enclave() const { return enclave_; }
  const Digest& measurement() const { return enclave_.measurement(); }
  const AttestationReport& startup_attestation() const { return startup_report_; }
  const DriftVerdict& startup_verdict() const { return startup_verdict_; }
  AuditLog& audit() { return *audit_; }
  VectorStore& store() { return *store_; }
  ArtifactRegistry& registry() { return *registry_; }
  const ServerConfig& config() const { return config_; }
  int port() const { return port_; }

  // Blocking serve loop (CLI path). Binds per config and runs until stop().
  void serve() {
    bind();
    log_line("listening on " + config_host() + ":" + std::to_string(port_));
    server_.listen_after_bind();
  }

  // Background serve loop (test path). Returns once the socket is accepting.
  void start_async() {
    bind();
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    log_line("listening on " + config_host() + ":" + std::to_string(port_));
  }

  // Stops accepting and drains in-flight handlers. Audit and store writes
  // flush on every operation, so no tail is lost here.
  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  static Enclave boot_gateway_enclave(const ServerConfig& c) {
    Bytes device_secret = read_hex_key_file(c.device_secret_path, kSymmetricKeySize,
                                            "enclave: device secret");
    return boot_enclave(kServerCodeIdentity, c.measurement_config(), device_secret);
  }

  static Bytes load_root_public(const ServerConfig& c) {
    Bytes pk = hex_decode(c.root_public_key);
    if (pk.size() != kPublicKeySize) throw Error("attestation: root public key must be 32 bytes");
    return pk;
  }

  static Bytes load_root_secret(const ServerConfig& c, const Bytes& root_public) {
    Bytes sk = read_hex_key_file(c.root_secret_path, crypto_sign_SECRETKEYBYTES,
                                 "attestation: root secret");
    std::array<std::uint8_t, kPublicKeySize> derived;
    crypto_sign_ed25519_sk_to_pk(derived.data(), sk.data());
    if (!std::equal(derived.begin(), derived.end(), root_public.begin()))
      throw Error("attestation: root secret does not match configured root public key");
    return sk;
  }

  std::optional<ClientRegistration> find_client(std::string_view id) const {
    std::lock_guard lock(clients_mu_);
    for (const auto& c : clients_)
      if (c.client_id == id) return c;
    return std::nullopt;
  }

  std::shared_ptr<const Redactor> redactor_snapshot() const {
    std::lock_guard lock(redactor_mu_);
    return redactor_;
  }

  std::shared_ptr<GovernanceBook> book_snapshot() const {
    std::lock_guard lock(book_mu_);
    if (!book_) throw GovernanceError("governance is not configured on this deployment");
    return book_;
  }

  std::string config_host() const {
    std::size_t colon = config_.listen_address.rfind(':');
    return colon == std::string::npos ? config_.listen_address
                                      : config_.listen_address.substr(0, colon);
  }

  int config_port() const {
    std::size_t colon = config_.listen_address.rfind(':');
    if (colon == std::string::npos) return 0;
    return std::stoi(config_.listen_address.substr(colon + 1));
  }

  void bind() {
    std::string host = config_host();
    int port = config_port();
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
      if (port_ < 0) throw Error("gateway: cannot bind to " + host);
    } else {
      if (!server_.bind_to_port(host, port))
        throw Error("gateway: cannot bind to " + config_.listen_address);
      port_ = port;
    }
  }

  void log_line(const std::string& line) {
    if (log_) *log_ << "crag-gateway: " << line << '\n' << std::flush;
  }

  using Handler = std::function<nlohmann::json(const httplib::Request&)>;

  // Wraps a JSON handler with the error-to-status mapping shared by every
  // endpoint. Error text is operational only; payload plaintext never
  // reaches an error message.
  void route_post(const std::string& pattern, Handler h) {
    server_.Post(pattern, make_handler(std::move(h)));
  }
  void route_get(const std::string& pattern, Handler h) {
    server_.Get(pattern, make_handler(std::move(h)));
  }

  httplib::Server::Handler make_handler(Handler h) {
    return [this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      int status = 200;
      nlohmann::json body;
      try {
        body = h(req);
      } catch (const AuthError& e) {
        status = 401;
        body = {{"error", e.what()}};
      } catch (const GovernanceError& e) {
        status = 403;
        body = {{"error", e.what()}};
      } catch (const VerificationError& e) {
        status = 400;
        body = {{"error", e.what()}};
      } catch (const Error& e) {
        status = 400;
        body = {{"error", e.what()}};
      } catch (const std::exception& e) {
        status = 500;
        body = {{"error", e.what()}};
      }
      res.status = status;
      res.set_content(body.dump(), "application/json");
      log_line(req.method + " " + req.path + " " + std::to_string(status));
    };
  }

  void setup_routes() {
    route_get("/v1/attestation", [this](const httplib::Request&) -> nlohmann::json {
      return {{"report", startup_report_.hex()},
              {"pk", hex_encode(enclave_.encryption_public_key())}};
    });

    route_get("/v1/pk", [this](const httplib::Request&) -> nlohmann::json {
      return {{"pk", hex_encode(enclave_.encryption_public_key())}};
    });

    route_post("/v1/query", [this](const httplib::Request& req) -> nlohmann::json {
      nlohmann::json j = nlohmann::json::parse(req.body);
      EnvelopeCiphertext envelope =
          EnvelopeCiphertext::from_hex(j.at("envelope").get<std::string>());
      return rag_->handle_query(envelope).to_json();
    });

    route_post("/v1/records", [this](const httplib::Request& req) -> nlohmann::json {
      nlohmann::json j = nlohmann::json::parse(req.body);
      EnvelopeCiphertext envelope =
          EnvelopeCiphertext::from_hex(j.at("envelope").get<std::string>());
      CommunityRecord record = authenticate_record_body(envelope, "crag/ingest/v1");
      RecordId id = store_->ingest(enclave_, record, *redactor_snapshot());
      return {{"record_id", id}};
    });

    route_post(R"(/v1/records/(\d+)/update)", [this](const httplib::Request& req) -> nlohmann::json {
      RecordId path_id = static_cast<RecordId>(std::stoull(req.matches[1].str()));
      nlohmann::json j = nlohmann::json::parse(req.body);
      EnvelopeCiphertext envelope =
          EnvelopeCiphertext::from_hex(j.at("envelope").get<std::string>());

      nlohmann::json body = decrypt_signed_body(envelope, "crag/update/v1");
      RecordId id = body.at("record_id").get<RecordId>();
      if (id != path_id) throw Error("record id in body does not match path");
      std::string client_id = body.at("client_id").get<std::string>();
      std::uint64_t seq =
          store_->update_record(enclave_, id, body.at("new_text").get<std::string>(),
                                *redactor_snapshot(), UpdateAuth{client_id});
      return {{"created_seq", seq}};
    });

    route_post("/v1/admin/propose", [this](const httplib::Request& req) -> nlohmann::json {
      nlohmann::json j = nlohmann::json::parse(req.body);
      AdminOperation op = admin_operation_from_name(j.at("operation").get<std::string>());
      AdminParams params;
      for (const auto& [key, value] : j.at("params").items())
        params[key] = value.get<std::string>();
      return book_snapshot()->propose(op, params).to_json();
    });

    route_post("/v1/admin/approve", [this](const httplib::Request& req) -> nlohmann::json {
      nlohmann::json j = nlohmann::json::parse(req.body);
      Approval approval = Approval::from_json(j.at("approval"));
      book_snapshot()->record_approval(approval);
      return {{"accepted", true}};
    });

    route_post("/v1/admin/execute", [this](const httplib::Request& req) -> nlohmann::json {
      nlohmann::json j = nlohmann::json::parse(req.body);
      std::uint64_t proposal_id = j.at("proposal_id").get<std::uint64_t>();
      ExecutedProposal token = book_snapshot()->execute(proposal_id);
      return perform_governed_operation(token);
    });

    route_get("/v1/audit", [this](const httplib::Request& req) -> nlohmann::json {
      EventFilter filter;
      if (req.has_param("kind")) filter.kind = event_kind_from_name(req.get_param_value("kind"));
      if (req.has_param("actor")) filter.actor = req.get_param_value("actor");
      if (req.has_param("subject"))
        filter.subject = Digest::from_hex(req.get_param_value("subject"));
      if (req.has_param("from")) filter.seq_min = std::stoull(req.get_param_value("from"));
      if (req.has_param("to")) filter.seq_max = std::stoull(req.get_param_value("to"));
      nlohmann::json entries = nlohmann::json::array();
      for (const AuditEntry& e : audit_->query_events(filter)) entries.push_back(e.to_json());
      return {{"entries", entries}};
    });

    route_get("/v1/registry/check", [this](const httplib::Request& req) -> nlohmann::json {
      std::string name = req.get_param_value("name");
      std::string version = req.get_param_value("version");
      if (name.empty() || version.empty()) throw Error("name and version are required");
      AttestationReport report =
          req.has_param("report") ? AttestationReport::from_hex(req.get_param_value("report"))
                                  : startup_report_;
      DriftVerdict verdict = registry_->check_deployment(name, version, report, root_public_);
      nlohmann::json out = {{"status", std::string(drift_status_name(verdict.status))},
                            {"observed", verdict.observed.hex()}};
      if (verdict.expected) out["expected"] = verdict.expected->hex();
      return out;
    });
  }

  // Decrypts an enclave-addressed envelope and authenticates the JSON body
  // inside: the "signature" field (over the digest of the body without it)
  // must verify under the registered key of the named client.
  nlohmann::json decrypt_signed_body(const EnvelopeCiphertext& envelope, std::string_view aad) {
    nlohmann::json body;
    std::string client_id;
    Signature sig;
    try {
      Bytes plain = enclave_.run([&](const Enclave::Session& session) {
        return session.decrypt_envelope(envelope, as_bytes(aad));
      });
      body = nlohmann::json::parse(plain.begin(), plain.end());
      sig = Signature::from_hex(body.at("signature").get<std::string>());
      client_id = body.at("client_id").get<std::string>();
    } catch (const std::exception&) {
      audit_->append_event(EventKind::AuthFailure, "unknown", {digest(envelope.to_bytes())});
      throw AuthError("request envelope rejected");
    }
    std::optional<ClientRegistration> client = find_client(client_id);
    nlohmann::json unsigned_body = body;
    unsigned_body.erase("signature");
    if (!client || !verify(client->signing_public, digest(unsigned_body.dump()).view(), sig)) {
      std::string actor = valid_actor_id(client_id) ? client_id : "unknown";
      audit_->append_event(EventKind::AuthFailure, actor, {digest(envelope.to_bytes())});
      throw AuthError("request authentication failed");
    }
    return body;
  }

  CommunityRecord authenticate_record_body(const EnvelopeCiphertext& envelope,
                                           std::string_view aad) {
    nlohmann::json body = decrypt_signed_body(envelope, aad);
    CommunityRecord record;
    record.record_id = body.at("record_id").get<RecordId>();
    record.text = body.at("text").get<std::string>();
    record.visibility = visibility_from_name(body.at("visibility").get<std::string>());
    record.contributor = body.at("contributor").get<std::string>();
    if (record.contributor != body.at("client_id").get<std::string>()) {
      audit_->append_event(EventKind::AuthFailure, body.at("client_id").get<std::string>(),
                           {digest(envelope.to_bytes())});
      throw AuthError("contributor must match the authenticated client");
    }
    return record;
  }

  // Applies the operation a threshold-executed proposal authorizes.
  nlohmann::json perform_governed_operation(const ExecutedProposal& token) {
    switch (token.operation()) {
      case AdminOperation::DeleteRecord: {
        RecordId id = static_cast<RecordId>(std::stoull(token.param("record_id")));
        store_->delete_record(enclave_, id, token);
        return {{"deleted", id}};
      }
      case AdminOperation::ExtractRecord: {
        EnvelopeCiphertext env = store_->extract_record(enclave_, token);
        return {{"extract", env.hex()}};
      }
      case AdminOperation::ChangeRules: {
        std::vector<RedactionRule> rules = parse_rules_text(token.param("rules"));
        auto compiled = std::make_shared<const Redactor>(compile_rules(rules));
        token.consume(AdminOperation::ChangeRules);
        save_rules_file(config_.rules_path, rules);
        {
          std::lock_guard lock(redactor_mu_);
          redactor_ = std::move(compiled);
        }
        return {{"rules", "updated"}};
      }
      case AdminOperation::RotatePolicy: {
        GovernancePolicy policy =
            GovernancePolicy::from_json(nlohmann::json::parse(token.param("policy")));
        token.consume(AdminOperation::RotatePolicy);
        if (config_.governance_policy_path.empty())
          throw GovernanceError("no governance policy path configured");
        save_policy_file(config_.governance_policy_path, policy);
        {
          std::lock_guard lock(book_mu_);
          book_ = std::make_shared<GovernanceBook>(
              policy, [this](std::string_view event, std::string_view actor,
                             const Digest& subject) {
                audit_->append_event(event_kind_from_name(event), actor, {subject});
              });
        }
        return {{"policy", "rotated"}};
      }
    }
    throw GovernanceError("unsupported governed operation");
  }

  ServerConfig config_;
  std::ostream* log_;
  Enclave enclave_;
  Bytes root_public_;
  Bytes root_secret_;
  std::unique_ptr<AuditLog> audit_;
  std::unique_ptr<VectorStore> store_;
  std::unique_ptr<ArtifactRegistry> registry_;
  mutable std::mutex redactor_mu_;
  std::shared_ptr<const Redactor> redactor_;
  mutable std::mutex clients_mu_;
  std::vector<ClientRegistration> clients_;
  mutable std::mutex book_mu_;
  std::shared_ptr<GovernanceBook> book_;
  std::unique_ptr<RagService> rag_;
  AttestationReport startup_report_;
  DriftVerdict startup_verdict_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace crag
