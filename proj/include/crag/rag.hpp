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

#include "crag/vector_store.hpp"

// End-to-end query pipeline: hybrid-encrypted query in, provenance-bearing
// encrypted response out. One enclave session spans decrypt, authenticate,
// retrieve, augment, generate, and re-encrypt, so query and record plaintext
// never exist outside it. Every stage leaves a digest-only audit event.

namespace crag {

constexpr std::string_view kQueryAad = "crag/query/v1";
constexpr std::string_view kResponseAad = "crag/response/v1";
constexpr std::string_view kPromptTemplateId = "crag-rag/v1";
constexpr std::string_view kNoContextNotice =
    "No relevant context was available to answer this question.";

// A decrypted user query. The signature covers the digest of every field
// before it, binding the prompt, context, response key, and client identity
// together; it verifies against the client's registered signing key.
struct UserQuery {
  std::string prompt;
  std::optional<std::string> private_context;
  std::array<std::uint8_t, kPublicKeySize> client_response_key{};
  std::string client_id;
  Signature auth_signature;

  Bytes signed_portion() const {
    Bytes b;
    append_lp(b, as_bytes(prompt));
    b.push_back(private_context ? 1 : 0);
    if (private_context) append_lp(b, as_bytes(*private_context));
    append_bytes(b, {client_response_key.data(), client_response_key.size()});
    append_lp(b, as_bytes(client_id));
    return b;
  }

  Bytes to_bytes() const {
    Bytes b = signed_portion();
    append_bytes(b, auth_signature.view());
    return b;
  }

  static UserQuery from_bytes(ByteView raw) {
    ByteReader r(raw);
    UserQuery q;
    q.prompt = r.take_lp_string();
    if (r.u8() != 0) q.private_context = r.take_lp_string();
    ByteView pk = r.take(kPublicKeySize);
    std::memcpy(q.client_response_key.data(), pk.data(), kPublicKeySize);
    q.client_id = r.take_lp_string();
    q.auth_signature = Signature::from_bytes(r.take(kSignatureSize));
    if (!r.done()) throw Error("trailing bytes after user query");
    return q;
  }
};

// Builds and signs a query body. Client-side half of protocol step 1; the
// result is then hybrid-encrypted to pk_TEE.
inline UserQuery make_user_query(std::string prompt, std::optional<std::string> private_context,
                                 ByteView client_response_key, std::string client_id,
                                 ByteView client_signing_secret) {
  if (prompt.empty()) throw Error("prompt must not be empty");
  if (client_response_key.size() != kPublicKeySize)
    throw Error("client response key must be 32 bytes");
  UserQuery q;
  q.prompt = std::move(prompt);
  q.private_context = std::move(private_context);
  std::memcpy(q.client_response_key.data(), client_response_key.data(), kPublicKeySize);
  q.client_id = std::move(client_id);
  q.auth_signature = sign(client_signing_secret, digest(q.signed_portion()).view());
  return q;
}

inline EnvelopeCiphertext encrypt_query(ByteView pk_tee, const UserQuery& query) {
  return hybrid_encrypt(pk_tee, query.to_bytes(), as_bytes(kQueryAad));
}

struct AugmentedPrompt {
  std::string template_id;
  std::string prompt;
  std::vector<std::pair<RecordId, std::string>> context_blocks;
  std::string assembled_text;
};

// Deterministic prompt template: optional user-data block, numbered context
// blocks in rank order, then the question.
inline AugmentedPrompt augment_prompt(const std::string& prompt,
                                      const std::optional<std::string>& private_context,
                                      const std::vector<RetrievedChunk>& chunks) {
  AugmentedPrompt ap;
  ap.template_id = std::string(kPromptTemplateId);
  ap.prompt = prompt;
  std::string& text = ap.assembled_text;
  text = "You answer using only the provided context.\n";
  if (private_context) {
    text += "--- user data ---\n";
    text += *private_context;
    text += "\n";
  }
  text += "--- context ---\n";
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    ap.context_blocks.emplace_back(chunks[i].record_id, chunks[i].text);
    text += "[" + std::to_string(i + 1) + "] " + chunks[i].text + "\n";
  }
  text += "--- question ---\n";
  text += prompt;
  return ap;
}

struct GeneratedResponse {
  std::string text;
  std::vector<RecordId> provenance;
  std::string generator_id;

  Bytes to_bytes() const {
    Bytes b;
    append_lp(b, as_bytes(text));
    append_u32be(b, static_cast<std::uint32_t>(provenance.size()));
    for (RecordId id : provenance) append_u64be(b, id);
    append_lp(b, as_bytes(generator_id));
    return b;
  }

  static GeneratedResponse from_bytes(ByteView raw) {
    ByteReader r(raw);
    GeneratedResponse resp;
    resp.text = r.take_lp_string();
    std::uint32_t n = r.u32be();
    for (std::uint32_t i = 0; i < n; ++i) resp.provenance.push_back(r.u64be());
    resp.generator_id = r.take_lp_string();
    if (!r.done()) throw Error("trailing bytes after generated response");
    return resp;
  }
};

// Generation slot. A real confidential LLM would implement this interface
// and run inside the enclave extent exactly as the default does.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string_view id() const = 0;
  virtual GeneratedResponse generate(const AugmentedPrompt& assembled) const = 0;
};

namespace detail {

inline std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      out.push_back(current);
      current.clear();
    }
  }
  out.push_back(current);
  std::vector<std::string> trimmed;
  for (std::string& s : out) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    std::size_t e = s.find_last_not_of(" \t\r\n");
    trimmed.push_back(s.substr(b, e - b + 1));
  }
  return trimmed;
}

inline std::set<std::string> word_set(const std::string& text) {
  std::set<std::string> words;
  std::string current;
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 'A' && uc <= 'Z') uc = static_cast<unsigned char>(uc + 32);
    if ((uc >= 'a' && uc <= 'z') || (uc >= '0' && uc <= '9')) {
      current.push_back(static_cast<char>(uc));
    } else if (!current.empty()) {
      words.insert(current);
      current.clear();
    }
  }
  if (!current.empty()) words.insert(current);
  return words;
}

}  // namespace detail

// Default generator: extractive summarization. Context sentences are scored
// by overlap with the prompt's word set; the top three (score desc, block
// rank asc, sentence order asc) joined by single spaces form the answer.
// Provenance lists the blocks that contributed a selected sentence.
class ExtractiveGenerator : public Generator {
 public:
  std::string_view id() const override { return "extractive-v1"; }

  GeneratedResponse generate(const AugmentedPrompt& assembled) const override {
    GeneratedResponse resp;
    resp.generator_id = std::string(id());

    struct Candidate {
      std::size_t score;
      std::size_t block_rank;
      std::size_t sentence_order;
      std::string text;
      RecordId block_id;
    };

    std::set<std::string> prompt_words = detail::word_set(assembled.prompt);
    std::vector<Candidate> candidates;
    for (std::size_t rank = 0; rank < assembled.context_blocks.size(); ++rank) {
      const auto& [block_id, block_text] = assembled.context_blocks[rank];
      std::vector<std::string> sentences = detail::split_sentences(block_text);
      for (std::size_t si = 0; si < sentences.size(); ++si) {
        std::set<std::string> words = detail::word_set(sentences[si]);
        std::size_t score = 0;
        for (const std::string& w : words)
          if (prompt_words.count(w)) ++score;
        if (score >= 1) candidates.push_back({score, rank, si, sentences[si], block_id});
      }
    }

    if (candidates.empty()) {
      resp.text = std::string(kNoContextNotice);
      return resp;
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.block_rank != b.block_rank) return a.block_rank < b.block_rank;
      return a.sentence_order < b.sentence_order;
    });
    if (candidates.size() > 3) candidates.resize(3);

    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (i > 0) resp.text += " ";
      resp.text += candidates[i].text;
    }
    for (const Candidate& c : candidates) {
      bool seen = false;
      for (RecordId id : resp.provenance)
        if (id == c.block_id) { seen = true; break; }
      if (!seen) resp.provenance.push_back(c.block_id);
    }
    return resp;
  }
};

struct ResponseEnvelope {
  EnvelopeCiphertext response_ct;
  AttestationReport attestation;

  nlohmann::json to_json() const {
    return {{"response", response_ct.hex()}, {"attestation", attestation.hex()}};
  }

  static ResponseEnvelope from_json(const nlohmann::json& j) {
    ResponseEnvelope env;
    env.response_ct = EnvelopeCiphertext::from_hex(j.at("response").get<std::string>());
    env.attestation = AttestationReport::from_hex(j.at("attestation").get<std::string>());
    return env;
  }
};

enum class ClientScope { Open, Private };

struct ClientRegistration {
  std::string client_id;
  Bytes signing_public;
  ClientScope scope = ClientScope::Open;
};

struct RagConfig {
  std::size_t k = 4;
  bool provenance = true;
};

class RagService {
 public:
  using ClientLookup = std::function<std::optional<ClientRegistration>(std::string_view)>;

  // root_signing_secret stands in for the attestation root of trust; the
  // service holds it to endorse per-response reports.
  RagService(const Enclave& enclave, VectorStore& store, AuditLog& audit, RagConfig config,
             ClientLookup clients, Bytes root_signing_secret,
             std::shared_ptr<const Generator> generator = nullptr)
      : enclave_(enclave),
        store_(store),
        audit_(audit),
        config_(config),
        clients_(std::move(clients)),
        root_signing_secret_(std::move(root_signing_secret)),
        generator_(generator ? std::move(generator)
                             : std::make_shared<const ExtractiveGenerator>()) {
    if (config_.k < 1) throw Error("retrieval depth k must be at least 1");
  }

  const Enclave& enclave() const { return enclave_; }

  // Protocol steps 2-6. The whole body runs inside one enclave session;
  // decrypted material lives only in its locals. Authentication failures are
  // audited and raised before any retrieval work happens.
  ResponseEnvelope handle_query(const EnvelopeCiphertext& envelope) {
    return enclave_.run([&](const Enclave::Session& session) {
      UserQuery query;
      try {
        Bytes query_plain = session.decrypt_envelope(envelope, as_bytes(kQueryAad));
        query = UserQuery::from_bytes(query_plain);
      } catch (const Error&) {
        audit_.append_event(EventKind::AuthFailure, "unknown", {digest(envelope.to_bytes())});
        throw AuthError("query envelope rejected");
      }

      std::string actor = valid_actor_id(query.client_id) ? query.client_id : "unknown";
      std::optional<ClientRegistration> client = clients_(query.client_id);
      if (!client || query.prompt.empty() ||
          !verify(client->signing_public, digest(query.signed_portion()).view(),
                  query.auth_signature)) {
        audit_.append_event(EventKind::AuthFailure, actor, {digest(envelope.to_bytes())});
        throw AuthError("query authentication failed");
      }

      audit_.append_event(EventKind::QueryReceived, query.client_id, {digest(query.prompt)});

      SearchScope scope =
          client->scope == ClientScope::Private ? SearchScope::Both : SearchScope::Open;
      std::string query_text = query.prompt;
      if (query.private_context) query_text += " " + *query.private_context;

      std::vector<SearchHit> hits = store_.search_topk_in(session, query_text, config_.k, scope);

      std::vector<Digest> retrieved;
      retrieved.reserve(hits.size());
      for (const SearchHit& h : hits) retrieved.push_back(record_id_digest(h.record_id));
      audit_.append_event(EventKind::Retrieval, query.client_id, std::move(retrieved));

      std::vector<RetrievedChunk> chunks;
      chunks.reserve(hits.size());
      for (const SearchHit& h : hits)
        chunks.push_back(store_.fetch_chunk_in(session, h.record_id, h.score));

      AugmentedPrompt assembled = augment_prompt(query.prompt, query.private_context, chunks);
      GeneratedResponse response = generator_->generate(assembled);
      if (!config_.provenance) response.provenance.clear();

      ResponseEnvelope out;
      out.response_ct = hybrid_encrypt({query.client_response_key.data(), kPublicKeySize},
                                       response.to_bytes(), as_bytes(kResponseAad));
      Digest response_digest = digest(out.response_ct.to_bytes());
      out.attestation = enclave_.attest(response_digest, root_signing_secret_);
      audit_.append_event(EventKind::Response, query.client_id, {response_digest});
      return out;
    });
  }

 private:
  const Enclave& enclave_;
  VectorStore& store_;
  AuditLog& audit_;
  RagConfig config_;
  ClientLookup clients_;
  Bytes root_signing_secret_;
  std::shared_ptr<const Generator> generator_;
};

// Client-side verification and decryption of a response envelope: checks the
// attestation against the trusted root and expected measurement, checks the
// report binds this exact ciphertext, then decrypts.
inline GeneratedResponse open_response(const ResponseEnvelope& envelope,
                                       ByteView client_response_secret, ByteView root_public,
                                       const Digest& expected_measurement) {
  ReportVerdict verdict = verify_report(envelope.attestation, root_public, expected_measurement);
  if (!verdict.accepted) {
    throw VerificationError(verdict.reason == ReportVerdict::Reason::bad_root_signature
                                ? "response attestation has an invalid root signature"
                                : "response attestation measurement mismatch");
  }
  if (envelope.attestation.report_data != digest(envelope.response_ct.to_bytes()))
    throw VerificationError("response attestation does not bind this ciphertext");
  Bytes plain = hybrid_decrypt(client_response_secret, envelope.response_ct,
                               as_bytes(kResponseAad));
  return GeneratedResponse::from_bytes(plain);
}

}  // namespace crag
