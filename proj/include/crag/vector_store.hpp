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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <shared_mutex>

#include "crag/audit.hpp"
#include "crag/embedding.hpp"
#include "crag/enclave.hpp"
#include "crag/governance.hpp"
#include "crag/redaction.hpp"

// Envelope-encrypted vector store. At rest every record is ciphertext: the
// embedding and the retrieval payload are AES-256-GCM encrypted under a
// per-record data key, and that key is wrapped under a store master key that
// exists on disk only as a blob sealed to the enclave identity. Plaintext
// embeddings and payload text appear solely inside enclave session extents.
//
// Retrieval is an exact scan: every live in-scope record is unwrapped,
// decrypted, and scored, then the top k by (score desc, record_id asc) are
// returned. No index structure exists to diverge from the plaintext oracle.
//
// File layout: magic "CRAGVST1", u32 version, u32 embedding dimension, then
// length-prefixed records in append order. Record fields in declaration
// order, big-endian integers. Deleting a record zeroes its ciphertext bytes
// in place and flips its tombstone byte; compaction rewrites without
// tombstones.

namespace crag {

constexpr std::string_view kStoreMagic = "CRAGVST1";
constexpr std::string_view kKeyFileMagic = "CRAGKEY1";
constexpr std::uint32_t kStoreVersion = 1;

enum class SearchScope { Open, Private, Both };

inline std::string_view search_scope_name(SearchScope s) {
  switch (s) {
    case SearchScope::Open: return "open";
    case SearchScope::Private: return "private";
    case SearchScope::Both: return "both";
  }
  throw Error("unknown search scope");
}

inline SearchScope search_scope_from_name(std::string_view name) {
  if (name == "open") return SearchScope::Open;
  if (name == "private") return SearchScope::Private;
  if (name == "both") return SearchScope::Both;
  throw Error("unknown search scope: " + std::string(name));
}

struct EncryptedVectorRecord {
  RecordId record_id = 0;
  WrappedKey wrapped_key;
  AeadBox embedding_ct;
  AeadBox payload_ct;
  Visibility visibility = Visibility::Open;
  bool tombstone = false;
  std::uint64_t created_seq = 0;

  Bytes to_bytes() const {
    Bytes b;
    append_u64be(b, record_id);
    Bytes wk = wrapped_key.to_bytes();
    append_bytes(b, wk);
    Bytes e = embedding_ct.to_bytes();
    append_bytes(b, e);
    Bytes p = payload_ct.to_bytes();
    append_bytes(b, p);
    b.push_back(static_cast<std::uint8_t>(visibility));
    b.push_back(tombstone ? 1 : 0);
    append_u64be(b, created_seq);
    return b;
  }

  static EncryptedVectorRecord from_bytes(ByteView raw) {
    ByteReader r(raw);
    EncryptedVectorRecord rec;
    rec.record_id = r.u64be();
    rec.wrapped_key = WrappedKey::read_from(r);
    rec.embedding_ct = AeadBox::read_from(r);
    rec.payload_ct = AeadBox::read_from(r);
    rec.visibility = static_cast<Visibility>(r.u8());
    rec.tombstone = r.u8() != 0;
    rec.created_seq = r.u64be();
    if (!r.done()) throw Error("trailing bytes in store record");
    return rec;
  }
};

namespace detail {

inline Bytes record_aad(std::string_view label, RecordId id) {
  Bytes aad;
  append_bytes(aad, as_bytes(label));
  append_u64be(aad, id);
  return aad;
}

inline Bytes embedding_aad(RecordId id) { return record_aad("crag/emb/v1", id); }
inline Bytes payload_aad(RecordId id) { return record_aad("crag/payload/v1", id); }

// Payload plaintext: length-prefixed contributor id, then the retrieval text.
inline Bytes encode_payload(std::string_view contributor, std::string_view text) {
  Bytes b;
  append_lp(b, as_bytes(contributor));
  append_bytes(b, as_bytes(text));
  return b;
}

struct DecodedPayload {
  std::string contributor;
  std::string text;
};

inline DecodedPayload decode_payload(ByteView raw) {
  ByteReader r(raw);
  DecodedPayload p;
  p.contributor = r.take_lp_string();
  p.text = to_string(r.take_copy(r.remaining()));
  return p;
}

}  // namespace detail

// Independent ground truth for retrieval tests: embeds and scores a plaintext
// corpus directly, no encryption or persistence involved, same tie-break.
inline std::vector<SearchHit> plaintext_oracle_topk(
    const std::vector<std::pair<RecordId, std::string>>& corpus, const std::string& query_text,
    std::size_t k, std::size_t dim = kDefaultEmbeddingDim) {
  if (k == 0) throw Error("k must be at least 1");
  Embedder embedder(dim);
  if (corpus.empty()) return {};
  std::vector<float> q = embedder.embed(query_text);
  std::vector<SearchHit> hits;
  hits.reserve(corpus.size());
  for (const auto& [id, text] : corpus)
    hits.push_back({id, cosine_similarity(q, embedder.embed(text))});
  std::sort(hits.begin(), hits.end(), search_order);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

struct UpdateAuth {
  std::string contributor;
};

class VectorStore {
 public:
  VectorStore(const VectorStore&) = delete;
  VectorStore& operator=(const VectorStore&) = delete;

  // Creates a new store: fresh master key generated and sealed to the given
  // enclave identity, empty record file with header. Refuses to clobber.
  static void create(const std::string& path, std::size_t dim, const Enclave& enclave) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) throw Error("store file already exists: " + path);
    if (dim == 0 || dim > 4096) throw Error("embedding dimension out of range");

    Bytes master = random_bytes(kSymmetricKeySize);
    SealedBlob sealed = enclave.seal(master);
    sodium_memzero(master.data(), master.size());

    {
      std::ofstream key(key_path(path), std::ios::binary | std::ios::trunc);
      if (!key) throw Error("cannot write key file for " + path);
      Bytes kb;
      append_bytes(kb, as_bytes(kKeyFileMagic));
      Bytes sb = sealed.to_bytes();
      append_bytes(kb, sb);
      key.write(reinterpret_cast<const char*>(kb.data()), static_cast<std::streamsize>(kb.size()));
    }
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write store file: " + path);
      Bytes header;
      append_bytes(header, as_bytes(kStoreMagic));
      append_u32be(header, kStoreVersion);
      append_u32be(header, static_cast<std::uint32_t>(dim));
      out.write(reinterpret_cast<const char*>(header.data()),
                static_cast<std::streamsize>(header.size()));
    }
  }

  // Opens an existing store. The sealed master key is checked for identity
  // match (a foreign seal is rejected here, before any operation), but stays
  // sealed; it is unsealed per operation inside an enclave session.
  static std::unique_ptr<VectorStore> open(const std::string& path, const Enclave& enclave,
                                           AuditLog* audit = nullptr) {
    auto store = std::unique_ptr<VectorStore>(new VectorStore());
    store->path_ = path;
    store->audit_ = audit;
    store->load_key_file(enclave);
    store->load_records();
    store->file_.open(path, std::ios::binary | std::ios::in | std::ios::out);
    if (!store->file_) throw Error("cannot open store file for writing: " + path);
    return store;
  }

  static std::unique_ptr<VectorStore> open_or_create(const std::string& path, std::size_t dim,
                                                     const Enclave& enclave,
                                                     AuditLog* audit = nullptr) {
    if (!std::filesystem::exists(path)) create(path, dim, enclave);
    return open(path, enclave, audit);
  }

  static std::string key_path(const std::string& store_path) { return store_path + ".key"; }

  std::size_t dim() const { return dim_; }
  const std::string& path() const { return path_; }

  std::size_t live_count() const {
    std::shared_lock lock(mu_);
    std::size_t n = 0;
    for (const auto& s : slots_)
      if (!s.record.tombstone) ++n;
    return n;
  }

  bool contains_live(RecordId id) const {
    std::shared_lock lock(mu_);
    return find_live(id) != nullptr;
  }

  // Ingests one record inside an enclave extent: private text is redacted to
  // its safe view first, the retrieval text is embedded and both embedding
  // and payload are encrypted under a fresh data key wrapped by the master
  // key. Only digests reach the audit log.
  RecordId ingest(const Enclave& enclave, const CommunityRecord& record,
                  const Redactor& redactor) {
    if (record.text.empty()) throw Error("record text must not be empty");
    std::unique_lock lock(mu_);
    if (ids_ever_.count(record.record_id))
      throw Error("duplicate record_id: " + std::to_string(record.record_id));

    enclave.run([&](const Enclave::Session& session) {
      std::string retrieval_text = record.text;
      if (record.visibility == Visibility::Private)
        retrieval_text = redact_record(redactor, record).redacted_text;
      append_version(session, record.record_id, retrieval_text, record.contributor,
                     record.visibility);
    });
    ids_ever_.insert(record.record_id);

    if (audit_)
      audit_->append_event(EventKind::Ingest, "store",
                           {record_id_digest(record.record_id), digest(record.text)});
    return record.record_id;
  }

  std::vector<SearchHit> search_topk(const Enclave& enclave, const std::string& query_text,
                                     std::size_t k, SearchScope scope) const {
    return enclave.run(
        [&](const Enclave::Session& s) { return search_topk_in(s, query_text, k, scope); });
  }

  // Session-scoped search so the pipeline can search and fetch text within
  // one enclave extent. Holds a shared lock: searches run concurrently.
  std::vector<SearchHit> search_topk_in(const Enclave::Session& session,
                                        const std::string& query_text, std::size_t k,
                                        SearchScope scope) const {
    if (k == 0) throw Error("k must be at least 1");
    std::shared_lock lock(mu_);
    if (slots_.empty()) return {};

    std::vector<float> q = embedder_.embed(query_text);
    Bytes master = unseal_master(session);
    std::vector<SearchHit> hits;
    for (const auto& slot : slots_) {
      const EncryptedVectorRecord& rec = slot.record;
      if (rec.tombstone || !in_scope(rec.visibility, scope)) continue;
      Bytes data_key = session.unwrap(master, rec.wrapped_key);
      Bytes emb_raw = session.open_box(data_key, rec.embedding_ct,
                                       detail::embedding_aad(rec.record_id));
      sodium_memzero(data_key.data(), data_key.size());
      std::vector<float> v = embedding_from_bytes(emb_raw);
      hits.push_back({rec.record_id, cosine_similarity(q, v)});
    }
    sodium_memzero(master.data(), master.size());
    std::sort(hits.begin(), hits.end(), search_order);
    if (hits.size() > k) hits.resize(k);
    return hits;
  }

  // Decrypts one live record's retrieval text. Session-scoped: the text must
  // not outlive the enclave extent that requested it.
  RetrievedChunk fetch_chunk_in(const Enclave::Session& session, RecordId id,
                                float score = 0.0f) const {
    std::shared_lock lock(mu_);
    const Slot* slot = find_live(id);
    if (!slot) throw Error("no live record with id " + std::to_string(id));
    Bytes master = unseal_master(session);
    Bytes data_key = session.unwrap(master, slot->record.wrapped_key);
    sodium_memzero(master.data(), master.size());
    Bytes payload = session.open_box(data_key, slot->record.payload_ct,
                                     detail::payload_aad(id));
    sodium_memzero(data_key.data(), data_key.size());
    detail::DecodedPayload p = detail::decode_payload(payload);
    return {id, score, std::move(p.text)};
  }

  // Replaces a record's content: the old version is tombstoned in place and a
  // new version is appended under the same id with a bumped created_seq.
  // Authorization is contributor match; the audit event links old and new
  // text digests.
  std::uint64_t update_record(const Enclave& enclave, RecordId id, const std::string& new_text,
                              const Redactor& redactor, const UpdateAuth& auth) {
    if (new_text.empty()) throw Error("record text must not be empty");
    std::unique_lock lock(mu_);
    Slot* slot = find_live(id);
    if (!slot) throw Error("no live record with id " + std::to_string(id));

    Digest old_digest, new_digest;
    std::uint64_t new_seq = 0;
    Visibility vis = slot->record.visibility;
    enclave.run([&](const Enclave::Session& session) {
      Bytes master = unseal_master(session);
      Bytes data_key = session.unwrap(master, slot->record.wrapped_key);
      Bytes payload = session.open_box(data_key, slot->record.payload_ct,
                                       detail::payload_aad(id));
      sodium_memzero(data_key.data(), data_key.size());
      sodium_memzero(master.data(), master.size());
      detail::DecodedPayload old = detail::decode_payload(payload);
      if (old.contributor != auth.contributor)
        throw GovernanceError("update not authorized for contributor " + auth.contributor);
      old_digest = digest(old.text);

      std::string retrieval_text = new_text;
      if (vis == Visibility::Private) {
        CommunityRecord updated{id, new_text, vis, old.contributor};
        retrieval_text = redact_record(redactor, updated).redacted_text;
      }
      new_digest = digest(new_text);

      set_tombstone(*slot);
      new_seq = append_version(session, id, retrieval_text, old.contributor, vis);
    });

    if (audit_) audit_->append_event(EventKind::Update, "store",
                                     {record_id_digest(id), old_digest, new_digest});
    return new_seq;
  }

  // Governed delete: requires an executed delete-record proposal naming this
  // id. Tombstones the record and overwrites its embedding and payload
  // ciphertext regions with zeros on disk.
  void delete_record(const Enclave& enclave, RecordId id, const ExecutedProposal& proposal) {
    if (proposal.operation() != AdminOperation::DeleteRecord)
      throw GovernanceError("proposal does not authorize delete-record");
    if (proposal.param("record_id") != std::to_string(id))
      throw GovernanceError("proposal names a different record");

    std::unique_lock lock(mu_);
    Slot* slot = find_live(id);
    if (!slot) throw Error("no live record with id " + std::to_string(id));
    proposal.consume(AdminOperation::DeleteRecord);

    (void)enclave;
    set_tombstone(*slot);
    zero_ciphertexts(*slot);

    if (audit_)
      audit_->append_event(EventKind::Delete, "store",
                           {record_id_digest(id), proposal.proposal().payload_digest});
  }

  // Governed extraction: decrypts the record's retrieval text inside the
  // enclave and re-encrypts it to the recipient key named by the proposal.
  // Plaintext never crosses the boundary.
  EnvelopeCiphertext extract_record(const Enclave& enclave, const ExecutedProposal& proposal) {
    if (proposal.operation() != AdminOperation::ExtractRecord)
      throw GovernanceError("proposal does not authorize extract-record");
    RecordId id = 0;
    try {
      id = static_cast<RecordId>(std::stoull(proposal.param("record_id")));
    } catch (const std::exception&) {
      throw GovernanceError("proposal record_id is not a number");
    }
    Bytes recipient = hex_decode(proposal.param("recipient_pk"));

    if (!contains_live(id)) throw Error("no live record with id " + std::to_string(id));
    proposal.consume(AdminOperation::ExtractRecord);
    EnvelopeCiphertext env = enclave.run([&](const Enclave::Session& session) {
      RetrievedChunk chunk = fetch_chunk_in(session, id);
      return hybrid_encrypt(recipient, as_bytes(chunk.text), as_bytes("crag/extract/v1"));
    });

    if (audit_)
      audit_->append_event(EventKind::Response, "store",
                           {record_id_digest(id), proposal.proposal().payload_digest});
    return env;
  }

  // Rewrites the store file without tombstoned records. Live records keep
  // their bytes and created_seq; offsets are rebuilt.
  void compact(const Enclave& enclave) {
    (void)enclave;
    namespace fs = std::filesystem;
    std::unique_lock lock(mu_);
    std::string tmp = path_ + ".compact";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write compaction file: " + tmp);
      Bytes header;
      append_bytes(header, as_bytes(kStoreMagic));
      append_u32be(header, kStoreVersion);
      append_u32be(header, static_cast<std::uint32_t>(dim_));
      out.write(reinterpret_cast<const char*>(header.data()),
                static_cast<std::streamsize>(header.size()));
      for (const auto& slot : slots_) {
        if (slot.record.tombstone) continue;
        Bytes rb = slot.record.to_bytes();
        Bytes framed;
        append_lp(framed, rb);
        out.write(reinterpret_cast<const char*>(framed.data()),
                  static_cast<std::streamsize>(framed.size()));
      }
    }
    file_.close();
    fs::rename(tmp, path_);
    std::vector<Slot> kept;
    std::uint64_t offset = header_size();
    for (auto& slot : slots_) {
      if (slot.record.tombstone) continue;
      slot.file_offset = offset + 4;
      offset += 4 + slot.record.to_bytes().size();
      kept.push_back(std::move(slot));
    }
    slots_ = std::move(kept);
    file_.open(path_, std::ios::binary | std::ios::in | std::ios::out);
    if (!file_) throw Error("cannot reopen store after compaction: " + path_);
  }

  // Test-support view of a record's ciphertext regions on disk.
  struct CiphertextRegions {
    std::uint64_t embedding_offset = 0;
    std::uint64_t embedding_length = 0;
    std::uint64_t payload_offset = 0;
    std::uint64_t payload_length = 0;
  };

  std::optional<CiphertextRegions> ciphertext_regions(RecordId id) const {
    std::shared_lock lock(mu_);
    for (auto it = slots_.rbegin(); it != slots_.rend(); ++it) {
      if (it->record.record_id == id) return regions_of(*it);
    }
    return std::nullopt;
  }

 private:
  struct Slot {
    EncryptedVectorRecord record;
    std::uint64_t file_offset = 0;  // first byte of the record (after length prefix)
  };

  VectorStore() = default;

  static constexpr std::uint64_t header_size() { return 8 + 4 + 4; }

  static bool in_scope(Visibility v, SearchScope scope) {
    switch (scope) {
      case SearchScope::Open: return v == Visibility::Open;
      case SearchScope::Private: return v == Visibility::Private;
      case SearchScope::Both: return true;
    }
    return false;
  }

  void load_key_file(const Enclave& enclave) {
    std::ifstream key(key_path(path_), std::ios::binary);
    if (!key) throw Error("cannot open key file for " + path_);
    Bytes raw((std::istreambuf_iterator<char>(key)), std::istreambuf_iterator<char>());
    ByteReader r(raw);
    ByteView magic = r.take(kKeyFileMagic.size());
    if (to_string(Bytes(magic.begin(), magic.end())) != kKeyFileMagic)
      throw Error("bad key file magic for " + path_);
    sealed_master_ = SealedBlob::from_bytes(r.take_copy(r.remaining()));
    if (sealed_master_.sealed_by != enclave.measurement())
      throw AuthError("store master key is sealed to a different enclave identity");
  }

  void load_records() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error("cannot open store file: " + path_);
    Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(raw);
    ByteView magic = r.take(kStoreMagic.size());
    if (to_string(Bytes(magic.begin(), magic.end())) != kStoreMagic)
      throw Error("bad store magic in " + path_);
    std::uint32_t version = r.u32be();
    if (version != kStoreVersion)
      throw Error("unsupported store version " + std::to_string(version));
    dim_ = r.u32be();
    if (dim_ == 0 || dim_ > 4096) throw Error("store header dimension out of range");
    embedder_ = Embedder(dim_);

    std::uint64_t offset = header_size();
    while (!r.done()) {
      Bytes rb = r.take_lp();
      Slot slot;
      slot.record = EncryptedVectorRecord::from_bytes(rb);
      slot.file_offset = offset + 4;
      offset += 4 + rb.size();
      next_seq_ = std::max(next_seq_, slot.record.created_seq + 1);
      ids_ever_.insert(slot.record.record_id);
      slots_.push_back(std::move(slot));
    }
  }

  Bytes unseal_master(const Enclave::Session& session) const {
    return session.unseal(sealed_master_);
  }

  const Slot* find_live(RecordId id) const {
    for (auto it = slots_.rbegin(); it != slots_.rend(); ++it)
      if (it->record.record_id == id && !it->record.tombstone) return &*it;
    return nullptr;
  }

  Slot* find_live(RecordId id) {
    return const_cast<Slot*>(static_cast<const VectorStore*>(this)->find_live(id));
  }

  // Encrypts and appends one record version. Caller holds the unique lock
  // and an enclave session.
  std::uint64_t append_version(const Enclave::Session& session, RecordId id,
                               const std::string& retrieval_text, const std::string& contributor,
                               Visibility visibility) {
    Bytes master = unseal_master(session);
    Bytes data_key = random_bytes(kSymmetricKeySize);

    EncryptedVectorRecord rec;
    rec.record_id = id;
    rec.wrapped_key = wrap_data_key(master, data_key);
    sodium_memzero(master.data(), master.size());

    std::vector<float> emb = embedder_.embed(retrieval_text);
    rec.embedding_ct = aead_seal(data_key, embedding_to_bytes(emb), detail::embedding_aad(id));
    rec.payload_ct = aead_seal(data_key, detail::encode_payload(contributor, retrieval_text),
                               detail::payload_aad(id));
    sodium_memzero(data_key.data(), data_key.size());
    rec.visibility = visibility;
    rec.tombstone = false;
    rec.created_seq = next_seq_++;

    Bytes rb = rec.to_bytes();
    Bytes framed;
    append_lp(framed, rb);
    file_.seekp(0, std::ios::end);
    std::uint64_t record_offset = static_cast<std::uint64_t>(file_.tellp()) + 4;
    file_.write(reinterpret_cast<const char*>(framed.data()),
                static_cast<std::streamsize>(framed.size()));
    file_.flush();
    if (!file_) throw Error("store append failed for " + path_);

    slots_.push_back({std::move(rec), record_offset});
    return slots_.back().record.created_seq;
  }

  CiphertextRegions regions_of(const Slot& slot) const {
    const EncryptedVectorRecord& rec = slot.record;
    std::uint64_t emb_box = slot.file_offset + 8 + kNonceSize + (kSymmetricKeySize + kTagSize);
    CiphertextRegions regions;
    regions.embedding_offset = emb_box + kNonceSize + 4;
    regions.embedding_length = rec.embedding_ct.ciphertext.size() + kTagSize;
    std::uint64_t payload_box =
        emb_box + kNonceSize + 4 + rec.embedding_ct.ciphertext.size() + kTagSize;
    regions.payload_offset = payload_box + kNonceSize + 4;
    regions.payload_length = rec.payload_ct.ciphertext.size() + kTagSize;
    return regions;
  }

  std::uint64_t tombstone_offset(const Slot& slot) const {
    CiphertextRegions r = regions_of(slot);
    return r.payload_offset + r.payload_length + 1;
  }

  void patch_file(std::uint64_t offset, ByteView bytes) {
    file_.seekp(static_cast<std::streamoff>(offset));
    file_.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    file_.flush();
    if (!file_) throw Error("store patch failed for " + path_);
  }

  void set_tombstone(Slot& slot) {
    slot.record.tombstone = true;
    std::uint8_t one = 1;
    patch_file(tombstone_offset(slot), {&one, 1});
  }

  void zero_ciphertexts(Slot& slot) {
    CiphertextRegions r = regions_of(slot);
    Bytes zeros(static_cast<std::size_t>(std::max(r.embedding_length, r.payload_length)), 0);
    patch_file(r.embedding_offset, {zeros.data(), r.embedding_length});
    patch_file(r.payload_offset, {zeros.data(), r.payload_length});
    std::fill(slot.record.embedding_ct.ciphertext.begin(),
              slot.record.embedding_ct.ciphertext.end(), std::uint8_t{0});
    slot.record.embedding_ct.tag.fill(0);
    std::fill(slot.record.payload_ct.ciphertext.begin(), slot.record.payload_ct.ciphertext.end(),
              std::uint8_t{0});
    slot.record.payload_ct.tag.fill(0);
  }

  std::string path_;
  AuditLog* audit_ = nullptr;
  std::size_t dim_ = kDefaultEmbeddingDim;
  Embedder embedder_{kDefaultEmbeddingDim};
  SealedBlob sealed_master_;
  mutable std::shared_mutex mu_;
  std::vector<Slot> slots_;
  std::set<RecordId> ids_ever_;
  std::uint64_t next_seq_ = 0;
  mutable std::fstream file_;
};

}  // namespace crag
