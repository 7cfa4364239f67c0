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
#include <array>
#include <optional>

#include "crag/common.hpp"

// Cryptographic primitives shared by every module. The suite is fixed:
// SHA-256 for all digests, Ed25519 for signatures, and X25519 + HKDF-SHA256
// + AES-256-GCM for hybrid (envelope) encryption and key wrapping.

namespace crag {

constexpr std::size_t kDigestSize = 32;
constexpr std::size_t kNonceSize = 12;
constexpr std::size_t kTagSize = 16;
constexpr std::size_t kSymmetricKeySize = 32;
constexpr std::size_t kPublicKeySize = 32;
constexpr std::size_t kSignatureSize = 64;
constexpr std::size_t kSeedSize = 32;

// ASCII domain-separation label for the hybrid KDF; fixed so independent
// implementations of the envelope format interoperate.
constexpr std::string_view kHybridKdfInfo = "crag/hybrid/v1";

struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  bool operator==(const Digest&) const = default;
  auto operator<=>(const Digest&) const = default;

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  std::string hex() const { return hex_encode(view()); }

  static Digest zero() { return Digest{}; }

  static Digest from_hex(std::string_view h) {
    Bytes raw = hex_decode(h);
    return from_bytes(raw);
  }

  static Digest from_bytes(ByteView raw) {
    if (raw.size() != kDigestSize) throw Error("digest must be 32 bytes");
    Digest d;
    std::memcpy(d.bytes.data(), raw.data(), kDigestSize);
    return d;
  }
};

inline Digest digest(ByteView data) {
  crypto_init();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

inline Digest digest(std::string_view s) { return digest(as_bytes(s)); }

struct Signature {
  std::array<std::uint8_t, kSignatureSize> bytes{};

  bool operator==(const Signature&) const = default;

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  std::string hex() const { return hex_encode(view()); }

  static Signature from_bytes(ByteView raw) {
    if (raw.size() != kSignatureSize) throw Error("signature must be 64 bytes");
    Signature s;
    std::memcpy(s.bytes.data(), raw.data(), kSignatureSize);
    return s;
  }

  static Signature from_hex(std::string_view h) { return from_bytes(hex_decode(h)); }
};

enum class KeyKind { Signing, Agreement };

// Signing keys are Ed25519 (64-byte secret, 32-byte public); agreement keys
// are X25519 (32-byte secret, 32-byte public). Secret bytes stay inside the
// struct; nothing in the library serializes them except the CLI keygen path,
// which exists precisely to write operator key files.
struct KeyPair {
  KeyKind kind;
  Bytes public_key;
  Bytes secret_key;
};

inline KeyPair generate_keypair(KeyKind kind, const std::optional<Bytes>& seed = std::nullopt) {
  crypto_init();
  if (seed && seed->size() != kSeedSize) throw Error("keypair seed must be 32 bytes");
  KeyPair kp;
  kp.kind = kind;
  if (kind == KeyKind::Signing) {
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    if (seed) {
      crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed->data());
    } else {
      crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
    }
  } else {
    kp.secret_key = seed ? *seed : random_bytes(kSeedSize);
    kp.public_key.resize(crypto_scalarmult_BYTES);
    crypto_scalarmult_base(kp.public_key.data(), kp.secret_key.data());
  }
  return kp;
}

inline Signature sign(ByteView signing_secret, ByteView message) {
  crypto_init();
  if (signing_secret.size() != crypto_sign_SECRETKEYBYTES)
    throw Error("signing secret key must be 64 bytes");
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                       signing_secret.data());
  return sig;
}

inline bool verify(ByteView signing_public, ByteView message, const Signature& sig) {
  crypto_init();
  if (signing_public.size() != kPublicKeySize) throw Error("signing public key must be 32 bytes");
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     signing_public.data()) == 0;
}

// HKDF-SHA256 (extract-then-expand) built on libsodium's HMAC-SHA256.
inline Bytes hkdf_sha256(ByteView ikm, ByteView salt, std::string_view info,
                         std::size_t out_len) {
  crypto_init();
  if (out_len == 0 || out_len > 255 * crypto_auth_hmacsha256_BYTES)
    throw Error("hkdf output length out of range");

  // Extract: PRK = HMAC(salt, ikm). An absent salt is a block of zeros.
  std::array<std::uint8_t, crypto_auth_hmacsha256_BYTES> prk;
  {
    crypto_auth_hmacsha256_state st;
    static const std::uint8_t zero_salt[crypto_auth_hmacsha256_BYTES] = {0};
    if (salt.empty()) {
      crypto_auth_hmacsha256_init(&st, zero_salt, sizeof zero_salt);
    } else {
      crypto_auth_hmacsha256_init(&st, salt.data(), salt.size());
    }
    crypto_auth_hmacsha256_update(&st, ikm.data(), ikm.size());
    crypto_auth_hmacsha256_final(&st, prk.data());
  }

  // Expand: T(i) = HMAC(PRK, T(i-1) | info | i).
  Bytes out;
  out.reserve(out_len);
  std::array<std::uint8_t, crypto_auth_hmacsha256_BYTES> block;
  std::size_t block_len = 0;
  std::uint8_t counter = 1;
  while (out.size() < out_len) {
    crypto_auth_hmacsha256_state st;
    crypto_auth_hmacsha256_init(&st, prk.data(), prk.size());
    crypto_auth_hmacsha256_update(&st, block.data(), block_len);
    crypto_auth_hmacsha256_update(&st, reinterpret_cast<const std::uint8_t*>(info.data()),
                                  info.size());
    crypto_auth_hmacsha256_update(&st, &counter, 1);
    crypto_auth_hmacsha256_final(&st, block.data());
    block_len = block.size();
    std::size_t take = std::min(block_len, out_len - out.size());
    out.insert(out.end(), block.begin(), block.begin() + take);
    ++counter;
  }
  return out;
}

inline Bytes hkdf_sha256(ByteView ikm, const Digest& salt, std::string_view info,
                         std::size_t out_len) {
  return hkdf_sha256(ikm, salt.view(), info, out_len);
}

// One AES-256-GCM box: nonce, ciphertext, and detached tag. Used directly for
// sealing and record encryption, and as the symmetric half of the envelope.
struct AeadBox {
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes ciphertext;
  std::array<std::uint8_t, kTagSize> tag{};

  Bytes to_bytes() const {
    Bytes out;
    append_bytes(out, {nonce.data(), nonce.size()});
    append_lp(out, ciphertext);
    append_bytes(out, {tag.data(), tag.size()});
    return out;
  }

  static AeadBox read_from(ByteReader& r) {
    AeadBox box;
    ByteView n = r.take(kNonceSize);
    std::memcpy(box.nonce.data(), n.data(), kNonceSize);
    box.ciphertext = r.take_lp();
    ByteView t = r.take(kTagSize);
    std::memcpy(box.tag.data(), t.data(), kTagSize);
    return box;
  }
};

namespace detail {
inline void require_aes_gcm() {
  crypto_init();
  if (crypto_aead_aes256gcm_is_available() == 0)
    throw Error("AES-256-GCM is not available on this CPU");
}
}  // namespace detail

inline AeadBox aead_seal(ByteView key, ByteView plaintext, ByteView aad) {
  detail::require_aes_gcm();
  if (key.size() != kSymmetricKeySize) throw Error("AEAD key must be 32 bytes");
  AeadBox box;
  randombytes_buf(box.nonce.data(), box.nonce.size());
  box.ciphertext.resize(plaintext.size());
  unsigned long long maclen = 0;
  crypto_aead_aes256gcm_encrypt_detached(box.ciphertext.data(), box.tag.data(), &maclen,
                                         plaintext.data(), plaintext.size(), aad.data(),
                                         aad.size(), nullptr, box.nonce.data(), key.data());
  return box;
}

// Opens an AeadBox, failing atomically: either the full plaintext is returned
// or an AuthError is thrown and nothing is emitted.
inline Bytes aead_open(ByteView key, const AeadBox& box, ByteView aad) {
  detail::require_aes_gcm();
  if (key.size() != kSymmetricKeySize) throw Error("AEAD key must be 32 bytes");
  Bytes plaintext(box.ciphertext.size());
  int rc = crypto_aead_aes256gcm_decrypt_detached(
      plaintext.data(), nullptr, box.ciphertext.data(), box.ciphertext.size(), box.tag.data(),
      aad.data(), aad.size(), box.nonce.data(), key.data());
  if (rc != 0) throw AuthError("AEAD authentication failed");
  return plaintext;
}

// ECIES-style envelope: fresh ephemeral X25519 key, HKDF-SHA256 over the
// shared secret (salted with both public keys), AES-256-GCM over the payload.
// Wire layout: ephemeral_public | nonce | aad_digest | u32be len | ciphertext | tag.
struct EnvelopeCiphertext {
  std::array<std::uint8_t, kPublicKeySize> ephemeral_public{};
  std::array<std::uint8_t, kNonceSize> nonce{};
  Bytes ciphertext;
  std::array<std::uint8_t, kTagSize> tag{};
  Digest aad_digest;

  Bytes to_bytes() const {
    Bytes out;
    append_bytes(out, {ephemeral_public.data(), ephemeral_public.size()});
    append_bytes(out, {nonce.data(), nonce.size()});
    append_bytes(out, aad_digest.view());
    append_lp(out, ciphertext);
    append_bytes(out, {tag.data(), tag.size()});
    return out;
  }

  std::string hex() const { return hex_encode(to_bytes()); }

  static EnvelopeCiphertext from_bytes(ByteView raw) {
    ByteReader r(raw);
    EnvelopeCiphertext env;
    ByteView ep = r.take(kPublicKeySize);
    std::memcpy(env.ephemeral_public.data(), ep.data(), kPublicKeySize);
    ByteView n = r.take(kNonceSize);
    std::memcpy(env.nonce.data(), n.data(), kNonceSize);
    env.aad_digest = Digest::from_bytes(r.take(kDigestSize));
    env.ciphertext = r.take_lp();
    ByteView t = r.take(kTagSize);
    std::memcpy(env.tag.data(), t.data(), kTagSize);
    if (!r.done()) throw Error("trailing bytes after envelope");
    return env;
  }

  static EnvelopeCiphertext from_hex(std::string_view h) { return from_bytes(hex_decode(h)); }
};

namespace detail {
inline Bytes hybrid_key(ByteView shared, ByteView ephemeral_public, ByteView recipient_public) {
  Bytes salt;
  append_bytes(salt, ephemeral_public);
  append_bytes(salt, recipient_public);
  return hkdf_sha256(shared, salt, kHybridKdfInfo, kSymmetricKeySize);
}
}  // namespace detail

inline EnvelopeCiphertext hybrid_encrypt(ByteView recipient_public, ByteView plaintext,
                                         ByteView aad) {
  crypto_init();
  detail::require_aes_gcm();
  if (recipient_public.size() != kPublicKeySize)
    throw Error("recipient public key must be 32 bytes");

  KeyPair eph = generate_keypair(KeyKind::Agreement);
  std::array<std::uint8_t, crypto_scalarmult_BYTES> shared;
  if (crypto_scalarmult(shared.data(), eph.secret_key.data(), recipient_public.data()) != 0)
    throw Error("invalid recipient key");

  Bytes key = detail::hybrid_key({shared.data(), shared.size()}, eph.public_key,
                                 recipient_public);

  EnvelopeCiphertext env;
  std::memcpy(env.ephemeral_public.data(), eph.public_key.data(), kPublicKeySize);
  env.aad_digest = digest(aad);
  randombytes_buf(env.nonce.data(), env.nonce.size());
  env.ciphertext.resize(plaintext.size());
  unsigned long long maclen = 0;
  crypto_aead_aes256gcm_encrypt_detached(env.ciphertext.data(), env.tag.data(), &maclen,
                                         plaintext.data(), plaintext.size(), aad.data(),
                                         aad.size(), nullptr, env.nonce.data(), key.data());
  sodium_memzero(shared.data(), shared.size());
  sodium_memzero(key.data(), key.size());
  return env;
}

inline Bytes hybrid_decrypt(ByteView recipient_secret, const EnvelopeCiphertext& env,
                            ByteView aad) {
  crypto_init();
  detail::require_aes_gcm();
  if (recipient_secret.size() != kSymmetricKeySize)
    throw Error("recipient secret key must be 32 bytes");

  // The bound AAD is checked before any AEAD work.
  if (digest(aad) != env.aad_digest) throw AuthError("associated data mismatch");

  std::array<std::uint8_t, kPublicKeySize> recipient_public;
  crypto_scalarmult_base(recipient_public.data(), recipient_secret.data());

  std::array<std::uint8_t, crypto_scalarmult_BYTES> shared;
  if (crypto_scalarmult(shared.data(), recipient_secret.data(), env.ephemeral_public.data()) != 0)
    throw AuthError("key agreement failed");

  Bytes key = detail::hybrid_key({shared.data(), shared.size()},
                                 {env.ephemeral_public.data(), env.ephemeral_public.size()},
                                 {recipient_public.data(), recipient_public.size()});

  Bytes plaintext(env.ciphertext.size());
  int rc = crypto_aead_aes256gcm_decrypt_detached(
      plaintext.data(), nullptr, env.ciphertext.data(), env.ciphertext.size(), env.tag.data(),
      aad.data(), aad.size(), env.nonce.data(), key.data());
  sodium_memzero(shared.data(), shared.size());
  sodium_memzero(key.data(), key.size());
  if (rc != 0) throw AuthError("envelope authentication failed");
  return plaintext;
}

// A 32-byte data key wrapped under a master key: AES-256-GCM with a fresh
// nonce, ciphertext and tag packed into the fixed 48-byte field.
struct WrappedKey {
  std::array<std::uint8_t, kNonceSize> nonce{};
  std::array<std::uint8_t, kSymmetricKeySize + kTagSize> wrapped{};

  Bytes to_bytes() const {
    Bytes out;
    append_bytes(out, {nonce.data(), nonce.size()});
    append_bytes(out, {wrapped.data(), wrapped.size()});
    return out;
  }

  static WrappedKey read_from(ByteReader& r) {
    WrappedKey wk;
    ByteView n = r.take(kNonceSize);
    std::memcpy(wk.nonce.data(), n.data(), kNonceSize);
    ByteView w = r.take(wk.wrapped.size());
    std::memcpy(wk.wrapped.data(), w.data(), wk.wrapped.size());
    return wk;
  }
};

inline WrappedKey wrap_data_key(ByteView master, ByteView data_key) {
  detail::require_aes_gcm();
  if (master.size() != kSymmetricKeySize || data_key.size() != kSymmetricKeySize)
    throw Error("wrap requires 32-byte keys");
  WrappedKey wk;
  randombytes_buf(wk.nonce.data(), wk.nonce.size());
  unsigned long long maclen = 0;
  crypto_aead_aes256gcm_encrypt_detached(wk.wrapped.data(), wk.wrapped.data() + kSymmetricKeySize,
                                         &maclen, data_key.data(), data_key.size(), nullptr, 0,
                                         nullptr, wk.nonce.data(), master.data());
  return wk;
}

inline Bytes unwrap_data_key(ByteView master, const WrappedKey& wk) {
  detail::require_aes_gcm();
  if (master.size() != kSymmetricKeySize) throw Error("unwrap requires a 32-byte master key");
  Bytes key(kSymmetricKeySize);
  int rc = crypto_aead_aes256gcm_decrypt_detached(
      key.data(), nullptr, wk.wrapped.data(), kSymmetricKeySize,
      wk.wrapped.data() + kSymmetricKeySize, nullptr, 0, wk.nonce.data(), master.data());
  if (rc != 0) throw AuthError("key unwrap failed");
  return key;
}

}  // namespace crag
