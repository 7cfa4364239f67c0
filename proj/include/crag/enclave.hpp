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

#include <functional>
#include <utility>

#include "crag/crypto.hpp"

// Software-emulated trusted execution environment. The enclave boundary is a
// module boundary: secrets (device secret, derived private keys, unwrapped
// data keys, decrypted plaintexts) are reachable only through an Enclave
// instance, and privileged operations only inside a Session handed to
// Enclave::run. The isolation claim is behavioural, enforced by the API and
// exercised by canary-scanning tests, not by hardware.

namespace crag {

// Fingerprint of what the enclave is running: digest(code_identity | config).
// Two enclaves with the same code and config produce the same measurement on
// any device; changing either byte stream changes it.
inline Digest compute_measurement(std::string_view code_identity, ByteView config) {
  Bytes m;
  append_bytes(m, as_bytes(code_identity));
  append_bytes(m, config);
  return digest(m);
}

// Attestation report: the enclave's measurement and agreed report data, bound
// to its signing key and endorsed by the hardware-root key. Wire layout:
// measurement | report_data | enclave_signing_public | root_signature, where
// the root signature covers the first three fields.
struct AttestationReport {
  Digest measurement;
  Digest report_data;
  std::array<std::uint8_t, kPublicKeySize> enclave_signing_public{};
  Signature root_signature;

  Bytes signed_portion() const {
    Bytes out;
    append_bytes(out, measurement.view());
    append_bytes(out, report_data.view());
    append_bytes(out, {enclave_signing_public.data(), enclave_signing_public.size()});
    return out;
  }

  Bytes to_bytes() const {
    Bytes out = signed_portion();
    append_bytes(out, root_signature.view());
    return out;
  }

  std::string hex() const { return hex_encode(to_bytes()); }

  static AttestationReport from_bytes(ByteView raw) {
    ByteReader r(raw);
    AttestationReport rep;
    rep.measurement = Digest::from_bytes(r.take(kDigestSize));
    rep.report_data = Digest::from_bytes(r.take(kDigestSize));
    ByteView pk = r.take(kPublicKeySize);
    std::memcpy(rep.enclave_signing_public.data(), pk.data(), kPublicKeySize);
    rep.root_signature = Signature::from_bytes(r.take(kSignatureSize));
    if (!r.done()) throw Error("trailing bytes after attestation report");
    return rep;
  }

  static AttestationReport from_hex(std::string_view h) { return from_bytes(hex_decode(h)); }
};

struct ReportVerdict {
  enum class Reason { ok, bad_root_signature, measurement_mismatch };
  bool accepted = false;
  Reason reason = Reason::ok;
};

// Verifies a report against a trusted root public key and the measurement the
// verifier expects. The endorsement is checked first; an unendorsed report's
// measurement field is meaningless and is not compared.
inline ReportVerdict verify_report(const AttestationReport& report, ByteView root_public,
                                   const Digest& expected_measurement) {
  if (!verify(root_public, report.signed_portion(), report.root_signature))
    return {false, ReportVerdict::Reason::bad_root_signature};
  if (report.measurement != expected_measurement)
    return {false, ReportVerdict::Reason::measurement_mismatch};
  return {true, ReportVerdict::Reason::ok};
}

// Sealed blob: data encrypted to a specific (device, measurement) pair. The
// sealing measurement travels in the clear so a rebooted enclave can detect a
// foreign seal before attempting decryption; the AEAD binds it as AAD.
struct SealedBlob {
  Digest sealed_by;
  AeadBox box;

  Bytes to_bytes() const {
    Bytes out;
    append_bytes(out, sealed_by.view());
    Bytes b = box.to_bytes();
    append_bytes(out, b);
    return out;
  }

  static SealedBlob from_bytes(ByteView raw) {
    ByteReader r(raw);
    SealedBlob s;
    s.sealed_by = Digest::from_bytes(r.take(kDigestSize));
    s.box = AeadBox::read_from(r);
    if (!r.done()) throw Error("trailing bytes after sealed blob");
    return s;
  }
};

class Enclave;

Enclave boot_enclave(std::string_view code_identity, ByteView config, ByteView device_secret);

class Enclave {
 public:
  // Privileged operations, reachable only inside Enclave::run. A Session
  // cannot be copied or stored beyond the extent of the call.
  class Session {
   public:
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    Bytes decrypt_envelope(const EnvelopeCiphertext& env, ByteView aad) const {
      return hybrid_decrypt(enclave_.agreement_secret_, env, aad);
    }

    Bytes unseal(const SealedBlob& blob) const { return enclave_.unseal_internal(blob); }

    Bytes unwrap(ByteView master, const WrappedKey& wk) const {
      return unwrap_data_key(master, wk);
    }

    Bytes open_box(ByteView key, const AeadBox& box, ByteView aad) const {
      return aead_open(key, box, aad);
    }

    Signature sign(ByteView message) const { return enclave_.sign(message); }

    const Enclave& enclave() const { return enclave_; }

   private:
    friend class Enclave;
    explicit Session(const Enclave& e) : enclave_(e) {}
    const Enclave& enclave_;
  };

  const Digest& measurement() const { return measurement_; }

  // pk_TEE: the public half of the enclave's agreement key. Callers encrypt
  // to it; only code running inside this enclave can decrypt.
  ByteView encryption_public_key() const { return agreement_public_; }

  ByteView signing_public_key() const { return signing_public_; }

  Signature sign(ByteView message) const { return crag::sign(signing_secret_, message); }

  // Produces a report over caller-chosen report data, endorsed by the root
  // signing key. The root secret models the hardware vendor key; it is passed
  // in rather than held, because the enclave does not own it.
  AttestationReport attest(const Digest& report_data, ByteView root_signing_secret) const {
    AttestationReport rep;
    rep.measurement = measurement_;
    rep.report_data = report_data;
    std::memcpy(rep.enclave_signing_public.data(), signing_public_.data(), kPublicKeySize);
    rep.root_signature = crag::sign(root_signing_secret, rep.signed_portion());
    return rep;
  }

  // Seals data so only an enclave with the same measurement on the same
  // device can recover it. The measurement is bound as AAD.
  SealedBlob seal(ByteView plaintext) const {
    SealedBlob blob;
    blob.sealed_by = measurement_;
    blob.box = aead_seal(sealing_key_, plaintext, measurement_.view());
    return blob;
  }

  // Runs a function with session (privileged) access. The session ends when
  // the function returns; plaintext results must not escape by design of the
  // caller, and tests scan for exactly that.
  template <typename Fn>
  decltype(auto) run(Fn&& fn) const {
    Session session(*this);
    return std::forward<Fn>(fn)(session);
  }

 private:
  friend Enclave boot_enclave(std::string_view, ByteView, ByteView);

  Enclave() = default;

  Bytes unseal_internal(const SealedBlob& blob) const {
    if (blob.sealed_by != measurement_)
      throw AuthError("sealed blob was produced by a different measurement");
    return aead_open(sealing_key_, blob.box, measurement_.view());
  }

  Digest measurement_;
  Bytes device_secret_;
  Bytes sealing_key_;
  Bytes signing_secret_;
  Bytes signing_public_;
  Bytes agreement_secret_;
  Bytes agreement_public_;
};

// Derives the enclave's identity deterministically from the device secret and
// the measurement: same device + same code + same config always yields the
// same keys, so a clean reboot can decrypt its own sealed state, while any
// code or config change yields fresh keys.
inline Enclave boot_enclave(std::string_view code_identity, ByteView config,
                            ByteView device_secret) {
  crypto_init();
  if (code_identity.empty()) throw Error("code identity must not be empty");
  if (device_secret.size() != kSymmetricKeySize) throw Error("device secret must be 32 bytes");

  Enclave e;
  e.measurement_ = compute_measurement(code_identity, config);
  e.device_secret_.assign(device_secret.begin(), device_secret.end());

  e.sealing_key_ = hkdf_sha256(device_secret, e.measurement_, "crag/seal/v1", kSymmetricKeySize);

  Bytes sign_seed =
      hkdf_sha256(device_secret, e.measurement_, "crag/enclave-sign/v1", kSeedSize);
  KeyPair sk = generate_keypair(KeyKind::Signing, sign_seed);
  e.signing_secret_ = std::move(sk.secret_key);
  e.signing_public_ = std::move(sk.public_key);

  Bytes agree_seed =
      hkdf_sha256(device_secret, e.measurement_, "crag/enclave-agree/v1", kSeedSize);
  KeyPair ak = generate_keypair(KeyKind::Agreement, agree_seed);
  e.agreement_secret_ = std::move(ak.secret_key);
  e.agreement_public_ = std::move(ak.public_key);

  sodium_memzero(sign_seed.data(), sign_seed.size());
  sodium_memzero(agree_seed.data(), agree_seed.size());
  return e;
}

}  // namespace crag
