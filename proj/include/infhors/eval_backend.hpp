// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// The encrypted-evaluation contract: keygen / enc / eval / reveal, narrowed
// to the three evaluations the protocol needs — PRF under an encrypted key,
// OWF-of-PRF under an encrypted key, and equality comparison under
// encryption. Protocol modules are written against this interface only, so
// any backend satisfying the contract yields identical accept/reject
// verdicts.

#ifndef INFHORS_EVAL_BACKEND_HPP
#define INFHORS_EVAL_BACKEND_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "infhors/bytes.hpp"
#include "infhors/entropy.hpp"

namespace infhors {

enum class CiphertextKind : uint8_t {
    KeyMaterial = 0x01,
    OwfImage = 0x02,
    Bit = 0x03,
};

const char* kind_name(CiphertextKind kind);

/// Opaque ciphertext. Wire framing:
/// [4-byte backend id][1-byte kind][4-byte big-endian payload length][payload]
struct Ciphertext {
    uint32_t backend_id = 0;
    CiphertextKind kind = CiphertextKind::KeyMaterial;
    Bytes payload;

    Bytes encode() const;
    void encode_into(Bytes& out) const;
    static Ciphertext decode(ByteReader& reader);
    static Ciphertext decode(std::span<const uint8_t> data);
};

/// Backend evaluation/encryption key. Enough to Enc and Eval on its own.
struct PublicPart {
    uint32_t backend_id = 0;
    Bytes blob;

    Bytes encode() const;
    void encode_into(Bytes& out) const;
    static PublicPart decode(ByteReader& reader);
};

/// Backend decryption key. Enough to Dec on its own.
struct SecretPart {
    uint32_t backend_id = 0;
    Bytes blob;
};

struct BackendKeyPair {
    SecretPart secret_part;
    PublicPart public_part;
    std::string params_desc;  // I_FHE descriptor, informational
};

/// Which ciphertext kinds a holder may decrypt. The verifier-facing policy
/// contains only Bit.
struct RevealPolicy {
    bool key_material = false;
    bool owf_image = false;
    bool bit = false;

    bool allows(CiphertextKind kind) const;

    static RevealPolicy verifier() { return {false, false, true}; }
    static RevealPolicy full() { return {true, true, true}; }
};

/// A decryption key bound to a policy; reveal() enforces the policy before
/// touching the ciphertext.
struct RevealCapability {
    SecretPart secret;
    RevealPolicy policy;
};

/// Per-instance evaluation counters. eval_prf and eval_owf_prf are the
/// key-construction evaluations; eval_cmp is the online comparison.
struct EvalCounters {
    uint64_t enc = 0;
    uint64_t eval_prf = 0;
    uint64_t eval_owf_prf = 0;
    uint64_t eval_cmp = 0;
    uint64_t reveal = 0;

    uint64_t construction_evals() const { return eval_prf + eval_owf_prf; }
};

class EvalBackend {
public:
    virtual ~EvalBackend() = default;

    virtual uint32_t id() const = 0;
    virtual std::string name() const = 0;

    /// Fresh key pair; deterministic given a seeded entropy source.
    /// Throws FormatError for unsupported security levels (only 128).
    virtual BackendKeyPair keygen(unsigned security_level,
                                  EntropySource& entropy) = 0;

    /// Randomized encryption: equal plaintexts yield unequal payloads.
    virtual Ciphertext enc(const PublicPart& pk, const Block128& plaintext,
                           CiphertextKind kind) = 0;

    /// Decryption equals prf(Dec(encrypted_key), input, domain_tag).
    virtual Ciphertext eval_prf(const PublicPart& pk,
                                const Ciphertext& encrypted_key,
                                uint64_t input, uint8_t domain_tag) = 0;

    /// Decryption equals dm_owf(prf(Dec(encrypted_key), index, domain_tag)).
    virtual Ciphertext eval_owf_prf(const PublicPart& pk,
                                    const Ciphertext& encrypted_key,
                                    uint64_t index, uint8_t domain_tag) = 0;

    /// Decryption is 1 iff Dec(a) == Dec(b), else 0.
    virtual Ciphertext eval_cmp(const PublicPart& pk, const Ciphertext& a,
                                const Ciphertext& b) = 0;

    /// Plaintext of c, if the capability's policy allows c.kind; otherwise
    /// throws PolicyViolation. Block kinds return 16 bytes, Bit returns one
    /// byte (0 or 1).
    virtual Bytes reveal(const RevealCapability& cap, const Ciphertext& c) = 0;

    /// A bit-only reveal capability derivable from public data, when the
    /// backend supports it (the reference backend does; a lattice backend
    /// would distribute this out of band and return nothing here).
    virtual std::unique_ptr<RevealCapability> derive_verifier_capability(
        const PublicPart& pk) = 0;

    EvalCounters counters() const;
    void reset_counters();

protected:
    void count_enc() { enc_count_.fetch_add(1, std::memory_order_relaxed); }
    void count_eval_prf() { prf_count_.fetch_add(1, std::memory_order_relaxed); }
    void count_eval_owf() { owf_count_.fetch_add(1, std::memory_order_relaxed); }
    void count_eval_cmp() { cmp_count_.fetch_add(1, std::memory_order_relaxed); }
    void count_reveal() { reveal_count_.fetch_add(1, std::memory_order_relaxed); }

private:
    std::atomic<uint64_t> enc_count_{0};
    std::atomic<uint64_t> prf_count_{0};
    std::atomic<uint64_t> owf_count_{0};
    std::atomic<uint64_t> cmp_count_{0};
    std::atomic<uint64_t> reveal_count_{0};
};

}  // namespace infhors

#endif
