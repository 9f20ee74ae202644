// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// The master-key scheme: a constant-size public key — the encryption of the
// master secret under the backend public key — from which a verifier
// reconstructs any signer's one-time HORS public key under encryption, for
// any identity and counter, without touching secret material.

#ifndef INFHORS_INFHORS_HPP
#define INFHORS_INFHORS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "infhors/bytes.hpp"
#include "infhors/eval_backend.hpp"
#include "infhors/hors.hpp"
#include "infhors/identity.hpp"

namespace infhors {

struct SystemParams {
    HorsParams hors = HorsParams::standard();
    unsigned backend_level = 128;
    Block128 dm_iv{};  // fixed all-zero initial value for the OWF

    static SystemParams standard() { return {}; }
};

/// The distributable public key: identical for every verifier, constant in
/// the number of signers. File format: [public part framing][mpk framing].
struct DistributablePk {
    PublicPart backend_public;
    Ciphertext mpk;  // kind=KeyMaterial, decrypts to msk

    Bytes encode() const;
    static DistributablePk decode(std::span<const uint8_t> data);
};

/// Everything the key authority retains. msk and backend_secret never leave
/// this structure except into the separately permissioned authority file.
struct MasterKeyMaterial {
    PrfKey msk;
    Ciphertext mpk;
    PublicPart backend_public;
    SecretPart backend_secret;
};

/// A signer's entire persistent secret: seed, counter, and the counter
/// policy ceiling. 24 bytes of secret+counter material.
struct SignerSeedState {
    SignerId id;
    PrfKey gamma;
    uint64_t counter = 0;
    uint64_t max_counter = UINT64_MAX;  // configurable signing-query cap

    /// Secret+counter material only: gamma || counter, 24 bytes.
    Bytes encode_secret_material() const;
};

/// Wire signature: k chunks then the counter.
/// Serialized as [16 bytes x k chunks][8-byte big-endian counter];
/// 264 bytes at the default k=16.
struct InfHorsSignature {
    std::vector<Block128> chunks;
    uint64_t counter = 0;

    Bytes encode() const;
    static InfHorsSignature decode(const HorsParams& params,
                                   std::span<const uint8_t> data);
};

/// Encrypted one-time public key for one (signer, counter): the full map of
/// t components, or a partial map covering exactly the indices a known
/// message needs.
struct EncryptedOneTimeKey {
    uint64_t signer_canonical = 0;
    uint64_t counter = 0;
    bool full = false;
    std::map<uint32_t, Ciphertext> components;

    bool covers(uint32_t index) const { return components.contains(index); }

    Bytes encode() const;
    static EncryptedOneTimeKey decode(std::span<const uint8_t> data);
};

struct KeygenResult {
    DistributablePk pk;
    std::vector<SignerSeedState> signers;
    MasterKeyMaterial authority;
};

/// System key generation for a set of pairwise-distinct signer ids. Every
/// signer receives only (id, gamma, counter=0); the distributable PK is the
/// same object regardless of how many signers exist.
KeygenResult keygen(const SystemParams& params, EvalBackend& backend,
                    std::span<const SignerId> ids, EntropySource& entropy);

/// One signature at the state's current counter; increments the counter.
/// The caller persists the incremented state before releasing the signature
/// (write-ahead contract). Costs exactly k+1 PRF calls and 1 hash call.
/// Throws StateError once the counter reaches the policy ceiling.
InfHorsSignature sign(const SystemParams& params, SignerSeedState& state,
                      std::span<const uint8_t> message);

/// Full one-time-key construction: all t components for (signer, counter),
/// from public data only.
EncryptedOneTimeKey construct_pk(const SystemParams& params,
                                 EvalBackend& backend,
                                 const DistributablePk& pk,
                                 uint64_t signer_canonical, uint64_t counter);

/// k-component construction for a known index set (deduplicated).
EncryptedOneTimeKey construct_pk_partial(const SystemParams& params,
                                         EvalBackend& backend,
                                         const DistributablePk& pk,
                                         uint64_t signer_canonical,
                                         uint64_t counter,
                                         const IndexVector& indices);

/// Encrypted verification: per revealed chunk, OWF locally, encrypt, compare
/// under encryption against the constructed component, reveal only the
/// comparison bit. All k comparisons are evaluated; the verdict is their
/// conjunction.
///
/// Throws StateError when sigma.counter != otk.counter, CoverageError when a
/// partial otk misses a needed index, PolicyViolation if the capability
/// cannot reveal bits.
bool verify(const SystemParams& params, EvalBackend& backend,
            const DistributablePk& pk, const EncryptedOneTimeKey& otk,
            std::span<const uint8_t> message, const InfHorsSignature& sigma,
            const RevealCapability& reveal);

/// Cache interface for precomputed one-time keys; the online path performs
/// zero construction evaluations on a hit.
class OtkStore {
public:
    virtual ~OtkStore() = default;
    virtual std::optional<EncryptedOneTimeKey> get(uint64_t signer_canonical,
                                                   uint64_t counter) = 0;
    virtual void put(EncryptedOneTimeKey otk) = 0;
};

/// Online/offline verification: use the cached one-time key when present,
/// fall back to on-demand full construction (and cache it) otherwise.
/// Verdict is identical to verify() with a freshly constructed key.
bool verify_online_offline(const SystemParams& params, EvalBackend& backend,
                           const DistributablePk& pk, OtkStore& cache,
                           uint64_t signer_canonical,
                           std::span<const uint8_t> message,
                           const InfHorsSignature& sigma,
                           const RevealCapability& reveal);

}  // namespace infhors

#endif
