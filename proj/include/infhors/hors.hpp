// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// One-time HORS signatures parameterized by (k, t): a signature reveals, per
// message, the hash-selected k-subset of t precommitted secrets. Used both
// directly and as the structural core of the master-key scheme.

#ifndef INFHORS_HORS_HPP
#define INFHORS_HORS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "infhors/bytes.hpp"
#include "infhors/entropy.hpp"
#include "infhors/symmetric.hpp"

namespace infhors {

struct HorsParams {
    uint32_t k = 16;          // revealed chunks per signature
    uint32_t t = 1024;        // secret-pool size, power of two
    uint32_t chunk_bits = 10; // log2(t)

    /// Validates and derives chunk_bits; throws FormatError on bad (k, t).
    static HorsParams make(uint32_t k, uint32_t t);
    static HorsParams standard() { return {}; }

    bool operator==(const HorsParams&) const = default;
};

struct HorsSecretKey {
    std::vector<Block128> secrets;  // exactly t entries
};

struct HorsPublicKey {
    std::vector<Block128> images;  // images[i] = dm_owf(secrets[i])
};

/// k indices into [0, t); duplicates permitted.
struct IndexVector {
    std::vector<uint32_t> indices;
};

/// Splits the leading k*chunk_bits bits of the digest, MSB-first within
/// bytes, into big-endian chunk_bits-wide indices.
IndexVector derive_indices(const HorsParams& params, const Digest256& digest);

/// Fresh key pair from entropy (the random-key path).
std::pair<HorsSecretKey, HorsPublicKey> hors_keygen(const HorsParams& params,
                                                    EntropySource& entropy);

/// Seed-expanded key pair: secrets[i] = prf(seed, i, TAG_CHUNK). This is the
/// derivation the signer's per-state keys use, so both the random-key and the
/// derived-key shape are representable.
std::pair<HorsSecretKey, HorsPublicKey> hors_keygen_from_seed(
    const HorsParams& params, const PrfKey& seed);

/// sigma = secrets at the positions derived from hash_message(message).
/// One-time use is the caller's contract.
std::vector<Block128> hors_sign(const HorsParams& params,
                                const HorsSecretKey& sk,
                                std::span<const uint8_t> message);

/// True iff dm_owf(sigma[j]) == images[index[j]] for all j. A malformed
/// sigma length is a FormatError, distinct from a false verdict.
bool hors_verify(const HorsParams& params, const HorsPublicKey& pk,
                 std::span<const uint8_t> message,
                 std::span<const Block128> sigma);

}  // namespace infhors

#endif
