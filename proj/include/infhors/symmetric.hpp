// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Deterministic symmetric primitives shared by every other module: the keyed
// PRF, the message hash H, the Davies-Meyer one-way function f, and the
// plaintext equality comparison CMP. All four are pure functions and safe for
// unrestricted concurrent use.

#ifndef INFHORS_SYMMETRIC_HPP
#define INFHORS_SYMMETRIC_HPP

#include <cstdint>
#include <span>

#include "infhors/bytes.hpp"

namespace infhors {

// Domain tags keep the three PRF uses in separate input spaces.
inline constexpr uint8_t TAG_SEED = 0x01;   // per-signer seed derivation
inline constexpr uint8_t TAG_STATE = 0x02;  // per-state key derivation
inline constexpr uint8_t TAG_CHUNK = 0x03;  // chunk / pool-element derivation

/// Keyed PRF: one AES-128 block encryption of
/// [domain_tag || 7 zero bytes || input as 8-byte big-endian].
/// Bijective in `input` for fixed key and tag.
Block128 prf(const PrfKey& key, uint64_t input, uint8_t domain_tag);

/// SHA-256 of the exact input bytes.
Digest256 hash_message(std::span<const uint8_t> message);

/// Davies-Meyer one-way function over a single block:
/// E_input(B0) xor input with B0 the all-zero block.
Block128 dm_owf(const Block128& input);

/// Constant-time equality over the full 16 bytes.
bool cmp_eq(const Block128& a, const Block128& b);

/// Thread-local invocation counters; the bench harness and the
/// operation-count tests read these around a measured call.
struct OpCounters {
    uint64_t prf_calls = 0;
    uint64_t hash_calls = 0;
    uint64_t owf_calls = 0;
};

OpCounters op_counters();
void reset_op_counters();

}  // namespace infhors

#endif
