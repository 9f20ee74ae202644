// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Independent test oracle. Everything here is implemented from first
// principles on purpose — table-free AES-128 with a computed S-box, SHA-256
// with computed round constants, a naive bit slicer — so agreement with the
// library is a genuine dual-route check, not the same code twice.

#ifndef INFHORS_TESTS_ORACLE_HPP
#define INFHORS_TESTS_ORACLE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Block = std::array<uint8_t, 16>;
using Digest = std::array<uint8_t, 32>;

Block aes128_encrypt(const Block& key, const Block& plaintext);
Digest sha256(const std::vector<uint8_t>& message);

/// [tag || 7 zero bytes || 8-byte big-endian input], AES-encrypted.
Block prf(const Block& key, uint64_t input, uint8_t tag);

/// Davies-Meyer: E_input(0^16) xor input.
Block dm_owf(const Block& input);

/// First k chunk_bits-wide values from the digest, by materializing the bit
/// string and folding each chunk most-significant-bit first.
std::vector<uint32_t> slice_indices(const Digest& digest, uint32_t k,
                                    uint32_t chunk_bits);

// Plaintext pipeline of the master-key scheme (tags 0x01/0x02/0x03).
Block gamma(const Block& msk, uint64_t canonical_id);
Block state_key(const Block& g, uint64_t counter);
Block chunk(const Block& sk, uint64_t index);
Block image(const Block& sk, uint64_t index);  // dm_owf(chunk)

/// NAME=hexvalue files.
std::map<std::string, std::vector<uint8_t>> load_kat(
    const std::filesystem::path& path);

std::vector<uint8_t> unhex(const std::string& hex);
Block block_of(const std::vector<uint8_t>& bytes);

}  // namespace oracle

#endif
