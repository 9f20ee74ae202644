// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/hors.hpp"

#include <bit>

#include "infhors/errors.hpp"

namespace infhors {

HorsParams HorsParams::make(uint32_t k, uint32_t t) {
    if (k == 0) throw FormatError("HORS: k must be positive");
    if (t < 2 || !std::has_single_bit(t))
        throw FormatError("HORS: t must be a power of two >= 2");
    HorsParams p;
    p.k = k;
    p.t = t;
    p.chunk_bits = static_cast<uint32_t>(std::bit_width(t) - 1);
    if (static_cast<uint64_t>(p.k) * p.chunk_bits > 256)
        throw FormatError("HORS: k*log2(t) exceeds digest width");
    return p;
}

IndexVector derive_indices(const HorsParams& params, const Digest256& digest) {
    IndexVector out;
    out.indices.reserve(params.k);
    // Consume the first k*chunk_bits digest bits MSB-first; each chunk is
    // read big-endian, its first bit becoming the index's top bit.
    size_t bit_pos = 0;
    for (uint32_t i = 0; i < params.k; ++i) {
        uint32_t v = 0;
        for (uint32_t b = 0; b < params.chunk_bits; ++b, ++bit_pos) {
            const uint8_t byte = digest.bytes[bit_pos >> 3];
            const uint32_t bit = (byte >> (7 - (bit_pos & 7))) & 1u;
            v = (v << 1) | bit;
        }
        out.indices.push_back(v);
    }
    return out;
}

std::pair<HorsSecretKey, HorsPublicKey> hors_keygen(const HorsParams& params,
                                                    EntropySource& entropy) {
    HorsSecretKey sk;
    HorsPublicKey pk;
    sk.secrets.reserve(params.t);
    pk.images.reserve(params.t);
    for (uint32_t i = 0; i < params.t; ++i) {
        const Block128 s = entropy.block();
        pk.images.push_back(dm_owf(s));
        sk.secrets.push_back(s);
    }
    return {std::move(sk), std::move(pk)};
}

std::pair<HorsSecretKey, HorsPublicKey> hors_keygen_from_seed(
    const HorsParams& params, const PrfKey& seed) {
    HorsSecretKey sk;
    HorsPublicKey pk;
    sk.secrets.reserve(params.t);
    pk.images.reserve(params.t);
    for (uint32_t i = 0; i < params.t; ++i) {
        const Block128 s = prf(seed, i, TAG_CHUNK);
        pk.images.push_back(dm_owf(s));
        sk.secrets.push_back(s);
    }
    return {std::move(sk), std::move(pk)};
}

std::vector<Block128> hors_sign(const HorsParams& params,
                                const HorsSecretKey& sk,
                                std::span<const uint8_t> message) {
    if (sk.secrets.size() != params.t)
        throw FormatError("HORS: secret pool size mismatch");
    const Digest256 digest = hash_message(message);
    const IndexVector idx = derive_indices(params, digest);
    std::vector<Block128> sigma;
    sigma.reserve(params.k);
    for (uint32_t i : idx.indices) sigma.push_back(sk.secrets[i]);
    return sigma;
}

bool hors_verify(const HorsParams& params, const HorsPublicKey& pk,
                 std::span<const uint8_t> message,
                 std::span<const Block128> sigma) {
    if (pk.images.size() != params.t)
        throw FormatError("HORS: public pool size mismatch");
    if (sigma.size() != params.k)
        throw FormatError("HORS: signature element count mismatch");
    const Digest256 digest = hash_message(message);
    const IndexVector idx = derive_indices(params, digest);
    bool ok = true;
    for (uint32_t i = 0; i < params.k; ++i)
        ok = cmp_eq(dm_owf(sigma[i]), pk.images[idx.indices[i]]) && ok;
    return ok;
}

}  // namespace infhors
