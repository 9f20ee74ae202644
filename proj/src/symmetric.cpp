// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/symmetric.hpp"

#include <openssl/evp.h>

#include "infhors/errors.hpp"

namespace infhors {

namespace {

thread_local OpCounters t_counters;

struct CipherCtx {
    EVP_CIPHER_CTX* ctx;
    CipherCtx() : ctx(EVP_CIPHER_CTX_new()) {
        if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
    }
    ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
    CipherCtx(const CipherCtx&) = delete;
    CipherCtx& operator=(const CipherCtx&) = delete;
};

// Single-block AES-128 encryption, no padding, no mode chaining.
Block128 aes128_block(std::span<const uint8_t, 16> key,
                      std::span<const uint8_t, 16> block) {
    CipherCtx c;
    if (EVP_EncryptInit_ex(c.ctx, EVP_aes_128_ecb(), nullptr, key.data(),
                           nullptr) != 1)
        throw Error("AES-128 init failed");
    EVP_CIPHER_CTX_set_padding(c.ctx, 0);
    Block128 out;
    int len = 0;
    if (EVP_EncryptUpdate(c.ctx, out.bytes.data(), &len, block.data(),
                          static_cast<int>(block.size())) != 1 ||
        len != 16)
        throw Error("AES-128 block encryption failed");
    return out;
}

}  // namespace

Block128 prf(const PrfKey& key, uint64_t input, uint8_t domain_tag) {
    t_counters.prf_calls++;
    std::array<uint8_t, 16> msg{};
    msg[0] = domain_tag;
    for (int i = 0; i < 8; ++i)
        msg[8 + i] = static_cast<uint8_t>(input >> (8 * (7 - i)));
    return aes128_block(key.bytes, msg);
}

Digest256 hash_message(std::span<const uint8_t> message) {
    t_counters.hash_calls++;
    Digest256 out;
    unsigned int len = 0;
    if (EVP_Digest(message.data(), message.size(), out.bytes.data(), &len,
                   EVP_sha256(), nullptr) != 1 ||
        len != out.bytes.size())
        throw Error("SHA-256 failed");
    return out;
}

Block128 dm_owf(const Block128& input) {
    t_counters.owf_calls++;
    static constexpr std::array<uint8_t, 16> iv{};  // B0, fixed all-zero
    Block128 out = aes128_block(input.bytes, iv);
    for (size_t i = 0; i < out.bytes.size(); ++i)
        out.bytes[i] ^= input.bytes[i];
    return out;
}

bool cmp_eq(const Block128& a, const Block128& b) {
    uint8_t diff = 0;
    for (size_t i = 0; i < a.bytes.size(); ++i)
        diff |= static_cast<uint8_t>(a.bytes[i] ^ b.bytes[i]);
    return diff == 0;
}

OpCounters op_counters() { return t_counters; }

void reset_op_counters() { t_counters = OpCounters{}; }

}  // namespace infhors
