// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/entropy.hpp"

#include <openssl/rand.h>

#include "infhors/errors.hpp"
#include "infhors/symmetric.hpp"

namespace infhors {

Block128 EntropySource::block() {
    Block128 out;
    fill(out.bytes);
    return out;
}

PrfKey EntropySource::key() {
    PrfKey out;
    fill(out.bytes);
    return out;
}

void SystemEntropy::fill(std::span<uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
        throw EntropyError("system entropy source failed");
}

DeterministicEntropy::DeterministicEntropy(std::span<const uint8_t> seed) {
    Digest256 d = hash_message(seed);
    state_ = d.bytes;
}

DeterministicEntropy::DeterministicEntropy(uint64_t seed) {
    Bytes enc;
    put_u64(enc, seed);
    Digest256 d = hash_message(enc);
    state_ = d.bytes;
}

void DeterministicEntropy::fill(std::span<uint8_t> out) {
    size_t written = 0;
    while (written < out.size()) {
        Bytes input(state_.begin(), state_.end());
        put_u64(input, counter_++);
        Digest256 block = hash_message(input);
        size_t n = std::min(block.bytes.size(), out.size() - written);
        std::memcpy(out.data() + written, block.bytes.data(), n);
        written += n;
    }
}

void FailingEntropy::fill(std::span<uint8_t>) {
    throw EntropyError("entropy source unavailable");
}

}  // namespace infhors
