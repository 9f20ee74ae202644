// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#ifndef INFHORS_ENTROPY_HPP
#define INFHORS_ENTROPY_HPP

#include <array>
#include <cstdint>
#include <span>

#include "infhors/bytes.hpp"

namespace infhors {

class EntropySource {
public:
    virtual ~EntropySource() = default;
    virtual void fill(std::span<uint8_t> out) = 0;

    Block128 block();
    PrfKey key();
};

/// OS randomness via the libcrypto RNG. Thread-safe.
class SystemEntropy final : public EntropySource {
public:
    void fill(std::span<uint8_t> out) override;
};

/// Deterministic expansion of a seed, for reproducible tests and fixtures.
class DeterministicEntropy final : public EntropySource {
public:
    explicit DeterministicEntropy(std::span<const uint8_t> seed);
    explicit DeterministicEntropy(uint64_t seed);

    void fill(std::span<uint8_t> out) override;

private:
    std::array<uint8_t, 32> state_{};
    uint64_t counter_ = 0;
};

/// Always fails; exercises entropy-failure error paths in tests.
class FailingEntropy final : public EntropySource {
public:
    void fill(std::span<uint8_t> out) override;
};

}  // namespace infhors

#endif
