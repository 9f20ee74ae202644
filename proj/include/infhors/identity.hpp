// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#ifndef INFHORS_IDENTITY_HPP
#define INFHORS_IDENTITY_HPP

#include <cstdint>
#include <span>
#include <string>

#include "infhors/bytes.hpp"

namespace infhors {

/// Signer identity: a raw identifier (e.g. a device address, up to 32
/// bytes) plus its canonical 64-bit PRF encoding — the first 8 bytes of
/// hash_message(raw), big-endian. Canonical collisions are detected at
/// registration, not assumed absent.
struct SignerId {
    Bytes raw;
    uint64_t canonical = 0;

    static SignerId from_raw(std::span<const uint8_t> raw);
    static SignerId from_raw(const std::string& raw);

    bool operator==(const SignerId& other) const {
        return canonical == other.canonical && raw == other.raw;
    }
};

/// Canonical encoding alone, for callers that only hold the raw id.
uint64_t canonical_id(std::span<const uint8_t> raw);

}  // namespace infhors

#endif
