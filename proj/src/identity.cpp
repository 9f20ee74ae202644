// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/identity.hpp"

#include "infhors/errors.hpp"
#include "infhors/symmetric.hpp"

namespace infhors {

uint64_t canonical_id(std::span<const uint8_t> raw) {
    if (raw.empty()) throw FormatError("signer id: raw identifier is empty");
    if (raw.size() > 32)
        throw FormatError("signer id: raw identifier exceeds 32 bytes");
    const Digest256 d = hash_message(raw);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[i];
    return v;
}

SignerId SignerId::from_raw(std::span<const uint8_t> raw) {
    SignerId id;
    id.canonical = canonical_id(raw);
    id.raw.assign(raw.begin(), raw.end());
    return id;
}

SignerId SignerId::from_raw(const std::string& raw) {
    return from_raw(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(raw.data()), raw.size()));
}

}  // namespace infhors
