// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/eval_backend.hpp"

#include "infhors/errors.hpp"

namespace infhors {

const char* kind_name(CiphertextKind kind) {
    switch (kind) {
        case CiphertextKind::KeyMaterial:
            return "key-material";
        case CiphertextKind::OwfImage:
            return "owf-image";
        case CiphertextKind::Bit:
            return "bit";
    }
    return "unknown";
}

namespace {

bool valid_kind(uint8_t v) {
    return v == static_cast<uint8_t>(CiphertextKind::KeyMaterial) ||
           v == static_cast<uint8_t>(CiphertextKind::OwfImage) ||
           v == static_cast<uint8_t>(CiphertextKind::Bit);
}

}  // namespace

Bytes Ciphertext::encode() const {
    Bytes out;
    encode_into(out);
    return out;
}

void Ciphertext::encode_into(Bytes& out) const {
    put_u32(out, backend_id);
    out.push_back(static_cast<uint8_t>(kind));
    put_u32(out, static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
}

Ciphertext Ciphertext::decode(ByteReader& reader) {
    Ciphertext c;
    c.backend_id = reader.u32();
    const uint8_t kind_byte = reader.u8();
    if (!valid_kind(kind_byte))
        throw FormatError("ciphertext: unknown kind byte");
    c.kind = static_cast<CiphertextKind>(kind_byte);
    const uint32_t len = reader.u32();
    c.payload = reader.take(len);
    return c;
}

Ciphertext Ciphertext::decode(std::span<const uint8_t> data) {
    ByteReader reader(data);
    Ciphertext c = decode(reader);
    if (!reader.done())
        throw FormatError("ciphertext: trailing bytes after payload");
    return c;
}

Bytes PublicPart::encode() const {
    Bytes out;
    encode_into(out);
    return out;
}

void PublicPart::encode_into(Bytes& out) const {
    put_u32(out, backend_id);
    put_u32(out, static_cast<uint32_t>(blob.size()));
    out.insert(out.end(), blob.begin(), blob.end());
}

PublicPart PublicPart::decode(ByteReader& reader) {
    PublicPart p;
    p.backend_id = reader.u32();
    const uint32_t len = reader.u32();
    p.blob = reader.take(len);
    return p;
}

bool RevealPolicy::allows(CiphertextKind kind) const {
    switch (kind) {
        case CiphertextKind::KeyMaterial:
            return key_material;
        case CiphertextKind::OwfImage:
            return owf_image;
        case CiphertextKind::Bit:
            return bit;
    }
    return false;
}

EvalCounters EvalBackend::counters() const {
    EvalCounters c;
    c.enc = enc_count_.load(std::memory_order_relaxed);
    c.eval_prf = prf_count_.load(std::memory_order_relaxed);
    c.eval_owf_prf = owf_count_.load(std::memory_order_relaxed);
    c.eval_cmp = cmp_count_.load(std::memory_order_relaxed);
    c.reveal = reveal_count_.load(std::memory_order_relaxed);
    return c;
}

void EvalBackend::reset_counters() {
    enc_count_.store(0, std::memory_order_relaxed);
    prf_count_.store(0, std::memory_order_relaxed);
    owf_count_.store(0, std::memory_order_relaxed);
    cmp_count_.store(0, std::memory_order_relaxed);
    reveal_count_.store(0, std::memory_order_relaxed);
}

}  // namespace infhors
