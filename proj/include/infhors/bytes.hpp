// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#ifndef INFHORS_BYTES_HPP
#define INFHORS_BYTES_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace infhors {

using Bytes = std::vector<uint8_t>;

/// 16-byte value: PRF output, DM chaining value, signature chunk, OWF image.
struct Block128 {
    std::array<uint8_t, 16> bytes{};

    static constexpr size_t size = 16;
    bool operator==(const Block128&) const = default;
};

/// 32-byte hash output.
struct Digest256 {
    std::array<uint8_t, 32> bytes{};

    static constexpr size_t size = 32;
    bool operator==(const Digest256&) const = default;
};

/// 128-bit PRF key. Never serialized in plaintext outside signer storage.
struct PrfKey {
    std::array<uint8_t, 16> bytes{};

    static constexpr size_t size = 16;
    bool operator==(const PrfKey&) const = default;
};

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(const std::string& hex);

template <typename T>
T block_from_hex(const std::string& hex) {
    T out;
    Bytes raw = from_hex(hex);
    if (raw.size() != out.bytes.size())
        throw std::invalid_argument("hex length mismatch");
    std::memcpy(out.bytes.data(), raw.data(), raw.size());
    return out;
}

// Big-endian integer helpers shared by every serialized format.
void put_u16(Bytes& out, uint16_t v);
void put_u32(Bytes& out, uint32_t v);
void put_u64(Bytes& out, uint64_t v);

/// Cursor over an encoded buffer; reads throw FormatError past the end.
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    Bytes take(size_t n);
    void take_into(std::span<uint8_t> out);

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

private:
    void need(size_t n) const;

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace infhors

#endif
