// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Framed binary protocol for the outsourced public-key-constructor service:
//   [4-byte magic 0x49484F52][1-byte version 0x01][4-byte BE body length][body]
// Request body:  [8-byte canonical id][8-byte counter][1-byte mode]
//                [partial mode only: n x 2-byte BE index values]
// Response body: [1-byte status][ok: one-time key encoding |
//                 error: 2-byte BE length + message]

#ifndef INFHORS_WIRE_HPP
#define INFHORS_WIRE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infhors/infhors.hpp"

namespace infhors::wire {

inline constexpr uint32_t MAGIC = 0x49484F52;  // "IHOR"
inline constexpr uint8_t VERSION = 0x01;
inline constexpr size_t MAX_REQUEST_BODY = 64 * 1024;
inline constexpr size_t MAX_RESPONSE_BODY = 16 * 1024 * 1024;

enum class Mode : uint8_t { Full = 0x00, Partial = 0x01 };

enum class Status : uint8_t {
    Ok = 0x00,
    ProtocolError = 0x01,
    BackendError = 0x02,
};

struct ConstructRequest {
    uint64_t signer_canonical = 0;
    uint64_t counter = 0;
    Mode mode = Mode::Full;
    std::vector<uint16_t> indices;  // partial mode only

    Bytes encode_frame() const;
    static ConstructRequest decode_body(std::span<const uint8_t> body);
};

struct ConstructResponse {
    Status status = Status::Ok;
    std::optional<EncryptedOneTimeKey> otk;  // status == Ok
    std::string error;                       // status != Ok

    Bytes encode_frame() const;
    static ConstructResponse decode_body(std::span<const uint8_t> body);
};

/// Splits [magic][version][length] and returns the body length.
/// Throws FormatError on bad magic/version or an out-of-range length.
size_t parse_frame_header(std::span<const uint8_t, 9> header, size_t max_body);

Bytes frame(std::span<const uint8_t> body);

}  // namespace infhors::wire

#endif
