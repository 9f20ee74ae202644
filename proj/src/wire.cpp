// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/wire.hpp"

#include "infhors/errors.hpp"

namespace infhors::wire {

Bytes frame(std::span<const uint8_t> body) {
    Bytes out;
    out.reserve(body.size() + 9);
    put_u32(out, MAGIC);
    out.push_back(VERSION);
    put_u32(out, static_cast<uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

size_t parse_frame_header(std::span<const uint8_t, 9> header,
                          size_t max_body) {
    ByteReader reader(header);
    if (reader.u32() != MAGIC) throw FormatError("frame: bad magic");
    if (reader.u8() != VERSION)
        throw FormatError("frame: unsupported version");
    const uint32_t len = reader.u32();
    if (len > max_body) throw FormatError("frame: body length out of range");
    return len;
}

Bytes ConstructRequest::encode_frame() const {
    Bytes body;
    put_u64(body, signer_canonical);
    put_u64(body, counter);
    body.push_back(static_cast<uint8_t>(mode));
    if (mode == Mode::Partial)
        for (uint16_t index : indices) put_u16(body, index);
    if (body.size() > MAX_REQUEST_BODY)
        throw FormatError("request: body exceeds the frame limit");
    return frame(body);
}

ConstructRequest ConstructRequest::decode_body(
    std::span<const uint8_t> body) {
    ByteReader reader(body);
    ConstructRequest req;
    req.signer_canonical = reader.u64();
    req.counter = reader.u64();
    const uint8_t mode_byte = reader.u8();
    if (mode_byte > 1) throw FormatError("request: unknown mode byte");
    req.mode = static_cast<Mode>(mode_byte);
    if (req.mode == Mode::Full) {
        if (!reader.done())
            throw FormatError("request: trailing bytes after full-mode header");
        return req;
    }
    if (reader.remaining() == 0)
        throw FormatError("request: partial mode carries no indices");
    if (reader.remaining() % 2 != 0)
        throw FormatError("request: odd index-list length");
    const size_t count = reader.remaining() / 2;
    req.indices.reserve(count);
    for (size_t i = 0; i < count; ++i) req.indices.push_back(reader.u16());
    return req;
}

Bytes ConstructResponse::encode_frame() const {
    Bytes body;
    body.push_back(static_cast<uint8_t>(status));
    if (status == Status::Ok) {
        if (!otk) throw FormatError("response: ok status without a key");
        const Bytes encoded = otk->encode();
        body.insert(body.end(), encoded.begin(), encoded.end());
    } else {
        std::string msg = error;
        if (msg.size() > UINT16_MAX) msg.resize(UINT16_MAX);
        put_u16(body, static_cast<uint16_t>(msg.size()));
        body.insert(body.end(), msg.begin(), msg.end());
    }
    if (body.size() > MAX_RESPONSE_BODY)
        throw FormatError("response: body exceeds the frame limit");
    return frame(body);
}

ConstructResponse ConstructResponse::decode_body(
    std::span<const uint8_t> body) {
    ByteReader reader(body);
    ConstructResponse resp;
    const uint8_t status_byte = reader.u8();
    if (status_byte > static_cast<uint8_t>(Status::BackendError))
        throw FormatError("response: unknown status byte");
    resp.status = static_cast<Status>(status_byte);
    if (resp.status == Status::Ok) {
        resp.otk = EncryptedOneTimeKey::decode(reader.take(reader.remaining()));
        return resp;
    }
    const Bytes msg = reader.take(reader.u16());
    resp.error.assign(msg.begin(), msg.end());
    if (!reader.done())
        throw FormatError("response: trailing bytes after error message");
    return resp;
}

}  // namespace infhors::wire
