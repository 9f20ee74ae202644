// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Wire-format and constructor-service tests: framing, request/response
// encodings, an in-process daemon round-trip, concurrency, and the client's
// response-to-request binding check.

#include <arpa/inet.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <random>
#include <thread>
#include <vector>

#include "doctest.h"
#include "infhors/errors.hpp"
#include "infhors/keystore.hpp"
#include "infhors/ref_backend.hpp"
#include "infhors/service.hpp"
#include "infhors/symmetric.hpp"
#include "infhors/wire.hpp"
#include "test_util.hpp"

using namespace infhors;

namespace {

struct LiveService {
    SystemParams params = SystemParams::standard();
    std::shared_ptr<ReferenceBackend> backend =
        std::make_shared<ReferenceBackend>();
    KeygenResult kg;
    ConstructorServer server;
    uint16_t port = 0;
    RevealCapability bit_cap;

    LiveService()
        : kg(make_keys(*backend)),
          server(params, backend, kg.pk),
          bit_cap{kg.authority.backend_secret, RevealPolicy::verifier()} {
        port = server.start("127.0.0.1", 0);
    }

    static KeygenResult make_keys(EvalBackend& backend) {
        std::vector<SignerId> ids = {SignerId::from_raw(std::string("w-1")),
                                     SignerId::from_raw(std::string("w-2"))};
        SystemEntropy entropy;
        return keygen(SystemParams::standard(), backend, ids, entropy);
    }

    Block128 decrypt(const Ciphertext& c) {
        const RevealCapability full{kg.authority.backend_secret,
                                    RevealPolicy::full()};
        const Bytes pt = backend->reveal(full, c);
        REQUIRE(pt.size() == 16);
        Block128 out;
        std::copy(pt.begin(), pt.end(), out.bytes.begin());
        return out;
    }
};

/// Sends one raw frame and returns the raw response frame (header + body).
Bytes raw_exchange(uint16_t port, const Bytes& frame_bytes) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    REQUIRE(inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr) == 1);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr),
                      sizeof(addr)) == 0);
    size_t sent = 0;
    while (sent < frame_bytes.size()) {
        const ssize_t n = ::send(fd, frame_bytes.data() + sent,
                                 frame_bytes.size() - sent, 0);
        REQUIRE(n > 0);
        sent += static_cast<size_t>(n);
    }
    ::shutdown(fd, SHUT_WR);
    Bytes response;
    uint8_t buf[4096];
    for (;;) {
        const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        response.insert(response.end(), buf, buf + n);
    }
    ::close(fd);
    return response;
}

wire::ConstructResponse parse_response(const Bytes& raw) {
    REQUIRE(raw.size() >= 9);
    const size_t body_len = wire::parse_frame_header(
        std::span<const uint8_t, 9>(raw.data(), 9), wire::MAX_RESPONSE_BODY);
    REQUIRE(raw.size() == 9 + body_len);
    return wire::ConstructResponse::decode_body(
        std::span<const uint8_t>(raw.data() + 9, body_len));
}

}  // namespace

TEST_CASE("frames round-trip and the header rejects every violation") {
    const Bytes body = {1, 2, 3, 4, 5};
    const Bytes framed = wire::frame(body);
    REQUIRE(framed.size() == 9 + body.size());
    CHECK(wire::parse_frame_header(
              std::span<const uint8_t, 9>(framed.data(), 9), 64) == 5);

    Bytes bad_magic = framed;
    bad_magic[0] ^= 0x01;
    CHECK_THROWS_AS(wire::parse_frame_header(
                        std::span<const uint8_t, 9>(bad_magic.data(), 9), 64),
                    FormatError);

    Bytes bad_version = framed;
    bad_version[4] = 0x02;
    CHECK_THROWS_AS(
        wire::parse_frame_header(
            std::span<const uint8_t, 9>(bad_version.data(), 9), 64),
        FormatError);

    // Length above the caller's cap.
    CHECK_THROWS_AS(wire::parse_frame_header(
                        std::span<const uint8_t, 9>(framed.data(), 9), 4),
                    FormatError);
}

TEST_CASE("construct requests encode and decode in both modes") {
    wire::ConstructRequest full;
    full.signer_canonical = 0x0123456789abcdefULL;
    full.counter = 7;
    full.mode = wire::Mode::Full;
    const Bytes full_frame = full.encode_frame();
    REQUIRE(full_frame.size() == 9 + 17);
    const auto full_back = wire::ConstructRequest::decode_body(
        std::span<const uint8_t>(full_frame.data() + 9,
                                 full_frame.size() - 9));
    CHECK(full_back.signer_canonical == full.signer_canonical);
    CHECK(full_back.counter == 7);
    CHECK(full_back.mode == wire::Mode::Full);
    CHECK(full_back.indices.empty());

    wire::ConstructRequest partial = full;
    partial.mode = wire::Mode::Partial;
    partial.indices = {5, 5, 1023, 0};
    const Bytes partial_frame = partial.encode_frame();
    REQUIRE(partial_frame.size() == 9 + 17 + 2 * partial.indices.size());
    const auto partial_back = wire::ConstructRequest::decode_body(
        std::span<const uint8_t>(partial_frame.data() + 9,
                                 partial_frame.size() - 9));
    CHECK(partial_back.mode == wire::Mode::Partial);
    CHECK(partial_back.indices == partial.indices);

    // Full mode with trailing bytes, unknown mode bytes, empty or odd-length
    // partial index payloads: all format errors.
    Bytes full_body(full_frame.begin() + 9, full_frame.end());
    full_body.push_back(0);
    CHECK_THROWS_AS(wire::ConstructRequest::decode_body(full_body),
                    FormatError);
    Bytes bad_mode(full_frame.begin() + 9, full_frame.end());
    bad_mode[16] = 0x02;
    CHECK_THROWS_AS(wire::ConstructRequest::decode_body(bad_mode),
                    FormatError);
    Bytes empty_partial(full_frame.begin() + 9, full_frame.end());
    empty_partial[16] = 0x01;
    CHECK_THROWS_AS(wire::ConstructRequest::decode_body(empty_partial),
                    FormatError);
    Bytes odd(partial_frame.begin() + 9, partial_frame.end());
    odd.pop_back();
    CHECK_THROWS_AS(wire::ConstructRequest::decode_body(odd), FormatError);
}

TEST_CASE("construct responses encode and decode all statuses") {
    wire::ConstructResponse err;
    err.status = wire::Status::ProtocolError;
    err.error = "bad frame";
    const Bytes err_frame = err.encode_frame();
    const auto err_back = wire::ConstructResponse::decode_body(
        std::span<const uint8_t>(err_frame.data() + 9, err_frame.size() - 9));
    CHECK(err_back.status == wire::Status::ProtocolError);
    CHECK(err_back.error == "bad frame");
    CHECK(!err_back.otk.has_value());

    Bytes bad_status(err_frame.begin() + 9, err_frame.end());
    bad_status[0] = 0x03;
    CHECK_THROWS_AS(wire::ConstructResponse::decode_body(bad_status),
                    FormatError);
    Bytes truncated(err_frame.begin() + 9, err_frame.end() - 1);
    CHECK_THROWS_AS(wire::ConstructResponse::decode_body(truncated),
                    FormatError);
}

TEST_CASE("the response binding check refuses substituted keys") {
    wire::ConstructRequest req;
    req.signer_canonical = 10;
    req.counter = 3;
    req.mode = wire::Mode::Partial;
    req.indices = {1, 2, 2};

    EncryptedOneTimeKey otk;
    otk.signer_canonical = 10;
    otk.counter = 3;
    otk.full = false;
    otk.components[1] = Ciphertext{};
    otk.components[2] = Ciphertext{};
    CHECK_NOTHROW(check_response_matches(req, otk));

    EncryptedOneTimeKey wrong_signer = otk;
    wrong_signer.signer_canonical = 11;
    CHECK_THROWS_AS(check_response_matches(req, wrong_signer), FormatError);

    EncryptedOneTimeKey wrong_counter = otk;
    wrong_counter.counter = 4;
    CHECK_THROWS_AS(check_response_matches(req, wrong_counter), FormatError);

    EncryptedOneTimeKey wrong_mode = otk;
    wrong_mode.full = true;
    CHECK_THROWS_AS(check_response_matches(req, wrong_mode), FormatError);

    EncryptedOneTimeKey missing = otk;
    missing.components.erase(2);
    CHECK_THROWS_AS(check_response_matches(req, missing), FormatError);

    wire::ConstructRequest full_req;
    full_req.signer_canonical = 10;
    full_req.counter = 3;
    full_req.mode = wire::Mode::Full;
    EncryptedOneTimeKey full_otk;
    full_otk.signer_canonical = 10;
    full_otk.counter = 3;
    full_otk.full = true;
    CHECK_NOTHROW(check_response_matches(full_req, full_otk));
    full_otk.full = false;
    CHECK_THROWS_AS(check_response_matches(full_req, full_otk), FormatError);
}

TEST_CASE("daemon round-trip: full construction matches local work") {
    LiveService svc;
    const uint64_t canonical = svc.kg.signers[0].id.canonical;

    wire::ConstructRequest req;
    req.signer_canonical = canonical;
    req.counter = 0;
    req.mode = wire::Mode::Full;
    const wire::ConstructResponse resp =
        construct_over_wire("127.0.0.1", svc.port, req);
    REQUIRE(resp.status == wire::Status::Ok);
    REQUIRE(resp.otk.has_value());
    CHECK(resp.otk->full);
    CHECK(resp.otk->components.size() == svc.params.hors.t);

    // Same components as a locally constructed key, at sampled indices.
    const EncryptedOneTimeKey local =
        construct_pk(svc.params, *svc.backend, svc.kg.pk, canonical, 0);
    for (const uint32_t index : {0u, 99u, 1023u})
        CHECK(svc.decrypt(resp.otk->components.at(index)) ==
              svc.decrypt(local.components.at(index)));

    // And the remote key verifies a real signature.
    SignerSeedState signer = svc.kg.signers[0];
    const Bytes msg = {'r', 'p', 'c'};
    const InfHorsSignature sigma = sign(svc.params, signer, msg);
    CHECK(verify(svc.params, *svc.backend, svc.kg.pk, *resp.otk, msg, sigma,
                 svc.bit_cap));
}

TEST_CASE("daemon round-trip: partial construction covers the request") {
    LiveService svc;
    SignerSeedState signer = svc.kg.signers[1];
    const Bytes msg = {'p', 'a', 'r', 't'};
    const InfHorsSignature sigma = sign(svc.params, signer, msg);
    const IndexVector needed =
        derive_indices(svc.params.hors, hash_message(msg));

    wire::ConstructRequest req;
    req.signer_canonical = signer.id.canonical;
    req.counter = 0;
    req.mode = wire::Mode::Partial;
    for (const uint32_t index : needed.indices)
        req.indices.push_back(static_cast<uint16_t>(index));

    const wire::ConstructResponse resp =
        construct_over_wire("127.0.0.1", svc.port, req);
    REQUIRE(resp.status == wire::Status::Ok);
    REQUIRE(resp.otk.has_value());
    CHECK(!resp.otk->full);
    CHECK(verify(svc.params, *svc.backend, svc.kg.pk, *resp.otk, msg, sigma,
                 svc.bit_cap));
}

TEST_CASE("the daemon refuses partial requests of the wrong arity") {
    LiveService svc;
    wire::ConstructRequest req;
    req.signer_canonical = svc.kg.signers[0].id.canonical;
    req.counter = 0;
    req.mode = wire::Mode::Partial;
    req.indices = {1, 2, 3};  // not k indices
    const wire::ConstructResponse resp =
        construct_over_wire("127.0.0.1", svc.port, req);
    CHECK(resp.status == wire::Status::ProtocolError);
    CHECK(!resp.error.empty());
}

TEST_CASE("malformed frames get a protocol error, not a hang") {
    LiveService svc;

    // Valid header, garbage 3-byte body.
    const Bytes garbage = wire::frame(Bytes{0xde, 0xad, 0xbe});
    const wire::ConstructResponse r1 = parse_response(
        raw_exchange(svc.port, garbage));
    CHECK(r1.status == wire::Status::ProtocolError);

    // Bad magic: the server answers with an error frame and closes.
    Bytes bad_magic = wire::frame(Bytes(17, 0));
    bad_magic[0] ^= 0xff;
    const wire::ConstructResponse r2 = parse_response(
        raw_exchange(svc.port, bad_magic));
    CHECK(r2.status == wire::Status::ProtocolError);

    // Oversized declared body length.
    Bytes huge_header;
    put_u32(huge_header, wire::MAGIC);
    huge_header.push_back(wire::VERSION);
    put_u32(huge_header, static_cast<uint32_t>(wire::MAX_REQUEST_BODY + 1));
    const wire::ConstructResponse r3 = parse_response(
        raw_exchange(svc.port, huge_header));
    CHECK(r3.status == wire::Status::ProtocolError);
}

TEST_CASE("an unknown signer still constructs: the daemon is stateless") {
    // Construction is a PRF evaluation over public data; the daemon has no
    // registry and serves any canonical id. Verification, not construction,
    // is where unknown signers fail.
    LiveService svc;
    wire::ConstructRequest req;
    req.signer_canonical = 0xffffffffffffffffULL;
    req.counter = 0;
    req.mode = wire::Mode::Full;
    const wire::ConstructResponse resp =
        construct_over_wire("127.0.0.1", svc.port, req);
    CHECK(resp.status == wire::Status::Ok);
}

TEST_CASE("concurrent requests are answered independently") {
    LiveService svc;
    const uint64_t canonical = svc.kg.signers[0].id.canonical;
    std::vector<std::future<wire::ConstructResponse>> futures;
    futures.reserve(4);
    for (uint64_t j = 0; j < 4; ++j)
        futures.push_back(std::async(std::launch::async, [&svc, canonical,
                                                          j] {
            wire::ConstructRequest req;
            req.signer_canonical = canonical;
            req.counter = j;
            req.mode = wire::Mode::Full;
            return construct_over_wire("127.0.0.1", svc.port, req);
        }));
    for (uint64_t j = 0; j < 4; ++j) {
        const wire::ConstructResponse resp = futures[j].get();
        REQUIRE(resp.status == wire::Status::Ok);
        CHECK(resp.otk->counter == j);
        CHECK(resp.otk->signer_canonical == canonical);
    }
}

TEST_CASE("client failures are storage errors, not crashes") {
    // Nothing listens on this port (we bind-and-close to find a free one).
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = 0;
    inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) ==
            0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    const uint16_t dead_port = ntohs(addr.sin_port);
    ::close(fd);

    wire::ConstructRequest req;
    req.mode = wire::Mode::Full;
    CHECK_THROWS_AS(construct_over_wire("127.0.0.1", dead_port, req),
                    StorageError);
}

TEST_CASE("stop is idempotent and joins all workers") {
    auto backend = std::make_shared<ReferenceBackend>();
    const KeygenResult kg = LiveService::make_keys(*backend);
    ConstructorServer server(SystemParams::standard(), backend, kg.pk);
    const uint16_t port = server.start("127.0.0.1", 0);
    CHECK(port != 0);
    CHECK(server.port() == port);

    wire::ConstructRequest req;
    req.signer_canonical = kg.signers[0].id.canonical;
    req.mode = wire::Mode::Full;
    CHECK(construct_over_wire("127.0.0.1", port, req).status ==
          wire::Status::Ok);

    server.stop();
    server.stop();  // second stop is a no-op
    CHECK_THROWS_AS(construct_over_wire("127.0.0.1", port, req),
                    StorageError);
}
