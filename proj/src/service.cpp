// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include "infhors/errors.hpp"

namespace infhors {

namespace {

/// Reads exactly out.size() bytes. Returns false on a clean end-of-stream
/// before the first byte; throws StorageError on errors or mid-read EOF.
bool read_exact(int fd, std::span<uint8_t> out) {
    size_t got = 0;
    while (got < out.size()) {
        const ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
        if (n == 0) {
            if (got == 0) return false;
            throw StorageError("socket: peer closed mid-frame");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StorageError("socket: read failed");
        }
        got += static_cast<size_t>(n);
    }
    return true;
}

void write_all(int fd, std::span<const uint8_t> data) {
    size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent,
                                 MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StorageError("socket: write failed");
        }
        sent += static_cast<size_t>(n);
    }
}

struct FdCloser {
    int fd;
    ~FdCloser() {
        if (fd >= 0) ::close(fd);
    }
};

wire::ConstructResponse error_response(wire::Status status,
                                       std::string message) {
    wire::ConstructResponse resp;
    resp.status = status;
    resp.error = std::move(message);
    return resp;
}

}  // namespace

void check_response_matches(const wire::ConstructRequest& req,
                            const EncryptedOneTimeKey& otk) {
    if (otk.signer_canonical != req.signer_canonical ||
        otk.counter != req.counter)
        throw FormatError("client: response key is for a different request");
    if (otk.full != (req.mode == wire::Mode::Full))
        throw FormatError("client: response coverage mode mismatch");
    if (req.mode == wire::Mode::Partial)
        for (uint16_t index : req.indices)
            if (!otk.covers(index))
                throw FormatError(
                    "client: response misses a requested index");
}

ConstructorServer::ConstructorServer(SystemParams params,
                                     std::shared_ptr<EvalBackend> backend,
                                     DistributablePk pk)
    : params_(params), backend_(std::move(backend)), pk_(std::move(pk)) {}

ConstructorServer::~ConstructorServer() { stop(); }

uint16_t ConstructorServer::start(const std::string& bind_addr,
                                  uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw StorageError("service: cannot create socket");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw StorageError("service: bad bind address " + bind_addr);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) <
            0 ||
        ::listen(listen_fd_, 64) < 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw StorageError("service: cannot bind " + bind_addr + ":" +
                           std::to_string(port));
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) <
        0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw StorageError("service: cannot read bound port");
    }
    port_ = ntohs(addr.sin_port);
    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
    return port_;
}

void ConstructorServer::stop() {
    if (!running_.exchange(false)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard<std::mutex> lock(workers_mu_);
    for (std::thread& w : workers_)
        if (w.joinable()) w.join();
    workers_.clear();
}

void ConstructorServer::accept_loop() {
    while (running_.load()) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (!running_.load()) break;
            if (errno == EINTR) continue;
            break;
        }
        std::lock_guard<std::mutex> lock(workers_mu_);
        workers_.emplace_back([this, fd] { handle_client(fd); });
    }
}

void ConstructorServer::handle_client(int fd) {
    FdCloser closer{fd};
    try {
        std::array<uint8_t, 9> header;
        while (read_exact(fd, header)) {
            wire::ConstructRequest req;
            try {
                const size_t body_len =
                    wire::parse_frame_header(header, wire::MAX_REQUEST_BODY);
                Bytes body(body_len);
                if (body_len > 0 && !read_exact(fd, body))
                    throw StorageError("socket: peer closed mid-frame");
                req = wire::ConstructRequest::decode_body(body);
            } catch (const FormatError& e) {
                // A malformed frame leaves the stream position unknowable, so
                // answer with a protocol error and drop the connection.
                write_all(fd, error_response(wire::Status::ProtocolError,
                                             e.what())
                                  .encode_frame());
                return;
            }
            write_all(fd, answer(req).encode_frame());
        }
    } catch (const Error&) {
        // Peer went away or the socket failed; nothing to answer.
    }
}

wire::ConstructResponse ConstructorServer::answer(
    const wire::ConstructRequest& req) {
    try {
        wire::ConstructResponse resp;
        resp.status = wire::Status::Ok;
        if (req.mode == wire::Mode::Full) {
            resp.otk = construct_pk(params_, *backend_, pk_,
                                    req.signer_canonical, req.counter);
        } else {
            if (req.indices.size() != params_.hors.k)
                return error_response(
                    wire::Status::ProtocolError,
                    "partial request must carry exactly " +
                        std::to_string(params_.hors.k) + " indices");
            IndexVector indices;
            indices.indices.assign(req.indices.begin(), req.indices.end());
            resp.otk = construct_pk_partial(params_, *backend_, pk_,
                                            req.signer_canonical, req.counter,
                                            indices);
        }
        return resp;
    } catch (const FormatError& e) {
        return error_response(wire::Status::ProtocolError, e.what());
    } catch (const Error& e) {
        return error_response(wire::Status::BackendError, e.what());
    }
}

wire::ConstructResponse construct_over_wire(const std::string& host,
                                            uint16_t port,
                                            const wire::ConstructRequest& req) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                      &res) != 0 ||
        !res)
        throw StorageError("client: cannot resolve " + host);
    const int fd = ::socket(res->ai_family, res->ai_socktype,
                            res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw StorageError("client: cannot create socket");
    }
    FdCloser closer{fd};
    const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc < 0)
        throw StorageError("client: cannot connect to " + host + ":" +
                           std::to_string(port));

    write_all(fd, req.encode_frame());

    std::array<uint8_t, 9> header;
    if (!read_exact(fd, header))
        throw StorageError("client: connection closed before response");
    const size_t body_len =
        wire::parse_frame_header(header, wire::MAX_RESPONSE_BODY);
    Bytes body(body_len);
    if (body_len > 0 && !read_exact(fd, body))
        throw StorageError("client: connection closed mid-response");
    wire::ConstructResponse resp = wire::ConstructResponse::decode_body(body);
    if (resp.status == wire::Status::Ok)
        check_response_matches(req, *resp.otk);
    return resp;
}

}  // namespace infhors
