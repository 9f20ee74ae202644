// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Outsourced public-key-constructor service over TCP. The daemon holds only
// the distributable public key — never the master secret or the backend
// secret — and is trusted for availability only: a wrong or tampered
// response makes verification reject, never falsely accept.

#ifndef INFHORS_SERVICE_HPP
#define INFHORS_SERVICE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "infhors/infhors.hpp"
#include "infhors/wire.hpp"

namespace infhors {

/// Constructor daemon: accepts framed ConstructRequests concurrently, each
/// answered from public data via construct_pk / construct_pk_partial.
class ConstructorServer {
public:
    ConstructorServer(SystemParams params, std::shared_ptr<EvalBackend> backend,
                      DistributablePk pk);
    ~ConstructorServer();

    ConstructorServer(const ConstructorServer&) = delete;
    ConstructorServer& operator=(const ConstructorServer&) = delete;

    /// Binds and starts accepting. Port 0 picks an ephemeral port; the bound
    /// port is returned and available from port() afterwards.
    uint16_t start(const std::string& bind_addr, uint16_t port);
    void stop();

    uint16_t port() const { return port_; }

private:
    void accept_loop();
    void handle_client(int fd);
    wire::ConstructResponse answer(const wire::ConstructRequest& req);

    SystemParams params_;
    std::shared_ptr<EvalBackend> backend_;
    DistributablePk pk_;

    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex workers_mu_;
    std::vector<std::thread> workers_;
};

/// Rejects a response key that does not answer the given request: wrong
/// signer or counter, wrong coverage mode, or missing requested indices.
/// Throws FormatError. Applied by construct_over_wire to every Ok response,
/// so a daemon cannot substitute a key for a different (signer, counter).
void check_response_matches(const wire::ConstructRequest& req,
                            const EncryptedOneTimeKey& otk);

/// One-shot client: sends a request frame and decodes the response.
/// Throws FormatError on protocol violations and StorageError on socket
/// failures.
wire::ConstructResponse construct_over_wire(const std::string& host,
                                            uint16_t port,
                                            const wire::ConstructRequest& req);

}  // namespace infhors

#endif
