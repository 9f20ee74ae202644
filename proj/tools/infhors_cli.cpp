// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Operator CLI: key lifecycle, signing, one-time-key construction (local and
// over the wire), verification with anti-replay, the constructor daemon, and
// the benchmark harness.
//
// Exit codes (stable scripting contract):
//   0 accept / success
//   1 cryptographic reject
//   2 replay / stale / state fault
//   3 usage, format, storage, or protocol error

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infhors/errors.hpp"
#include "infhors/infhors.hpp"
#include "infhors/keystore.hpp"
#include "infhors/ref_backend.hpp"
#include "infhors/service.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infhors;

namespace {

std::string store_dir() {
    const char* env = std::getenv("INF_HORS_STORE");
    return env && *env ? env : "store";
}

Bytes read_file_bytes(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw StorageError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(f)),
               std::istreambuf_iterator<char>());
    if (f.bad()) throw StorageError("read failed for " + path.string());
    return data;
}

void write_file_bytes(const fs::path& path, std::span<const uint8_t> data) {
    if (!path.parent_path().empty())
        fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
    f.flush();
    if (!f) throw StorageError("write failed for " + path.string());
}

/// Advisory exclusive lock on a sidecar .lock file, held for the scope.
/// Sidecar rather than the file itself because saves replace the inode.
struct FileLock {
    int fd = -1;
    explicit FileLock(const fs::path& target) {
        fs::path lock_path = target;
        lock_path += ".lock";
        fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd < 0)
            throw StorageError("cannot open lock file " + lock_path.string());
        if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd);
            fd = -1;
            throw StorageError("lock contention on " + target.string());
        }
    }
    ~FileLock() {
        if (fd >= 0) ::close(fd);  // closing drops the flock
    }
};

std::shared_ptr<EvalBackend> backend_for(const DistributablePk& pk) {
    return std::shared_ptr<EvalBackend>(
        make_backend(pk.backend_public.backend_id));
}

volatile std::sig_atomic_t g_stop_requested = 0;
void handle_stop_signal(int) { g_stop_requested = 1; }

// ---------------------------------------------------------------------------

int run_keygen(const std::string& ids_path, const std::string& out_dir) {
    std::ifstream f(ids_path);
    if (!f) throw StorageError("cannot open ids file " + ids_path);
    std::vector<SignerId> ids;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ids.push_back(SignerId::from_raw(line));
    }
    SignerRegistry::register_ids(ids);  // throws on duplicates/collisions

    ReferenceBackend backend;
    SystemEntropy entropy;
    const KeygenResult result =
        keygen(SystemParams::standard(), backend, ids, entropy);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    save_pk(dir / "pk.bin", result.pk);
    for (const SignerSeedState& state : result.signers)
        save_signer_state(signer_state_path(dir, state.id.canonical), state);
    const fs::path authority_path = dir / "authority.key";
    save_authority(authority_path, result.authority);
    fs::permissions(authority_path, fs::perms::owner_read |
                                        fs::perms::owner_write);

    std::cout << "wrote " << result.signers.size() << " signer state file"
              << (result.signers.size() == 1 ? "" : "s")
              << ", pk.bin, authority.key under " << dir.string() << "\n";
    return 0;
}

int run_sign(const std::string& state_path, const std::string& msg_path,
             const std::string& out_path) {
    const FileLock lock{fs::path(state_path)};
    SignerSeedState state = load_signer_state(state_path);
    const Bytes message = read_file_bytes(msg_path);

    const InfHorsSignature sig =
        sign(SystemParams::standard(), state, message);
    // Write-ahead: the incremented counter must be durable before the
    // signature exists anywhere, or a crash could reuse a one-time key.
    save_signer_state(state_path, state);
    write_file_bytes(out_path, sig.encode());

    std::cout << "signed with counter " << sig.counter << " -> " << out_path
              << "\n";
    return 0;
}

int run_pkconstr(const std::string& pk_path, const std::string& raw_id,
                 uint64_t from_j, uint64_t to_j,
                 const std::string& indices_of_path,
                 const std::string& cache_dir) {
    if (to_j <= from_j)
        throw FormatError("--to-j must be greater than --from-j");
    const DistributablePk pk = load_pk(pk_path);
    auto backend = backend_for(pk);
    const uint64_t canonical = canonical_id(SignerId::from_raw(raw_id).raw);
    const SystemParams params = SystemParams::standard();

    std::optional<IndexVector> indices;
    if (!indices_of_path.empty()) {
        const Bytes message = read_file_bytes(indices_of_path);
        indices = derive_indices(params.hors, hash_message(message));
    }

    fs::create_directories(cache_dir);
    for (uint64_t j = from_j; j < to_j; ++j) {
        const EncryptedOneTimeKey otk =
            indices ? construct_pk_partial(params, *backend, pk, canonical, j,
                                           *indices)
                    : construct_pk(params, *backend, pk, canonical, j);
        save_otk(fs::path(cache_dir) /
                     (canonical_hex(canonical) + "-" + std::to_string(j) +
                      ".otk"),
                 otk);
    }
    std::cout << "constructed " << (to_j - from_j)
              << (indices ? " partial" : " full") << " one-time key"
              << (to_j - from_j == 1 ? "" : "s") << " -> " << cache_dir
              << "\n";
    return 0;
}

int run_verify(const std::string& pk_path, const std::string& sig_path,
               const std::string& msg_path, const std::string& raw_id,
               const std::string& cache_dir, const std::string& ledger_dir) {
    const SystemParams params = SystemParams::standard();
    const DistributablePk pk = load_pk(pk_path);
    auto backend = backend_for(pk);
    const InfHorsSignature sig =
        InfHorsSignature::decode(params.hors, read_file_bytes(sig_path));
    const Bytes message = read_file_bytes(msg_path);
    const uint64_t canonical = canonical_id(SignerId::from_raw(raw_id).raw);

    const fs::path ledger_log = fs::path(ledger_dir) / "ledger.log";
    fs::create_directories(ledger_dir);
    const FileLock lock{ledger_log};
    VerifierLedger ledger = VerifierLedger::open(ledger_log);
    OtkCache cache(fs::path(cache_dir), 1024);
    const auto reveal = backend->derive_verifier_capability(pk.backend_public);

    const auto reservation = ledger.reserve(canonical, sig.counter);
    if (!reservation.accepted()) {
        std::cout << verdict_name(reservation.verdict) << "\n";
        return 2;
    }
    bool ok = false;
    try {
        ok = verify_online_offline(params, *backend, pk, cache, canonical,
                                   message, sig, *reveal);
    } catch (...) {
        ledger.release(reservation);
        throw;
    }
    if (!ok) {
        ledger.release(reservation);
        std::cout << "reject\n";
        return 1;
    }
    ledger.commit(reservation);  // StorageError here must not report accept
    std::cout << "accept\n";
    return 0;
}

int run_serve(const std::string& pk_path, const std::string& listen) {
    const size_t colon = listen.rfind(':');
    if (colon == std::string::npos)
        throw FormatError("--listen expects <addr>:<port>");
    const std::string addr = listen.substr(0, colon);
    const int port = std::stoi(listen.substr(colon + 1));
    if (port < 0 || port > 65535) throw FormatError("port out of range");

    const DistributablePk pk = load_pk(pk_path);
    ConstructorServer server(SystemParams::standard(), backend_for(pk), pk);
    const uint16_t bound =
        server.start(addr, static_cast<uint16_t>(port));
    std::cout << "listening on " << addr << ":" << bound << std::endl;

    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    while (!g_stop_requested)
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    std::cout << "stopped\n";
    return 0;
}

int run_construct(const std::string& host, uint16_t port,
                  const std::string& raw_id, uint64_t counter,
                  const std::vector<uint16_t>& indices,
                  const std::string& out_path) {
    wire::ConstructRequest req;
    req.signer_canonical = canonical_id(SignerId::from_raw(raw_id).raw);
    req.counter = counter;
    req.mode = indices.empty() ? wire::Mode::Full : wire::Mode::Partial;
    req.indices = indices;

    const wire::ConstructResponse resp = construct_over_wire(host, port, req);
    if (resp.status != wire::Status::Ok) {
        std::cerr << "constructor error: " << resp.error << "\n";
        return 3;
    }
    save_otk(out_path, *resp.otk);
    std::cout << "fetched one-time key (" << resp.otk->components.size()
              << " components) -> " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Bench

uint64_t median_ns(std::vector<uint64_t>& samples) {
    std::sort(samples.begin(), samples.end());
    const size_t n = samples.size();
    return n % 2 ? samples[n / 2]
                 : (samples[n / 2 - 1] + samples[n / 2]) / 2;
}

int run_bench(const std::string& suite, uint64_t iters,
              const std::string& out_path) {
    if (iters == 0) throw FormatError("--iters must be positive");
    constexpr uint64_t WARMUP = 16;

    const SystemParams params = SystemParams::standard();
    ReferenceBackend backend;
    DeterministicEntropy entropy(0xB3ACBE6C);
    const std::vector<SignerId> ids{SignerId::from_raw("bench-signer")};
    KeygenResult kg = keygen(params, backend, ids, entropy);
    SignerSeedState& signer = kg.signers[0];

    json report;
    report["suite"] = suite;
    report["iterations"] = iters;

    const auto timed = [](const std::function<void()>& op) -> uint64_t {
        const auto begin = std::chrono::steady_clock::now();
        op();
        const auto end = std::chrono::steady_clock::now();
        return static_cast<uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(end - begin)
                .count());
    };

    if (suite == "signer") {
        std::vector<uint64_t> ns;
        ns.reserve(iters);
        InfHorsSignature last;
        uint64_t total = 0;
        reset_op_counters();
        const OpCounters before = op_counters();
        for (uint64_t i = 0; i < WARMUP + iters; ++i) {
            Bytes msg;
            put_u64(msg, i);
            if (i < WARMUP) {
                last = sign(params, signer, msg);
                continue;
            }
            const uint64_t t = timed([&] { last = sign(params, signer, msg); });
            ns.push_back(t);
            total += t;
        }
        const OpCounters after = op_counters();
        const uint64_t measured = WARMUP + iters;
        report["operation"] = "sign";
        report["mean_ns"] = total / iters;
        report["median_ns"] = median_ns(ns);
        report["prf_calls_per_op"] =
            (after.prf_calls - before.prf_calls) / measured;
        report["hash_calls_per_op"] =
            (after.hash_calls - before.hash_calls) / measured;
        report["sizes_bytes"] = {
            {"signer_secret_material",
             signer.encode_secret_material().size()},
            {"signature", last.encode().size()},
        };
    } else if (suite == "verifier") {
        // Warm path: the one-time keys are precomputed offline; the measured
        // online operation performs comparisons only.
        OtkCache cache(4096);
        const auto reveal =
            backend.derive_verifier_capability(kg.pk.backend_public);
        std::vector<Bytes> messages;
        std::vector<InfHorsSignature> sigs;
        for (uint64_t i = 0; i < WARMUP + iters; ++i) {
            Bytes msg;
            put_u64(msg, i);
            messages.push_back(msg);
            sigs.push_back(sign(params, signer, msg));
            cache.put(construct_pk(params, backend, kg.pk,
                                   signer.id.canonical, sigs.back().counter));
        }
        std::vector<uint64_t> ns;
        ns.reserve(iters);
        uint64_t total = 0;
        backend.reset_counters();
        const EvalCounters before = backend.counters();
        bool all_ok = true;
        for (uint64_t i = 0; i < WARMUP + iters; ++i) {
            bool ok = false;
            const auto op = [&] {
                ok = verify_online_offline(params, backend, kg.pk, cache,
                                           signer.id.canonical, messages[i],
                                           sigs[i], *reveal);
            };
            if (i < WARMUP) {
                op();
            } else {
                const uint64_t t = timed(op);
                ns.push_back(t);
                total += t;
            }
            all_ok = all_ok && ok;
        }
        const EvalCounters after = backend.counters();
        const uint64_t measured = WARMUP + iters;
        report["operation"] = "verify_online_offline(warm)";
        report["all_verified"] = all_ok;
        report["mean_ns"] = total / iters;
        report["median_ns"] = median_ns(ns);
        report["construction_evals_per_op"] =
            (after.construction_evals() - before.construction_evals()) /
            measured;
        report["comparisons_per_op"] =
            (after.eval_cmp - before.eval_cmp) / measured;
        report["sizes_bytes"] = {
            {"distributable_pk", kg.pk.encode().size()},
            {"full_one_time_key",
             cache.get(signer.id.canonical, 0)->encode().size()},
        };
    } else {
        throw FormatError("--suite must be signer or verifier");
    }

    const std::string text = report.dump(2) + "\n";
    write_file_bytes(out_path,
                     std::span<const uint8_t>(
                         reinterpret_cast<const uint8_t*>(text.data()),
                         text.size()));
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"INF-HORS signatures: key lifecycle, constructor service, "
                 "verification, benchmarks"};
    app.require_subcommand(1);
    const std::string store = store_dir();
    std::function<int()> runner;

    // keygen
    auto* keygen_cmd =
        app.add_subcommand("keygen", "Generate system keys for a set of ids");
    auto ids_path = std::make_shared<std::string>();
    auto out_dir = std::make_shared<std::string>(store);
    keygen_cmd->add_option("--ids", *ids_path, "File with one raw id per line")
        ->required();
    keygen_cmd->add_option("--out", *out_dir, "Output store directory");
    keygen_cmd->callback(
        [&runner, ids_path, out_dir] {
            runner = [=] { return run_keygen(*ids_path, *out_dir); };
        });

    // sign
    auto* sign_cmd = app.add_subcommand("sign", "Sign a message file");
    auto state_path = std::make_shared<std::string>();
    auto sign_msg = std::make_shared<std::string>();
    auto sign_out = std::make_shared<std::string>();
    sign_cmd->add_option("--state", *state_path, "Signer state file")
        ->required();
    sign_cmd->add_option("--msg", *sign_msg, "Message file")->required();
    sign_cmd->add_option("--out", *sign_out, "Signature output file")
        ->required();
    sign_cmd->callback([&runner, state_path, sign_msg, sign_out] {
        runner = [=] { return run_sign(*state_path, *sign_msg, *sign_out); };
    });

    // pkconstr
    auto* pkc_cmd = app.add_subcommand(
        "pkconstr", "Precompute encrypted one-time keys into a cache");
    auto pkc_pk = std::make_shared<std::string>();
    auto pkc_id = std::make_shared<std::string>();
    auto pkc_from = std::make_shared<uint64_t>(0);
    auto pkc_to = std::make_shared<uint64_t>(0);
    auto pkc_indices_of = std::make_shared<std::string>();
    auto pkc_cache = std::make_shared<std::string>(store + "/otk-cache");
    pkc_cmd->add_option("--pk", *pkc_pk, "Distributable PK file")->required();
    pkc_cmd->add_option("--id", *pkc_id, "Raw signer id")->required();
    pkc_cmd->add_option("--from-j", *pkc_from, "First counter (inclusive)")
        ->required();
    pkc_cmd->add_option("--to-j", *pkc_to, "Last counter (exclusive)")
        ->required();
    pkc_cmd->add_option("--indices-of", *pkc_indices_of,
                        "Message file; construct only its k indices");
    pkc_cmd->add_option("--cache", *pkc_cache, "Cache directory");
    pkc_cmd->callback(
        [&runner, pkc_pk, pkc_id, pkc_from, pkc_to, pkc_indices_of,
         pkc_cache] {
            runner = [=] {
                return run_pkconstr(*pkc_pk, *pkc_id, *pkc_from, *pkc_to,
                                    *pkc_indices_of, *pkc_cache);
            };
        });

    // verify
    auto* verify_cmd =
        app.add_subcommand("verify", "Verify a signature with anti-replay");
    auto ver_pk = std::make_shared<std::string>();
    auto ver_sig = std::make_shared<std::string>();
    auto ver_msg = std::make_shared<std::string>();
    auto ver_id = std::make_shared<std::string>();
    auto ver_cache = std::make_shared<std::string>(store + "/otk-cache");
    auto ver_ledger = std::make_shared<std::string>(store);
    verify_cmd->add_option("--pk", *ver_pk, "Distributable PK file")
        ->required();
    verify_cmd->add_option("--sig", *ver_sig, "Signature file")->required();
    verify_cmd->add_option("--msg", *ver_msg, "Message file")->required();
    verify_cmd->add_option("--id", *ver_id, "Raw signer id")->required();
    verify_cmd->add_option("--cache", *ver_cache, "One-time-key cache dir");
    verify_cmd->add_option("--ledger", *ver_ledger, "Ledger directory");
    verify_cmd->callback(
        [&runner, ver_pk, ver_sig, ver_msg, ver_id, ver_cache, ver_ledger] {
            runner = [=] {
                return run_verify(*ver_pk, *ver_sig, *ver_msg, *ver_id,
                                  *ver_cache, *ver_ledger);
            };
        });

    // serve
    auto* serve_cmd = app.add_subcommand(
        "serve", "Run the public-key-constructor daemon (holds only the PK)");
    auto srv_pk = std::make_shared<std::string>();
    auto srv_listen = std::make_shared<std::string>("127.0.0.1:0");
    serve_cmd->add_option("--pk", *srv_pk, "Distributable PK file")
        ->required();
    serve_cmd->add_option("--listen", *srv_listen, "Bind address <addr>:<port>");
    serve_cmd->callback([&runner, srv_pk, srv_listen] {
        runner = [=] { return run_serve(*srv_pk, *srv_listen); };
    });

    // construct (wire client)
    auto* con_cmd = app.add_subcommand(
        "construct", "Fetch a one-time key from a constructor daemon");
    auto con_host = std::make_shared<std::string>("127.0.0.1");
    auto con_port = std::make_shared<uint16_t>(0);
    auto con_id = std::make_shared<std::string>();
    auto con_counter = std::make_shared<uint64_t>(0);
    auto con_indices = std::make_shared<std::vector<uint16_t>>();
    auto con_out = std::make_shared<std::string>();
    con_cmd->add_option("--host", *con_host, "Daemon host");
    con_cmd->add_option("--port", *con_port, "Daemon port")->required();
    con_cmd->add_option("--id", *con_id, "Raw signer id")->required();
    con_cmd->add_option("--counter", *con_counter, "Counter j")->required();
    con_cmd->add_option("--index", *con_indices,
                        "Partial mode: requested index (repeatable)");
    con_cmd->add_option("--out", *con_out, "Output .otk file")->required();
    con_cmd->callback(
        [&runner, con_host, con_port, con_id, con_counter, con_indices,
         con_out] {
            runner = [=] {
                return run_construct(*con_host, *con_port, *con_id,
                                     *con_counter, *con_indices, *con_out);
            };
        });

    // bench run
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark harness");
    auto* bench_run = bench_cmd->add_subcommand("run", "Run a bench suite");
    bench_cmd->require_subcommand(1);
    auto bench_suite = std::make_shared<std::string>();
    auto bench_iters = std::make_shared<uint64_t>(256);
    auto bench_out = std::make_shared<std::string>("bench.json");
    bench_run->add_option("--suite", *bench_suite, "signer or verifier")
        ->required();
    bench_run->add_option("--iters", *bench_iters, "Measured iterations");
    bench_run->add_option("--out", *bench_out, "JSON report path");
    bench_run->callback([&runner, bench_suite, bench_iters, bench_out] {
        runner = [=] {
            return run_bench(*bench_suite, *bench_iters, *bench_out);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        return runner ? runner() : 3;
    } catch (const StateError& e) {
        std::cerr << "state error: " << e.what() << "\n";
        return 2;
    } catch (const CoverageError& e) {
        std::cerr << "coverage error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
