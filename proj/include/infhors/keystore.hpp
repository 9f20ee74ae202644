// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.
//
// Persistence and anti-replay: signer seed-state storage, the verifier
// high-water ledger, the encrypted one-time-key cache, and identity
// registration. File layout under a store directory:
//   signer-<canonical hex>.state
//   ledger.log
//   otk-cache/<canonical hex>-<counter>.otk

#ifndef INFHORS_KEYSTORE_HPP
#define INFHORS_KEYSTORE_HPP

#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "infhors/identity.hpp"
#include "infhors/infhors.hpp"

namespace infhors {

/// Registered signers, keyed by canonical id. Rejects duplicate raw ids and
/// canonical collisions, naming both raw ids in the error.
class SignerRegistry {
public:
    void register_id(const SignerId& id);
    static SignerRegistry register_ids(std::span<const SignerId> ids);

    size_t size() const { return by_canonical_.size(); }
    std::optional<SignerId> lookup(uint64_t canonical) const;

private:
    std::map<uint64_t, SignerId> by_canonical_;
};

enum class LedgerVerdict { Accept, Replay, Stale };

const char* verdict_name(LedgerVerdict v);

/// Two-phase anti-replay ledger. A counter is reserved before verification,
/// committed on a true verdict, released on false. Committed counters are
/// accepted at most once, ever, across restarts; counters at or below
/// high_water - W are stale. Out-of-order delivery inside the window is
/// accepted.
///
/// Persistence is an append-only log of committed (signer, counter) records,
/// each with its own checksum; a torn tail record is detected and ignored.
class VerifierLedger {
public:
    explicit VerifierLedger(uint64_t window = 8) : window_(window) {}

    // Movable so open() can hand one back; the mutex is not carried over
    // (moving a ledger that other threads are using is a caller bug).
    VerifierLedger(VerifierLedger&& other) noexcept
        : signers_(std::move(other.signers_)),
          window_(other.window_),
          log_path_(std::move(other.log_path_)) {}
    VerifierLedger(const VerifierLedger&) = delete;
    VerifierLedger& operator=(const VerifierLedger&) = delete;

    /// Opens (or creates) the log at `path` and replays committed records.
    static VerifierLedger open(const std::filesystem::path& path,
                               uint64_t window = 8);

    struct Reservation {
        uint64_t signer = 0;
        uint64_t counter = 0;
        LedgerVerdict verdict = LedgerVerdict::Stale;

        bool accepted() const { return verdict == LedgerVerdict::Accept; }
    };

    /// Phase one: classify and, on Accept, hold the slot so a concurrent
    /// duplicate sees Replay.
    Reservation reserve(uint64_t signer_canonical, uint64_t counter);

    /// Phase two on verification success: durably record the acceptance.
    /// Throws StorageError when the log cannot be written — the caller must
    /// not report success in that case.
    void commit(const Reservation& r);

    /// Phase two on verification failure: free the slot again. A failed
    /// cryptographic check does not burn the counter.
    void release(const Reservation& r);

    uint64_t window() const { return window_; }

private:
    struct PerSigner {
        uint64_t high_water = 0;
        bool any_committed = false;
        std::set<uint64_t> committed_in_window;
        std::set<uint64_t> reserved;
    };

    LedgerVerdict classify_locked(const PerSigner& s, uint64_t counter) const;
    void apply_commit_locked(PerSigner& s, uint64_t counter);

    mutable std::mutex mu_;
    std::map<uint64_t, PerSigner> signers_;
    uint64_t window_;
    std::filesystem::path log_path_;  // empty for an in-memory ledger
};

/// LRU cache of encrypted one-time keys, keyed by (canonical id, counter).
/// Concurrent readers, serialized mutation. Optionally file-backed: entries
/// are written to <dir>/<canonical hex>-<counter>.otk and reloaded on miss.
class OtkCache final : public OtkStore {
public:
    explicit OtkCache(size_t capacity = 1024) : capacity_(capacity) {}
    OtkCache(std::filesystem::path dir, size_t capacity);

    std::optional<EncryptedOneTimeKey> get(uint64_t signer_canonical,
                                           uint64_t counter) override;
    void put(EncryptedOneTimeKey otk) override;

    size_t entries() const;

private:
    using Key = std::pair<uint64_t, uint64_t>;

    void evict_locked();
    std::filesystem::path entry_path(const Key& key) const;

    mutable std::shared_mutex mu_;
    size_t capacity_;
    std::filesystem::path dir_;  // empty for memory-only
    std::list<Key> order_;       // most recent first
    std::map<Key, std::pair<EncryptedOneTimeKey, std::list<Key>::iterator>>
        entries_;
};

// Checksummed single-record files. save_* writes atomically (temp file +
// rename); load_* throws StorageError on a missing file, bad magic, or
// checksum mismatch.

void save_signer_state(const std::filesystem::path& path,
                       const SignerSeedState& state);
SignerSeedState load_signer_state(const std::filesystem::path& path);

void save_otk(const std::filesystem::path& path,
              const EncryptedOneTimeKey& otk);
EncryptedOneTimeKey load_otk(const std::filesystem::path& path);

void save_authority(const std::filesystem::path& path,
                    const MasterKeyMaterial& material);
MasterKeyMaterial load_authority(const std::filesystem::path& path);

void save_pk(const std::filesystem::path& path, const DistributablePk& pk);
DistributablePk load_pk(const std::filesystem::path& path);

/// signer-<canonical hex>.state under `dir`.
std::filesystem::path signer_state_path(const std::filesystem::path& dir,
                                        uint64_t canonical);

/// Canonical id as 16 lowercase hex digits, as used in store file names.
std::string canonical_hex(uint64_t canonical);

// Hex-armored text form for key/signature fixtures: one `FIELD: hexvalue`
// line per field; '#' lines and blank lines are ignored on load.
void save_armored(const std::filesystem::path& path,
                  std::span<const std::pair<std::string, Bytes>> fields);
std::map<std::string, Bytes> load_armored(const std::filesystem::path& path);

}  // namespace infhors

#endif
