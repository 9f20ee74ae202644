// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/keystore.hpp"

#include <zlib.h>

#include <fstream>
#include <utility>

#include "infhors/errors.hpp"

namespace infhors {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Registry

void SignerRegistry::register_id(const SignerId& id) {
    auto [it, inserted] = by_canonical_.emplace(id.canonical, id);
    if (!inserted) {
        if (it->second.raw == id.raw)
            throw RegistrationError("registry: duplicate raw id " +
                                    to_hex(id.raw));
        throw RegistrationError("registry: canonical collision between raw ids " +
                                to_hex(it->second.raw) + " and " +
                                to_hex(id.raw));
    }
}

SignerRegistry SignerRegistry::register_ids(std::span<const SignerId> ids) {
    if (ids.empty()) throw RegistrationError("registry: id list is empty");
    SignerRegistry reg;
    for (const SignerId& id : ids) reg.register_id(id);
    return reg;
}

std::optional<SignerId> SignerRegistry::lookup(uint64_t canonical) const {
    auto it = by_canonical_.find(canonical);
    if (it == by_canonical_.end()) return std::nullopt;
    return it->second;
}

// ---------------------------------------------------------------------------
// Low-level file helpers

namespace {

uint32_t crc32_of(std::span<const uint8_t> data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    return static_cast<uint32_t>(crc);
}

Bytes read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw StorageError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(f)),
               std::istreambuf_iterator<char>());
    if (f.bad()) throw StorageError("read failed for " + path.string());
    return data;
}

void write_file_atomic(const fs::path& path, std::span<const uint8_t> data) {
    if (!path.parent_path().empty()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw StorageError("cannot create directory " +
                               path.parent_path().string());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw StorageError("cannot create " + tmp.string());
        f.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size()));
        f.flush();
        if (!f) throw StorageError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw StorageError("cannot rename " + tmp.string());
}

/// Single-record container: [4-byte magic][4-byte BE length][payload]
/// [4-byte crc32 over everything before it].
Bytes wrap_record(uint32_t magic, std::span<const uint8_t> payload) {
    Bytes out;
    out.reserve(payload.size() + 12);
    put_u32(out, magic);
    put_u32(out, static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    put_u32(out, crc32_of(out));
    return out;
}

Bytes unwrap_record(uint32_t magic, std::span<const uint8_t> data,
                    const fs::path& path) {
    if (data.size() < 12)
        throw StorageError("truncated record in " + path.string());
    ByteReader reader(data);
    if (reader.u32() != magic)
        throw StorageError("wrong record magic in " + path.string());
    const uint32_t len = reader.u32();
    if (reader.remaining() != static_cast<size_t>(len) + 4)
        throw StorageError("record length mismatch in " + path.string());
    Bytes payload = reader.take(len);
    const uint32_t stored = reader.u32();
    if (stored != crc32_of(data.first(data.size() - 4)))
        throw StorageError("checksum mismatch in " + path.string());
    return payload;
}

constexpr uint32_t MAGIC_STATE = 0x49535354;      // "ISST"
constexpr uint32_t MAGIC_OTK = 0x494F544B;        // "IOTK"
constexpr uint32_t MAGIC_AUTHORITY = 0x49415554;  // "IAUT"

void put_secret_part(Bytes& out, const SecretPart& part) {
    put_u32(out, part.backend_id);
    put_u32(out, static_cast<uint32_t>(part.blob.size()));
    out.insert(out.end(), part.blob.begin(), part.blob.end());
}

SecretPart take_secret_part(ByteReader& reader) {
    SecretPart part;
    part.backend_id = reader.u32();
    part.blob = reader.take(reader.u32());
    return part;
}

}  // namespace

// ---------------------------------------------------------------------------
// Anti-replay ledger

const char* verdict_name(LedgerVerdict v) {
    switch (v) {
        case LedgerVerdict::Accept:
            return "accept";
        case LedgerVerdict::Replay:
            return "replay";
        case LedgerVerdict::Stale:
            return "stale";
    }
    return "unknown";
}

namespace {

constexpr size_t LEDGER_RECORD_LEN = 20;  // signer + counter + crc32

Bytes ledger_record(uint64_t signer, uint64_t counter) {
    Bytes rec;
    rec.reserve(LEDGER_RECORD_LEN);
    put_u64(rec, signer);
    put_u64(rec, counter);
    put_u32(rec, crc32_of(rec));
    return rec;
}

}  // namespace

VerifierLedger VerifierLedger::open(const fs::path& path, uint64_t window) {
    VerifierLedger ledger(window);
    ledger.log_path_ = path;
    if (!fs::exists(path)) return ledger;

    const Bytes data = read_file(path);
    size_t offset = 0;
    while (data.size() - offset >= LEDGER_RECORD_LEN) {
        std::span<const uint8_t> rec(data.data() + offset, LEDGER_RECORD_LEN);
        ByteReader reader(rec);
        const uint64_t signer = reader.u64();
        const uint64_t counter = reader.u64();
        const uint32_t stored = reader.u32();
        if (stored != crc32_of(rec.first(16))) {
            // A bad final record is a torn write from a crash and is dropped;
            // a bad record with valid data after it is real corruption.
            if (offset + LEDGER_RECORD_LEN >= data.size()) break;
            throw StorageError("corrupt ledger record in " + path.string());
        }
        ledger.apply_commit_locked(ledger.signers_[signer], counter);
        offset += LEDGER_RECORD_LEN;
    }
    return ledger;
}

LedgerVerdict VerifierLedger::classify_locked(const PerSigner& s,
                                              uint64_t counter) const {
    if (s.reserved.contains(counter)) return LedgerVerdict::Replay;
    if (s.any_committed) {
        if (s.high_water >= window_ && counter <= s.high_water - window_)
            return LedgerVerdict::Stale;
        if (s.committed_in_window.contains(counter))
            return LedgerVerdict::Replay;
    }
    return LedgerVerdict::Accept;
}

void VerifierLedger::apply_commit_locked(PerSigner& s, uint64_t counter) {
    s.reserved.erase(counter);
    s.any_committed = true;
    s.committed_in_window.insert(counter);
    if (counter > s.high_water) s.high_water = counter;
    // Entries at or below high_water - W are classified stale without
    // consulting the set, so they can be dropped to keep memory bounded.
    if (s.high_water >= window_) {
        const uint64_t cutoff = s.high_water - window_;
        s.committed_in_window.erase(s.committed_in_window.begin(),
                                    s.committed_in_window.upper_bound(cutoff));
    }
}

VerifierLedger::Reservation VerifierLedger::reserve(uint64_t signer_canonical,
                                                    uint64_t counter) {
    std::lock_guard<std::mutex> lock(mu_);
    PerSigner& s = signers_[signer_canonical];
    Reservation r;
    r.signer = signer_canonical;
    r.counter = counter;
    r.verdict = classify_locked(s, counter);
    if (r.verdict == LedgerVerdict::Accept) s.reserved.insert(counter);
    return r;
}

void VerifierLedger::commit(const Reservation& r) {
    if (r.verdict != LedgerVerdict::Accept)
        throw StateError("ledger: commit of a non-accepted reservation");
    std::lock_guard<std::mutex> lock(mu_);
    // Durability first: if the record cannot be written, the acceptance must
    // not be reported, and the reservation stays held.
    if (!log_path_.empty()) {
        if (!log_path_.parent_path().empty()) {
            std::error_code ec;
            fs::create_directories(log_path_.parent_path(), ec);
            if (ec)
                throw StorageError("cannot create directory " +
                                   log_path_.parent_path().string());
        }
        std::ofstream f(log_path_, std::ios::binary | std::ios::app);
        const Bytes rec = ledger_record(r.signer, r.counter);
        f.write(reinterpret_cast<const char*>(rec.data()),
                static_cast<std::streamsize>(rec.size()));
        f.flush();
        if (!f)
            throw StorageError("ledger: append failed for " +
                               log_path_.string());
    }
    apply_commit_locked(signers_[r.signer], r.counter);
}

void VerifierLedger::release(const Reservation& r) {
    if (r.verdict != LedgerVerdict::Accept) return;
    std::lock_guard<std::mutex> lock(mu_);
    signers_[r.signer].reserved.erase(r.counter);
}

// ---------------------------------------------------------------------------
// One-time-key cache

OtkCache::OtkCache(fs::path dir, size_t capacity)
    : capacity_(capacity), dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
        throw StorageError("cannot create cache directory " + dir_.string());
}

fs::path OtkCache::entry_path(const Key& key) const {
    return dir_ / (canonical_hex(key.first) + "-" +
                   std::to_string(key.second) + ".otk");
}

std::optional<EncryptedOneTimeKey> OtkCache::get(uint64_t signer_canonical,
                                                 uint64_t counter) {
    const Key key{signer_canonical, counter};
    std::unique_lock lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        order_.splice(order_.begin(), order_, it->second.second);
        return it->second.first;
    }
    if (dir_.empty() || !fs::exists(entry_path(key))) return std::nullopt;
    EncryptedOneTimeKey otk;
    try {
        otk = load_otk(entry_path(key));
    } catch (const StorageError&) {
        return std::nullopt;  // corrupt cache entries degrade to misses
    } catch (const FormatError&) {
        return std::nullopt;
    }
    order_.push_front(key);
    entries_.emplace(key, std::make_pair(otk, order_.begin()));
    evict_locked();
    return otk;
}

void OtkCache::put(EncryptedOneTimeKey otk) {
    const Key key{otk.signer_canonical, otk.counter};
    std::unique_lock lock(mu_);
    if (!dir_.empty()) save_otk(entry_path(key), otk);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        order_.splice(order_.begin(), order_, it->second.second);
        it->second.first = std::move(otk);
        return;
    }
    order_.push_front(key);
    entries_.emplace(key, std::make_pair(std::move(otk), order_.begin()));
    evict_locked();
}

size_t OtkCache::entries() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

void OtkCache::evict_locked() {
    while (entries_.size() > capacity_) {
        entries_.erase(order_.back());
        order_.pop_back();
    }
}

// ---------------------------------------------------------------------------
// Checksummed single-record files

void save_signer_state(const fs::path& path, const SignerSeedState& state) {
    Bytes payload;
    put_u16(payload, static_cast<uint16_t>(state.id.raw.size()));
    payload.insert(payload.end(), state.id.raw.begin(), state.id.raw.end());
    put_u64(payload, state.id.canonical);
    payload.insert(payload.end(), state.gamma.bytes.begin(),
                   state.gamma.bytes.end());
    put_u64(payload, state.counter);
    put_u64(payload, state.max_counter);
    write_file_atomic(path, wrap_record(MAGIC_STATE, payload));
}

SignerSeedState load_signer_state(const fs::path& path) {
    const Bytes payload = unwrap_record(MAGIC_STATE, read_file(path), path);
    ByteReader reader(payload);
    SignerSeedState state;
    state.id.raw = reader.take(reader.u16());
    state.id.canonical = reader.u64();
    reader.take_into(state.gamma.bytes);
    state.counter = reader.u64();
    state.max_counter = reader.u64();
    if (!reader.done())
        throw StorageError("trailing bytes in " + path.string());
    if (state.id.canonical != canonical_id(state.id.raw))
        throw StorageError("canonical id mismatch in " + path.string());
    return state;
}

void save_otk(const fs::path& path, const EncryptedOneTimeKey& otk) {
    write_file_atomic(path, wrap_record(MAGIC_OTK, otk.encode()));
}

EncryptedOneTimeKey load_otk(const fs::path& path) {
    return EncryptedOneTimeKey::decode(
        unwrap_record(MAGIC_OTK, read_file(path), path));
}

void save_authority(const fs::path& path, const MasterKeyMaterial& material) {
    Bytes payload;
    payload.insert(payload.end(), material.msk.bytes.begin(),
                   material.msk.bytes.end());
    material.mpk.encode_into(payload);
    material.backend_public.encode_into(payload);
    put_secret_part(payload, material.backend_secret);
    write_file_atomic(path, wrap_record(MAGIC_AUTHORITY, payload));
}

MasterKeyMaterial load_authority(const fs::path& path) {
    const Bytes payload =
        unwrap_record(MAGIC_AUTHORITY, read_file(path), path);
    ByteReader reader(payload);
    MasterKeyMaterial material;
    reader.take_into(material.msk.bytes);
    material.mpk = Ciphertext::decode(reader);
    material.backend_public = PublicPart::decode(reader);
    material.backend_secret = take_secret_part(reader);
    if (!reader.done())
        throw StorageError("trailing bytes in " + path.string());
    return material;
}

void save_pk(const fs::path& path, const DistributablePk& pk) {
    // The distributable PK file is the bare framing — the one format other
    // implementations consume — so it carries no record wrapper.
    write_file_atomic(path, pk.encode());
}

DistributablePk load_pk(const fs::path& path) {
    return DistributablePk::decode(read_file(path));
}

std::string canonical_hex(uint64_t canonical) {
    Bytes raw;
    put_u64(raw, canonical);
    return to_hex(raw);
}

fs::path signer_state_path(const fs::path& dir, uint64_t canonical) {
    return dir / ("signer-" + canonical_hex(canonical) + ".state");
}

// ---------------------------------------------------------------------------
// Hex-armored fixtures

void save_armored(const fs::path& path,
                  std::span<const std::pair<std::string, Bytes>> fields) {
    std::string text;
    for (const auto& [name, value] : fields)
        text += name + ": " + to_hex(value) + "\n";
    write_file_atomic(path,
                      std::span<const uint8_t>(
                          reinterpret_cast<const uint8_t*>(text.data()),
                          text.size()));
}

std::map<std::string, Bytes> load_armored(const fs::path& path) {
    const Bytes data = read_file(path);
    std::map<std::string, Bytes> fields;
    std::string line;
    for (size_t i = 0; i <= data.size(); ++i) {
        if (i < data.size() && data[i] != '\n') {
            line.push_back(static_cast<char>(data[i]));
            continue;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') {
            const size_t sep = line.find(": ");
            if (sep == std::string::npos)
                throw FormatError("armored fixture: malformed line in " +
                                  path.string());
            fields[line.substr(0, sep)] = from_hex(line.substr(sep + 2));
        }
        line.clear();
    }
    return fields;
}

}  // namespace infhors
