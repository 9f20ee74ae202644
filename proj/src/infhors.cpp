// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/infhors.hpp"

#include <set>
#include <string>

#include "infhors/errors.hpp"
#include "infhors/symmetric.hpp"

namespace infhors {

Bytes DistributablePk::encode() const {
    Bytes out;
    backend_public.encode_into(out);
    mpk.encode_into(out);
    return out;
}

DistributablePk DistributablePk::decode(std::span<const uint8_t> data) {
    ByteReader reader(data);
    DistributablePk pk;
    pk.backend_public = PublicPart::decode(reader);
    pk.mpk = Ciphertext::decode(reader);
    if (!reader.done())
        throw FormatError("public key: trailing bytes after master ciphertext");
    if (pk.mpk.kind != CiphertextKind::KeyMaterial)
        throw FormatError("public key: master ciphertext has wrong kind");
    if (pk.mpk.backend_id != pk.backend_public.backend_id)
        throw FormatError(
            "public key: master ciphertext and public part name different "
            "backends");
    return pk;
}

Bytes SignerSeedState::encode_secret_material() const {
    Bytes out;
    out.insert(out.end(), gamma.bytes.begin(), gamma.bytes.end());
    put_u64(out, counter);
    return out;
}

Bytes InfHorsSignature::encode() const {
    Bytes out;
    out.reserve(chunks.size() * Block128::size + 8);
    for (const Block128& c : chunks)
        out.insert(out.end(), c.bytes.begin(), c.bytes.end());
    put_u64(out, counter);
    return out;
}

InfHorsSignature InfHorsSignature::decode(const HorsParams& params,
                                          std::span<const uint8_t> data) {
    const size_t expected = params.k * Block128::size + 8;
    if (data.size() != expected)
        throw FormatError("signature: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(data.size()));
    ByteReader reader(data);
    InfHorsSignature sig;
    sig.chunks.resize(params.k);
    for (uint32_t i = 0; i < params.k; ++i)
        reader.take_into(sig.chunks[i].bytes);
    sig.counter = reader.u64();
    return sig;
}

Bytes EncryptedOneTimeKey::encode() const {
    Bytes out;
    put_u64(out, signer_canonical);
    put_u64(out, counter);
    out.push_back(full ? 1 : 0);
    put_u32(out, static_cast<uint32_t>(components.size()));
    for (const auto& [index, ct] : components) {
        put_u32(out, index);
        ct.encode_into(out);
    }
    return out;
}

EncryptedOneTimeKey EncryptedOneTimeKey::decode(
    std::span<const uint8_t> data) {
    ByteReader reader(data);
    EncryptedOneTimeKey otk;
    otk.signer_canonical = reader.u64();
    otk.counter = reader.u64();
    const uint8_t full_byte = reader.u8();
    if (full_byte > 1)
        throw FormatError("one-time key: malformed coverage flag");
    otk.full = full_byte == 1;
    const uint32_t count = reader.u32();
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t index = reader.u32();
        Ciphertext ct = Ciphertext::decode(reader);
        if (!otk.components.emplace(index, std::move(ct)).second)
            throw FormatError("one-time key: duplicate component index");
    }
    if (!reader.done())
        throw FormatError("one-time key: trailing bytes after components");
    return otk;
}

KeygenResult keygen(const SystemParams& params, EvalBackend& backend,
                    std::span<const SignerId> ids, EntropySource& entropy) {
    if (ids.empty()) throw RegistrationError("keygen: id list is empty");
    std::set<uint64_t> seen;
    for (const SignerId& id : ids)
        if (!seen.insert(id.canonical).second)
            throw RegistrationError(
                "keygen: canonical id collision for raw id " +
                to_hex(id.raw));

    KeygenResult result;
    result.authority.msk = entropy.key();
    BackendKeyPair bk = backend.keygen(params.backend_level, entropy);
    result.authority.backend_public = bk.public_part;
    result.authority.backend_secret = bk.secret_part;

    Block128 msk_block;
    msk_block.bytes = result.authority.msk.bytes;
    result.authority.mpk = backend.enc(bk.public_part, msk_block,
                                       CiphertextKind::KeyMaterial);

    result.pk.backend_public = bk.public_part;
    result.pk.mpk = result.authority.mpk;

    result.signers.reserve(ids.size());
    for (const SignerId& id : ids) {
        SignerSeedState state;
        state.id = id;
        const Block128 g = prf(result.authority.msk, id.canonical, TAG_SEED);
        state.gamma.bytes = g.bytes;
        state.counter = 0;
        result.signers.push_back(std::move(state));
    }
    return result;
}

InfHorsSignature sign(const SystemParams& params, SignerSeedState& state,
                      std::span<const uint8_t> message) {
    if (state.counter >= state.max_counter)
        throw StateError("sign: signer counter reached its policy ceiling");
    const uint64_t j = state.counter;

    const Block128 sk_j = prf(state.gamma, j, TAG_STATE);
    PrfKey state_key;
    state_key.bytes = sk_j.bytes;

    const Digest256 digest = hash_message(message);
    const IndexVector idx = derive_indices(params.hors, digest);

    InfHorsSignature sig;
    sig.counter = j;
    sig.chunks.reserve(params.hors.k);
    for (uint32_t x : idx.indices)
        sig.chunks.push_back(prf(state_key, x, TAG_CHUNK));

    state.counter = j + 1;
    return sig;
}

namespace {

/// Shared head of both construction paths: the encrypted per-state key
/// cskᵢʲ for (signer, counter), derived from the master ciphertext alone.
Ciphertext encrypted_state_key(EvalBackend& backend, const DistributablePk& pk,
                               uint64_t signer_canonical, uint64_t counter) {
    const Ciphertext c_gamma = backend.eval_prf(pk.backend_public, pk.mpk,
                                                signer_canonical, TAG_SEED);
    return backend.eval_prf(pk.backend_public, c_gamma, counter, TAG_STATE);
}

}  // namespace

EncryptedOneTimeKey construct_pk(const SystemParams& params,
                                 EvalBackend& backend,
                                 const DistributablePk& pk,
                                 uint64_t signer_canonical, uint64_t counter) {
    const Ciphertext c_sk =
        encrypted_state_key(backend, pk, signer_canonical, counter);
    EncryptedOneTimeKey otk;
    otk.signer_canonical = signer_canonical;
    otk.counter = counter;
    otk.full = true;
    for (uint32_t index = 0; index < params.hors.t; ++index)
        otk.components.emplace(
            index,
            backend.eval_owf_prf(pk.backend_public, c_sk, index, TAG_CHUNK));
    return otk;
}

EncryptedOneTimeKey construct_pk_partial(const SystemParams& params,
                                         EvalBackend& backend,
                                         const DistributablePk& pk,
                                         uint64_t signer_canonical,
                                         uint64_t counter,
                                         const IndexVector& indices) {
    for (uint32_t index : indices.indices)
        if (index >= params.hors.t)
            throw FormatError("partial construction: index out of range");
    const Ciphertext c_sk =
        encrypted_state_key(backend, pk, signer_canonical, counter);
    EncryptedOneTimeKey otk;
    otk.signer_canonical = signer_canonical;
    otk.counter = counter;
    otk.full = false;
    for (uint32_t index : indices.indices) {
        if (otk.components.contains(index)) continue;  // duplicates collapse
        otk.components.emplace(
            index,
            backend.eval_owf_prf(pk.backend_public, c_sk, index, TAG_CHUNK));
    }
    return otk;
}

bool verify(const SystemParams& params, EvalBackend& backend,
            const DistributablePk& pk, const EncryptedOneTimeKey& otk,
            std::span<const uint8_t> message, const InfHorsSignature& sigma,
            const RevealCapability& reveal) {
    if (sigma.chunks.size() != params.hors.k)
        throw FormatError("verify: signature chunk count mismatch");
    if (sigma.counter != otk.counter)
        throw StateError("verify: signature counter " +
                         std::to_string(sigma.counter) +
                         " does not match one-time key counter " +
                         std::to_string(otk.counter));

    const Digest256 digest = hash_message(message);
    const IndexVector idx = derive_indices(params.hors, digest);
    for (uint32_t x : idx.indices)
        if (!otk.covers(x))
            throw CoverageError(
                "verify: one-time key does not cover index " +
                std::to_string(x));

    // All k comparisons are evaluated unconditionally — the verdict is the
    // conjunction, with no data-dependent early exit.
    bool ok = true;
    for (uint32_t i = 0; i < params.hors.k; ++i) {
        const Block128 image = dm_owf(sigma.chunks[i]);
        const Ciphertext cv =
            backend.enc(pk.backend_public, image, CiphertextKind::OwfImage);
        const Ciphertext bit_ct = backend.eval_cmp(
            pk.backend_public, otk.components.at(idx.indices[i]), cv);
        const Bytes bit = backend.reveal(reveal, bit_ct);
        if (bit.size() != 1)
            throw FormatError("verify: comparison revealed a non-bit");
        ok = (bit[0] == 1) && ok;
    }
    return ok;
}

bool verify_online_offline(const SystemParams& params, EvalBackend& backend,
                           const DistributablePk& pk, OtkStore& cache,
                           uint64_t signer_canonical,
                           std::span<const uint8_t> message,
                           const InfHorsSignature& sigma,
                           const RevealCapability& reveal) {
    std::optional<EncryptedOneTimeKey> otk =
        cache.get(signer_canonical, sigma.counter);
    if (!otk) {
        otk = construct_pk(params, backend, pk, signer_canonical,
                           sigma.counter);
        cache.put(*otk);
    }
    return verify(params, backend, pk, *otk, message, sigma, reveal);
}

}  // namespace infhors
