// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#include "infhors/ref_backend.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstring>

#include "infhors/errors.hpp"
#include "infhors/symmetric.hpp"

namespace infhors {

namespace {

constexpr uint32_t BACKEND_ID_V1 = 0x52454631;  // "REF1"
constexpr uint32_t BACKEND_ID_V2 = 0x52454632;  // "REF2"

constexpr size_t NONCE_LEN = 12;
constexpr size_t TAG_LEN = 16;
constexpr size_t PAIR_ID_LEN = 16;
constexpr size_t WRAP_KEY_LEN = 16;
constexpr size_t PART_BLOB_LEN = PAIR_ID_LEN + WRAP_KEY_LEN;

struct GcmCtx {
    EVP_CIPHER_CTX* ctx;
    GcmCtx() : ctx(EVP_CIPHER_CTX_new()) {
        if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
    }
    ~GcmCtx() { EVP_CIPHER_CTX_free(ctx); }
    GcmCtx(const GcmCtx&) = delete;
    GcmCtx& operator=(const GcmCtx&) = delete;
};

void gcm_seal(std::span<const uint8_t, WRAP_KEY_LEN> key,
              std::span<const uint8_t, NONCE_LEN> nonce,
              std::span<const uint8_t> aad, std::span<const uint8_t> plaintext,
              uint8_t* ciphertext_out, uint8_t* tag_out) {
    GcmCtx c;
    int len = 0;
    if (EVP_EncryptInit_ex(c.ctx, EVP_aes_128_gcm(), nullptr, nullptr,
                           nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, NONCE_LEN,
                            nullptr) != 1 ||
        EVP_EncryptInit_ex(c.ctx, nullptr, nullptr, key.data(),
                           nonce.data()) != 1 ||
        EVP_EncryptUpdate(c.ctx, nullptr, &len, aad.data(),
                          static_cast<int>(aad.size())) != 1 ||
        EVP_EncryptUpdate(c.ctx, ciphertext_out, &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1 ||
        EVP_EncryptFinal_ex(c.ctx, ciphertext_out + len, &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, TAG_LEN, tag_out) !=
            1)
        throw Error("GCM encryption failed");
}

bool gcm_open(std::span<const uint8_t, WRAP_KEY_LEN> key,
              std::span<const uint8_t, NONCE_LEN> nonce,
              std::span<const uint8_t> aad, std::span<const uint8_t> ciphertext,
              std::span<const uint8_t, TAG_LEN> tag, uint8_t* plaintext_out) {
    GcmCtx c;
    int len = 0;
    if (EVP_DecryptInit_ex(c.ctx, EVP_aes_128_gcm(), nullptr, nullptr,
                           nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, NONCE_LEN,
                            nullptr) != 1 ||
        EVP_DecryptInit_ex(c.ctx, nullptr, nullptr, key.data(),
                           nonce.data()) != 1 ||
        EVP_DecryptUpdate(c.ctx, nullptr, &len, aad.data(),
                          static_cast<int>(aad.size())) != 1 ||
        EVP_DecryptUpdate(c.ctx, plaintext_out, &len, ciphertext.data(),
                          static_cast<int>(ciphertext.size())) != 1)
        throw Error("GCM decryption failed");
    std::array<uint8_t, TAG_LEN> tag_copy;
    std::memcpy(tag_copy.data(), tag.data(), TAG_LEN);
    if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, TAG_LEN,
                            tag_copy.data()) != 1)
        throw Error("GCM decryption failed");
    return EVP_DecryptFinal_ex(c.ctx, plaintext_out + len, &len) == 1;
}

std::array<uint8_t, NONCE_LEN> fresh_nonce() {
    std::array<uint8_t, NONCE_LEN> nonce;
    if (RAND_bytes(nonce.data(), static_cast<int>(nonce.size())) != 1)
        throw EntropyError("nonce generation failed");
    return nonce;
}

size_t plaintext_len_for(CiphertextKind kind) {
    return kind == CiphertextKind::Bit ? 1 : 16;
}

}  // namespace

struct ReferenceBackend::KeyRef {
    std::array<uint8_t, PAIR_ID_LEN> pair_id;
    std::array<uint8_t, WRAP_KEY_LEN> wrap_key;
};

ReferenceBackend::ReferenceBackend(RefEncoding encoding)
    : encoding_(encoding) {}

uint32_t ReferenceBackend::id() const {
    return encoding_ == RefEncoding::v1 ? BACKEND_ID_V1 : BACKEND_ID_V2;
}

std::string ReferenceBackend::name() const {
    return encoding_ == RefEncoding::v1 ? "reference-gcm-v1"
                                        : "reference-gcm-v2";
}

BackendKeyPair ReferenceBackend::keygen(unsigned security_level,
                                        EntropySource& entropy) {
    if (security_level != 128)
        throw FormatError("reference backend: unsupported security level");
    Bytes blob;
    blob.reserve(PART_BLOB_LEN);
    const Block128 pair_id = entropy.block();
    const Block128 wrap = entropy.block();
    blob.insert(blob.end(), pair_id.bytes.begin(), pair_id.bytes.end());
    blob.insert(blob.end(), wrap.bytes.begin(), wrap.bytes.end());
    BackendKeyPair kp;
    kp.public_part = PublicPart{id(), blob};
    kp.secret_part = SecretPart{id(), blob};
    kp.params_desc = name() + ": AES-128-GCM emulation, pair-scoped wrap key";
    return kp;
}

ReferenceBackend::KeyRef ReferenceBackend::parse_part(
    uint32_t part_backend_id, std::span<const uint8_t> blob,
    const char* what) const {
    if (part_backend_id != id())
        throw KeyDomainError(std::string(what) +
                             ": backend id does not match this backend");
    if (blob.size() != PART_BLOB_LEN)
        throw FormatError(std::string(what) + ": malformed key blob");
    KeyRef ref;
    std::memcpy(ref.pair_id.data(), blob.data(), PAIR_ID_LEN);
    std::memcpy(ref.wrap_key.data(), blob.data() + PAIR_ID_LEN, WRAP_KEY_LEN);
    return ref;
}

Ciphertext ReferenceBackend::seal(const KeyRef& key,
                                  std::span<const uint8_t> plaintext,
                                  CiphertextKind kind) const {
    const auto nonce = fresh_nonce();
    // Authenticated data binds the ciphertext to backend, key pair, and kind,
    // so any cross-domain use fails authentication rather than decrypting.
    Bytes aad;
    put_u32(aad, id());
    aad.insert(aad.end(), key.pair_id.begin(), key.pair_id.end());
    aad.push_back(static_cast<uint8_t>(kind));

    Bytes ct(plaintext.size());
    std::array<uint8_t, TAG_LEN> tag;
    gcm_seal(key.wrap_key, nonce, aad, plaintext, ct.data(), tag.data());

    Ciphertext out;
    out.backend_id = id();
    out.kind = kind;
    if (encoding_ == RefEncoding::v1) {
        // v1: [nonce][tag][ciphertext]
        out.payload.insert(out.payload.end(), nonce.begin(), nonce.end());
        out.payload.insert(out.payload.end(), tag.begin(), tag.end());
        out.payload.insert(out.payload.end(), ct.begin(), ct.end());
    } else {
        // v2: [nonce length][nonce][ciphertext][tag]
        out.payload.push_back(static_cast<uint8_t>(NONCE_LEN));
        out.payload.insert(out.payload.end(), nonce.begin(), nonce.end());
        out.payload.insert(out.payload.end(), ct.begin(), ct.end());
        out.payload.insert(out.payload.end(), tag.begin(), tag.end());
    }
    return out;
}

Bytes ReferenceBackend::open(const KeyRef& key, const Ciphertext& c,
                             CiphertextKind expected_kind) const {
    if (c.backend_id != id())
        throw KeyDomainError("ciphertext: produced by a different backend");
    if (c.kind != expected_kind)
        throw KeyDomainError(std::string("ciphertext: expected kind ") +
                             kind_name(expected_kind) + ", got " +
                             kind_name(c.kind));
    std::array<uint8_t, NONCE_LEN> nonce;
    std::array<uint8_t, TAG_LEN> tag;
    std::span<const uint8_t> ct;
    const Bytes& p = c.payload;
    if (encoding_ == RefEncoding::v1) {
        if (p.size() < NONCE_LEN + TAG_LEN)
            throw FormatError("ciphertext: payload too short");
        std::memcpy(nonce.data(), p.data(), NONCE_LEN);
        std::memcpy(tag.data(), p.data() + NONCE_LEN, TAG_LEN);
        ct = std::span<const uint8_t>(p).subspan(NONCE_LEN + TAG_LEN);
    } else {
        if (p.size() < 1 + NONCE_LEN + TAG_LEN || p[0] != NONCE_LEN)
            throw FormatError("ciphertext: payload too short");
        std::memcpy(nonce.data(), p.data() + 1, NONCE_LEN);
        std::memcpy(tag.data(), p.data() + p.size() - TAG_LEN, TAG_LEN);
        ct = std::span<const uint8_t>(p).subspan(
            1 + NONCE_LEN, p.size() - 1 - NONCE_LEN - TAG_LEN);
    }
    if (ct.size() != plaintext_len_for(c.kind))
        throw FormatError("ciphertext: payload length does not match kind");

    Bytes aad;
    put_u32(aad, id());
    aad.insert(aad.end(), key.pair_id.begin(), key.pair_id.end());
    aad.push_back(static_cast<uint8_t>(c.kind));

    Bytes pt(ct.size());
    if (!gcm_open(key.wrap_key, nonce, aad, ct, tag, pt.data()))
        throw KeyDomainError("ciphertext: authentication failed under this key pair");
    if (c.kind == CiphertextKind::Bit && pt[0] > 1)
        throw FormatError("ciphertext: bit plaintext out of range");
    return pt;
}

Ciphertext ReferenceBackend::enc(const PublicPart& pk,
                                 const Block128& plaintext,
                                 CiphertextKind kind) {
    count_enc();
    if (kind == CiphertextKind::Bit)
        throw FormatError("enc: bit ciphertexts are produced by eval_cmp only");
    const KeyRef key = parse_part(pk.backend_id, pk.blob, "public part");
    return seal(key, plaintext.bytes, kind);
}

Ciphertext ReferenceBackend::eval_prf(const PublicPart& pk,
                                      const Ciphertext& encrypted_key,
                                      uint64_t input, uint8_t domain_tag) {
    count_eval_prf();
    const KeyRef key = parse_part(pk.backend_id, pk.blob, "public part");
    const Bytes key_pt = open(key, encrypted_key, CiphertextKind::KeyMaterial);
    PrfKey inner;
    std::memcpy(inner.bytes.data(), key_pt.data(), inner.bytes.size());
    const Block128 result = prf(inner, input, domain_tag);
    return seal(key, result.bytes, CiphertextKind::KeyMaterial);
}

Ciphertext ReferenceBackend::eval_owf_prf(const PublicPart& pk,
                                          const Ciphertext& encrypted_key,
                                          uint64_t index, uint8_t domain_tag) {
    count_eval_owf();
    const KeyRef key = parse_part(pk.backend_id, pk.blob, "public part");
    const Bytes key_pt = open(key, encrypted_key, CiphertextKind::KeyMaterial);
    PrfKey inner;
    std::memcpy(inner.bytes.data(), key_pt.data(), inner.bytes.size());
    const Block128 image = dm_owf(prf(inner, index, domain_tag));
    return seal(key, image.bytes, CiphertextKind::OwfImage);
}

Ciphertext ReferenceBackend::eval_cmp(const PublicPart& pk,
                                      const Ciphertext& a,
                                      const Ciphertext& b) {
    count_eval_cmp();
    if (a.kind != b.kind)
        throw KeyDomainError("eval_cmp: operand kinds differ");
    const KeyRef key = parse_part(pk.backend_id, pk.blob, "public part");
    const Bytes pa = open(key, a, a.kind);
    const Bytes pb = open(key, b, b.kind);
    uint8_t diff = pa.size() == pb.size() ? 0 : 1;
    for (size_t i = 0; diff == 0 && i < pa.size(); ++i)
        diff |= static_cast<uint8_t>(pa[i] ^ pb[i]);
    const uint8_t bit = diff == 0 ? 1 : 0;
    return seal(key, std::span<const uint8_t>(&bit, 1), CiphertextKind::Bit);
}

Bytes ReferenceBackend::reveal(const RevealCapability& cap,
                               const Ciphertext& c) {
    count_reveal();
    if (!cap.policy.allows(c.kind))
        throw PolicyViolation(std::string("reveal: policy forbids ") +
                              kind_name(c.kind) + " ciphertexts");
    const KeyRef key = parse_part(cap.secret.backend_id, cap.secret.blob,
                                  "reveal capability");
    return open(key, c, c.kind);
}

std::unique_ptr<RevealCapability> ReferenceBackend::derive_verifier_capability(
    const PublicPart& pk) {
    // Validate the blob shape up front so a corrupt public part fails here,
    // not at first use.
    parse_part(pk.backend_id, pk.blob, "public part");
    auto cap = std::make_unique<RevealCapability>();
    cap->secret = SecretPart{pk.backend_id, pk.blob};
    cap->policy = RevealPolicy::verifier();
    return cap;
}

std::unique_ptr<EvalBackend> make_backend(uint32_t backend_id) {
    switch (backend_id) {
        case BACKEND_ID_V1:
            return std::make_unique<ReferenceBackend>(RefEncoding::v1);
        case BACKEND_ID_V2:
            return std::make_unique<ReferenceBackend>(RefEncoding::v2);
        default:
            throw FormatError("unknown evaluation backend id");
    }
}

}  // namespace infhors
