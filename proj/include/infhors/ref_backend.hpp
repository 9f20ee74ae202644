// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#ifndef INFHORS_REF_BACKEND_HPP
#define INFHORS_REF_BACKEND_HPP

#include <memory>

#include "infhors/eval_backend.hpp"

namespace infhors {

/// Reference backend: authenticated randomized encryption (AES-128-GCM)
/// under a backend-held wrapping key, with every eval_* implemented as
/// decrypt-compute-re-encrypt inside the backend boundary.
///
/// This is NOT a security-providing homomorphic scheme. Its public part
/// carries the wrapping key so that Enc and Eval work from public data,
/// exactly like the real scheme's evaluation key — but here that also makes
/// decryption possible from the public part. It exists to give the protocol
/// layers a backend with every API property they rely on (randomized
/// ciphertexts, key-domain isolation, correct evaluation, policy-scoped
/// reveal) at desk scale. A lattice-based backend is the intended
/// security-providing implementation of the same interface.
///
/// Two payload encodings are provided so the protocol's backend-agnosticism
/// is testable: both carry the same GCM fields in different layouts and
/// register distinct backend ids.
enum class RefEncoding : uint8_t { v1 = 1, v2 = 2 };

class ReferenceBackend final : public EvalBackend {
public:
    explicit ReferenceBackend(RefEncoding encoding = RefEncoding::v1);

    uint32_t id() const override;
    std::string name() const override;

    BackendKeyPair keygen(unsigned security_level,
                          EntropySource& entropy) override;
    Ciphertext enc(const PublicPart& pk, const Block128& plaintext,
                   CiphertextKind kind) override;
    Ciphertext eval_prf(const PublicPart& pk, const Ciphertext& encrypted_key,
                        uint64_t input, uint8_t domain_tag) override;
    Ciphertext eval_owf_prf(const PublicPart& pk,
                            const Ciphertext& encrypted_key, uint64_t index,
                            uint8_t domain_tag) override;
    Ciphertext eval_cmp(const PublicPart& pk, const Ciphertext& a,
                        const Ciphertext& b) override;
    Bytes reveal(const RevealCapability& cap, const Ciphertext& c) override;
    std::unique_ptr<RevealCapability> derive_verifier_capability(
        const PublicPart& pk) override;

private:
    struct KeyRef;  // pair id + wrapping key parsed out of a part blob

    KeyRef parse_part(uint32_t part_backend_id, std::span<const uint8_t> blob,
                      const char* what) const;
    Bytes open(const KeyRef& key, const Ciphertext& c,
               CiphertextKind expected_kind) const;
    Ciphertext seal(const KeyRef& key, std::span<const uint8_t> plaintext,
                    CiphertextKind kind) const;

    RefEncoding encoding_;
};

/// Backend registry keyed by the 4-byte id found in framings.
/// Throws FormatError for unknown ids.
std::unique_ptr<EvalBackend> make_backend(uint32_t backend_id);

}  // namespace infhors

#endif
