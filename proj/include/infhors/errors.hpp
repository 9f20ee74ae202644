// Copyright (c) the INF-HORS authors.
// Licensed under the Apache 2.0 License.

#ifndef INFHORS_ERRORS_HPP
#define INFHORS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace infhors {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated encoding, wrong element count.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Ciphertext presented to a backend or key pair that did not produce it.
class KeyDomainError : public Error {
public:
    using Error::Error;
};

/// Reveal attempted on a ciphertext kind the capability does not allow.
class PolicyViolation : public Error {
public:
    using Error::Error;
};

/// Partial one-time key does not cover an index verification needs.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Counter mismatch, counter exhaustion, or other protocol-state fault.
class StateError : public Error {
public:
    using Error::Error;
};

/// Checksum mismatch, partial write, or I/O failure in persistent storage.
class StorageError : public Error {
public:
    using Error::Error;
};

class EntropyError : public Error {
public:
    using Error::Error;
};

/// Duplicate raw id or canonical-id collision at registration.
class RegistrationError : public Error {
public:
    using Error::Error;
};

}  // namespace infhors

#endif
