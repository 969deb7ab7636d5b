#pragma once

#include <stdexcept>
#include <string>

namespace enkvote {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Argument outside its documented domain (range, parity, degenerate value).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Randomness source failed or a rejection-sampling cap was exhausted.
class EntropyError : public Error {
public:
    explicit EntropyError(const std::string& msg) : Error(msg) {}
};

/// Modular inverse requested for a non-unit.
class NotInvertibleError : public Error {
public:
    explicit NotInvertibleError(const std::string& msg) : Error(msg) {}
};

/// A bounded search or a blocking wait ran out of budget.
class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& msg) : Error(msg) {}
};

/// Malformed wire bytes: bad length, bad hex, bad framing, unknown field.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

/// Authenticated decryption failed.
class AuthFailError : public Error {
public:
    explicit AuthFailError(const std::string& msg) : Error(msg) {}
};

/// A MAC or cipher nonce was presented twice under the same key.
class NonceReuseError : public Error {
public:
    explicit NonceReuseError(const std::string& msg) : Error(msg) {}
};

/// Payload does not fit the group's encode capacity.
class PayloadTooLargeError : public Error {
public:
    explicit PayloadTooLargeError(const std::string& msg) : Error(msg) {}
};

/// Group element does not carry a valid payload frame.
class DecodeError : public Error {
public:
    explicit DecodeError(const std::string& msg) : Error(msg) {}
};

/// Operation invoked in the wrong protocol or session state.
class StateError : public Error {
public:
    explicit StateError(const std::string& msg) : Error(msg) {}
};

/// Ballot choice index outside the candidate set.
class ChoiceOutOfRangeError : public Error {
public:
    explicit ChoiceOutOfRangeError(const std::string& msg) : Error(msg) {}
};

/// Inconsistent election configuration at setup time.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Manifest file rejected.
class ManifestError : public Error {
public:
    explicit ManifestError(const std::string& msg) : Error(msg) {}
};

/// Attack oracle asked to brute-force a group too large to enumerate.
class OracleTooLargeError : public Error {
public:
    explicit OracleTooLargeError(const std::string& msg) : Error(msg) {}
};

/// Message bus asked to deliver to a name nobody registered.
class UnknownEndpointError : public Error {
public:
    explicit UnknownEndpointError(const std::string& msg) : Error(msg) {}
};

/// Malformed envelope stream (unknown message type, truncated frame).
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error(msg) {}
};

/// Revote iteration limit reached with rounds still failing.
class RoundCapExceededError : public Error {
public:
    explicit RoundCapExceededError(const std::string& msg) : Error(msg) {}
};

} // namespace enkvote
