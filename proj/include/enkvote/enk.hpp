#pragma once

#include <cstdint>

#include "enkvote/crypto.hpp"
#include "enkvote/numtheory.hpp"

namespace enkvote {

enum class EnkRole : std::uint8_t { initiator, responder };

/// created -> sent_first -> sent_second -> sent_third -> complete is the
/// combined protocol order; each side walks its own half. Any out-of-order
/// or malformed input moves the session to aborted for good.
enum class EnkPhase : std::uint8_t {
    created,
    sent_first,
    sent_second,
    sent_third,
    complete,
    aborted,
};

/// One pass of the exchange: sequence octet (1, 2 or 3) plus the
/// password-wrapped element.
struct EnkMessage {
    std::uint8_t seq = 0;
    GroupCiphertext ct;

    Bytes wire() const;
    static EnkMessage from_wire(ByteView data, const GroupParams& params); // FormatError
    static std::size_t wire_size(const GroupParams& params);
};

/// Three-pass exponentiation exchange in which every pass additionally rides
/// under the pre-shared password. The initiator owns the payload and exponent
/// a; the responder blinds with b and is the one who ends up with the payload.
/// Blinding exponents live and die inside the session.
class EnkSession {
public:
    EnkSession(EnkRole role, GroupParams params, Password password);

    /// Test and analysis constructor with a pinned blinding exponent.
    /// DomainError if the pair is not a unit pair mod q-1.
    static EnkSession with_exponent(EnkRole role, GroupParams params, Password password,
                                    BlindingExponent exponent);

    /// Initiator, created. The payload element must be non-degenerate (not
    /// 0, 1 or q-1) and, in a safe prime group, a quadratic residue.
    EnkMessage start(const Bigint& message, EntropySource& rng);

    /// Responder, created, consumes pass 1. An unwrapped 0 is DomainError;
    /// an unwrapped 1 counts as an anomaly and proceeds.
    EnkMessage blind(const EnkMessage& first, EntropySource& rng);

    /// Initiator, sent_first, consumes pass 2, strips exponent a.
    EnkMessage unblind(const EnkMessage& second, EntropySource& rng);

    /// Responder, sent_second, consumes pass 3, strips exponent b and
    /// returns the payload element.
    Bigint finish(const EnkMessage& third);

    EnkRole role() const { return role_; }
    EnkPhase phase() const { return phase_; }
    int anomaly_count() const { return anomalies_; }
    const GroupParams& params() const { return params_; }

private:
    void ensure(bool ok, const char* what); // StateError + abort when not ok
    Bigint unwrap_checked(const EnkMessage& msg, std::uint8_t expected_seq);
    const BlindingExponent& exponent(EntropySource& rng);

    EnkRole role_;
    EnkPhase phase_ = EnkPhase::created;
    GroupParams params_;
    Password password_;
    BlindingExponent exponent_;
    bool have_exponent_ = false;
    int anomalies_ = 0;
};

} // namespace enkvote
