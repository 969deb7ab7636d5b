#include "enkvote/enk.hpp"

namespace enkvote {

Bytes EnkMessage::wire() const {
    Bytes out{seq};
    append(out, ct.wire());
    return out;
}

EnkMessage EnkMessage::from_wire(ByteView data, const GroupParams& params) {
    if (data.size() != wire_size(params))
        throw FormatError("exchange message has the wrong size for this group");
    if (data[0] < 1 || data[0] > 3)
        throw FormatError("exchange message sequence octet out of range");
    EnkMessage msg;
    msg.seq = data[0];
    msg.ct = GroupCiphertext::from_wire(data.subspan(1), params.ciphertext_body_width());
    return msg;
}

std::size_t EnkMessage::wire_size(const GroupParams& params) {
    return 1 + kPadNonceBytes + params.ciphertext_body_width();
}

EnkSession::EnkSession(EnkRole role, GroupParams params, Password password)
    : role_(role), params_(std::move(params)), password_(std::move(password)) {}

EnkSession EnkSession::with_exponent(EnkRole role, GroupParams params, Password password,
                                     BlindingExponent exponent) {
    if (exponent.e < 2 || exponent.e > params.q() - 2)
        throw DomainError("blinding exponent outside [2, q-2]");
    if (boost::multiprecision::gcd(exponent.e, params.q_minus_1()) != 1)
        throw DomainError("blinding exponent shares a factor with q-1");
    if ((exponent.e * exponent.e_inv) % params.q_minus_1() != 1)
        throw DomainError("blinding exponent inverse does not invert");
    EnkSession session(role, std::move(params), std::move(password));
    session.exponent_ = std::move(exponent);
    session.have_exponent_ = true;
    return session;
}

void EnkSession::ensure(bool ok, const char* what) {
    if (!ok) {
        phase_ = EnkPhase::aborted;
        throw StateError(what);
    }
}

const BlindingExponent& EnkSession::exponent(EntropySource& rng) {
    if (!have_exponent_) {
        exponent_ = sample_blinding_exponent(params_, rng);
        have_exponent_ = true;
    }
    return exponent_;
}

Bigint EnkSession::unwrap_checked(const EnkMessage& msg, std::uint8_t expected_seq) {
    ensure(msg.seq == expected_seq, "exchange message arrived out of order");
    Bigint value;
    try {
        value = ep_unwrap(password_, msg.ct, params_);
    } catch (...) {
        phase_ = EnkPhase::aborted;
        throw;
    }
    if (value == 0) {
        phase_ = EnkPhase::aborted;
        throw DomainError("unwrapped element is zero, exchange poisoned");
    }
    if (value == 1)
        ++anomalies_; // legal but fixed under exponentiation; count and go on
    return value;
}

EnkMessage EnkSession::start(const Bigint& message, EntropySource& rng) {
    ensure(role_ == EnkRole::initiator, "only the initiator starts an exchange");
    ensure(phase_ == EnkPhase::created, "exchange already started");
    if (message == 0 || message == 1 || message == params_.q() - 1) {
        phase_ = EnkPhase::aborted;
        throw DomainError("degenerate payload element");
    }
    if (!params_.is_element(message)) {
        phase_ = EnkPhase::aborted;
        throw DomainError("payload element outside [0, q)");
    }
    if (params_.profile() == GroupProfile::safe_prime && !is_quadratic_residue(message, params_)) {
        phase_ = EnkPhase::aborted;
        throw DomainError("payload element outside the residue subgroup");
    }
    EnkMessage out;
    out.seq = 1;
    out.ct = ep_wrap(password_, mod_exp(message, exponent(rng).e, params_), params_, rng);
    phase_ = EnkPhase::sent_first;
    return out;
}

EnkMessage EnkSession::blind(const EnkMessage& first, EntropySource& rng) {
    ensure(role_ == EnkRole::responder, "only the responder blinds pass one");
    ensure(phase_ == EnkPhase::created, "pass one arrived out of order");
    Bigint value = unwrap_checked(first, 1);
    EnkMessage out;
    out.seq = 2;
    out.ct = ep_wrap(password_, mod_exp(value, exponent(rng).e, params_), params_, rng);
    phase_ = EnkPhase::sent_second;
    return out;
}

EnkMessage EnkSession::unblind(const EnkMessage& second, EntropySource& rng) {
    ensure(role_ == EnkRole::initiator, "only the initiator strips its exponent");
    ensure(phase_ == EnkPhase::sent_first, "pass two arrived out of order");
    Bigint value = unwrap_checked(second, 2);
    EnkMessage out;
    out.seq = 3;
    out.ct = ep_wrap(password_, mod_exp(value, exponent(rng).e_inv, params_), params_, rng);
    phase_ = EnkPhase::sent_third;
    return out;
}

Bigint EnkSession::finish(const EnkMessage& third) {
    ensure(role_ == EnkRole::responder, "only the responder finishes");
    ensure(phase_ == EnkPhase::sent_second, "pass three arrived out of order");
    Bigint value = unwrap_checked(third, 3);
    Bigint message = mod_exp(value, exponent_.e_inv, params_);
    phase_ = EnkPhase::complete;
    return message;
}

} // namespace enkvote
