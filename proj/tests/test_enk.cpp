#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "enkvote/enk.hpp"
#include "oracles.hpp"

using namespace enkvote;

namespace {

Password fixed_password() {
    return Password::from_bytes({0x13, 0x37}, 16);
}

EnkMessage craft(std::uint8_t seq, const Bigint& inner, const Password& pw,
                 const GroupParams& params, EntropySource& rng) {
    EnkMessage msg;
    msg.seq = seq;
    msg.ct = ep_wrap(pw, inner, params, rng);
    return msg;
}

} // namespace

TEST_CASE("the three passes carry the expected inner values") {
    // plain profile: 5 is not a residue mod 23, the trace needs the full group
    auto params = GroupParams::create(23, GroupProfile::plain_prime);
    auto pw = fixed_password();
    auto rng = EntropySource::seeded(21, "trace");

    auto initiator = EnkSession::with_exponent(EnkRole::initiator, params, pw,
                                               BlindingExponent{3, mod_inverse(3, 22)});
    auto responder = EnkSession::with_exponent(EnkRole::responder, params, pw,
                                               BlindingExponent{7, mod_inverse(7, 22)});

    auto m1 = initiator.start(5, rng);
    CHECK(m1.seq == 1);
    CHECK(ep_unwrap(pw, m1.ct, params) == 10); // 5^3 mod 23
    CHECK(ep_unwrap(pw, m1.ct, params) == oracles::naive_pow_mod(5, 3, 23));

    auto m2 = responder.blind(m1, rng);
    CHECK(m2.seq == 2);
    CHECK(ep_unwrap(pw, m2.ct, params) == 14); // 10^7 mod 23

    auto m3 = initiator.unblind(m2, rng);
    CHECK(m3.seq == 3);
    CHECK(ep_unwrap(pw, m3.ct, params) == 17); // 14^15 mod 23

    CHECK(responder.finish(m3) == 5);
    CHECK(initiator.phase() == EnkPhase::sent_third);
    CHECK(responder.phase() == EnkPhase::complete);
    CHECK(initiator.anomaly_count() == 0);
    CHECK(responder.anomaly_count() == 0);
}

TEST_CASE("random exchanges deliver the payload exactly") {
    auto rng = EntropySource::seeded(22, "pipe");
    auto params = GroupParams::generate(64, GroupProfile::safe_prime, rng);
    auto pw = Password::random(kDefaultPasswordBits, rng);
    for (int i = 0; i < 1000; ++i) {
        Bigint raw = rng.in_range(2, params.q() - 2);
        Bigint message = (raw * raw) % params.q();
        if (message <= 1)
            continue;
        EnkSession a(EnkRole::initiator, params, pw);
        EnkSession b(EnkRole::responder, params, pw);
        Bigint got = b.finish(a.unblind(b.blind(a.start(message, rng), rng), rng));
        CHECK(got == message);
        CHECK(b.phase() == EnkPhase::complete);
    }
}

TEST_CASE("mismatched passwords scramble the payload undetectably") {
    auto rng = EntropySource::seeded(23, "mismatch");
    auto params = GroupParams::generate(64, GroupProfile::safe_prime, rng);
    auto pa = Password::random(88, rng);
    auto pb = Password::random(88, rng);
    int hits = 0;
    for (int i = 0; i < 300; ++i) {
        Bigint raw = rng.in_range(2, params.q() - 2);
        Bigint message = (raw * raw) % params.q();
        EnkSession a(EnkRole::initiator, params, pa);
        EnkSession b(EnkRole::responder, params, pb);
        // every pass parses and unwraps cleanly, nothing signals the mismatch
        Bigint got = b.finish(a.unblind(b.blind(a.start(message, rng), rng), rng));
        if (got == message)
            ++hits;
    }
    CHECK(hits == 0);
}

TEST_CASE("degenerate payloads are refused at the door") {
    auto rng = EntropySource::seeded(24, "degen");
    auto params = GroupParams::create(23, GroupProfile::safe_prime);
    auto pw = fixed_password();
    for (Bigint bad : {Bigint(0), Bigint(1), Bigint(22)}) {
        EnkSession s(EnkRole::initiator, params, pw);
        CHECK_THROWS_AS(s.start(bad, rng), DomainError);
        CHECK(s.phase() == EnkPhase::aborted);
    }
    // 5 is a non-residue mod 23: fine in the plain profile, refused in safe
    EnkSession safe_s(EnkRole::initiator, params, pw);
    CHECK_THROWS_AS(safe_s.start(5, rng), DomainError);
    EnkSession plain_s(EnkRole::initiator, GroupParams::create(23, GroupProfile::plain_prime), pw);
    CHECK_NOTHROW(plain_s.start(5, rng));
}

TEST_CASE("sessions abort on any out-of-order input") {
    auto rng = EntropySource::seeded(25, "order");
    auto params = GroupParams::create(23, GroupProfile::plain_prime);
    auto pw = fixed_password();

    SUBCASE("initiator cannot start twice") {
        EnkSession a(EnkRole::initiator, params, pw);
        a.start(5, rng);
        CHECK_THROWS_AS(a.start(6, rng), StateError);
        CHECK(a.phase() == EnkPhase::aborted);
    }
    SUBCASE("roles only run their own passes") {
        EnkSession a(EnkRole::initiator, params, pw);
        EnkSession b(EnkRole::responder, params, pw);
        auto m1 = craft(1, 10, pw, params, rng);
        CHECK_THROWS_AS(a.blind(m1, rng), StateError);
        CHECK_THROWS_AS(b.start(5, rng), StateError);
        EnkSession b2(EnkRole::responder, params, pw);
        auto m3 = craft(3, 17, pw, params, rng);
        CHECK_THROWS_AS(b2.finish(m3), StateError);
        CHECK(b2.phase() == EnkPhase::aborted);
    }
    SUBCASE("wrong sequence numbers abort") {
        EnkSession b(EnkRole::responder, params, pw);
        auto m2 = craft(2, 14, pw, params, rng);
        CHECK_THROWS_AS(b.blind(m2, rng), StateError);
        CHECK(b.phase() == EnkPhase::aborted);
        // an aborted session refuses everything afterwards
        auto m1 = craft(1, 10, pw, params, rng);
        CHECK_THROWS_AS(b.blind(m1, rng), StateError);
    }
    SUBCASE("initiator refuses pass two before pass one") {
        EnkSession a(EnkRole::initiator, params, pw);
        auto m2 = craft(2, 14, pw, params, rng);
        CHECK_THROWS_AS(a.unblind(m2, rng), StateError);
        CHECK(a.phase() == EnkPhase::aborted);
    }
}

TEST_CASE("an unwrapped one is counted and carried forward") {
    auto rng = EntropySource::seeded(26, "anomaly");
    auto params = GroupParams::create(23, GroupProfile::plain_prime);
    auto pw = fixed_password();

    EnkSession b(EnkRole::responder, params, pw);
    auto m1 = craft(1, 1, pw, params, rng);
    auto m2 = b.blind(m1, rng);
    CHECK(b.anomaly_count() == 1);
    CHECK(b.phase() == EnkPhase::sent_second);
    CHECK(ep_unwrap(pw, m2.ct, params) == 1); // 1^b stays 1

    EnkSession a(EnkRole::initiator, params, pw);
    a.start(5, rng);
    auto m2_one = craft(2, 1, pw, params, rng);
    auto m3 = a.unblind(m2_one, rng);
    CHECK(a.anomaly_count() == 1);
    CHECK(ep_unwrap(pw, m3.ct, params) == 1);

    // an unwrapped zero is poison, not an anomaly
    EnkSession b2(EnkRole::responder, params, pw);
    auto zero_msg = craft(1, 0, pw, params, rng);
    CHECK_THROWS_AS(b2.blind(zero_msg, rng), DomainError);
    CHECK(b2.phase() == EnkPhase::aborted);
}

TEST_CASE("exchange messages survive the wire") {
    auto rng = EntropySource::seeded(27, "wire");
    auto params = GroupParams::create(23, GroupProfile::plain_prime);
    auto pw = fixed_password();
    EnkSession a(EnkRole::initiator, params, pw);
    auto m1 = a.start(5, rng);
    Bytes wire = m1.wire();
    CHECK(wire.size() == EnkMessage::wire_size(params));
    auto parsed = EnkMessage::from_wire(wire, params);
    CHECK(parsed.seq == 1);
    CHECK(ep_unwrap(pw, parsed.ct, params) == ep_unwrap(pw, m1.ct, params));

    Bytes short_wire(wire.begin(), wire.end() - 1);
    CHECK_THROWS_AS(EnkMessage::from_wire(short_wire, params), FormatError);
    Bytes bad_seq = wire;
    bad_seq[0] = 4;
    CHECK_THROWS_AS(EnkMessage::from_wire(bad_seq, params), FormatError);
    bad_seq[0] = 0;
    CHECK_THROWS_AS(EnkMessage::from_wire(bad_seq, params), FormatError);
}

TEST_CASE("pinned exponents are validated before use") {
    auto params = GroupParams::create(23, GroupProfile::plain_prime);
    auto pw = fixed_password();
    CHECK_THROWS_AS(EnkSession::with_exponent(EnkRole::initiator, params, pw,
                                              BlindingExponent{11, 2}),
                    DomainError); // 11 shares a factor with 22
    CHECK_THROWS_AS(EnkSession::with_exponent(EnkRole::initiator, params, pw,
                                              BlindingExponent{3, 14}),
                    DomainError); // wrong inverse
    CHECK_THROWS_AS(EnkSession::with_exponent(EnkRole::initiator, params, pw,
                                              BlindingExponent{1, 1}),
                    DomainError); // below range
}

TEST_CASE("every transcript element stays inside the residue subgroup") {
    auto rng = EntropySource::seeded(28, "legendre");
    auto params = GroupParams::generate(16, GroupProfile::safe_prime, rng);
    auto pw = Password::random(16, rng);
    for (int i = 0; i < 200; ++i) {
        Bigint raw = rng.in_range(2, params.q() - 2);
        Bigint message = (raw * raw) % params.q();
        if (message <= 1)
            continue;
        EnkSession a(EnkRole::initiator, params, pw);
        EnkSession b(EnkRole::responder, params, pw);
        auto m1 = a.start(message, rng);
        auto m2 = b.blind(m1, rng);
        auto m3 = a.unblind(m2, rng);
        for (const auto* m : {&m1, &m2, &m3}) {
            Bigint inner = ep_unwrap(pw, m->ct, params);
            CHECK(is_quadratic_residue(inner, params));
        }
        CHECK(b.finish(m3) == message);
    }
}
