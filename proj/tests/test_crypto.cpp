#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "enkvote/crypto.hpp"
#include "oracles.hpp"

using namespace enkvote;

namespace {

GroupParams group23() {
    return GroupParams::create(23, GroupProfile::safe_prime);
}

SymmetricKey test_key(RoleTag tag, std::uint64_t seed) {
    auto rng = EntropySource::seeded(seed, "key");
    return SymmetricKey::random(tag, rng);
}

} // namespace

TEST_CASE("passwords carry an exact bit length") {
    auto rng = EntropySource::seeded(1, "pw");
    auto p = Password::random(kDefaultPasswordBits, rng);
    CHECK(p.bits() == 88);
    CHECK(p.octets().size() == 11);

    auto q = Password::random(5, rng);
    CHECK(q.octets().size() == 1);
    CHECK((q.octets()[0] & 0xe0) == 0);

    CHECK_THROWS_AS(Password::from_bytes({0x01, 0x02}, 8), FormatError);
    CHECK_THROWS_AS(Password::from_bytes({0xff}, 5), FormatError);
    CHECK_THROWS_AS(Password::random(0, rng), DomainError);

    auto a = Password::from_bytes({0x0a}, 8);
    auto b = Password::from_bytes({0x0a}, 8);
    auto c = Password::from_bytes({0x0b}, 8);
    CHECK(a == b);
    CHECK(a != c);
    // same octets, different stated length: different passwords
    CHECK(Password::from_bytes({0x0a}, 8) != Password::from_bytes({0x0a}, 5));
}

TEST_CASE("password wrap round trips over the whole element range") {
    auto g23 = group23();
    auto rng = EntropySource::seeded(2, "ep");
    auto pw = Password::random(16, rng);
    for (int i = 0; i < 1000; ++i) {
        Bigint element = rng.below(23);
        auto ct = ep_wrap(pw, element, g23, rng);
        CHECK(ct.body.size() == g23.ciphertext_body_width());
        CHECK(ep_unwrap(pw, ct, g23) == element);
    }

    auto rng64 = EntropySource::seeded(3, "ep64");
    auto params = GroupParams::generate(64, GroupProfile::plain_prime, rng64);
    for (int i = 0; i < 200; ++i) {
        Bigint element = rng64.below(params.q());
        auto ct = ep_wrap(pw, element, params, rng64);
        CHECK(ep_unwrap(pw, ct, params) == element);
    }

    CHECK_THROWS_AS(ep_wrap(pw, 23, g23, rng), DomainError);
    CHECK_THROWS_AS(ep_wrap(pw, -1, g23, rng), DomainError);
}

TEST_CASE("unwrapping under any candidate password yields a plausible element") {
    auto g23 = group23();
    auto rng = EntropySource::seeded(4, "sweep");
    auto truth = Password::from_bytes({0x5b}, 8);

    auto ct = ep_wrap(truth, 17, g23, rng);
    for (unsigned c = 0; c < 256; ++c) {
        auto candidate = Password::from_bytes({static_cast<std::uint8_t>(c)}, 8);
        Bigint v = ep_unwrap(candidate, ct, g23);
        CHECK(v >= 0);
        CHECK(v < 23);
    }

    // a fixed wrong password sees a near-uniform residue across fresh wraps
    auto wrong = Password::from_bytes({0xa7}, 8);
    std::vector<std::uint64_t> bins(23, 0);
    const int samples = 4600;
    for (int i = 0; i < samples; ++i) {
        auto fresh = ep_wrap(truth, 17, g23, rng);
        ++bins[static_cast<std::size_t>(ep_unwrap(wrong, fresh, g23))];
    }
    double stat = oracles::chi_square_uniform(bins, samples);
    CHECK(stat < 60.0); // df 22, far beyond the 0.001 cut of 48.3
}

TEST_CASE("wrap is randomized and width-checked") {
    auto g23 = group23();
    auto rng = EntropySource::seeded(5, "dist");
    auto pw = Password::random(88, rng);
    std::set<Bytes> bodies;
    for (int i = 0; i < 1000; ++i)
        bodies.insert(ep_wrap(pw, 9, g23, rng).wire());
    CHECK(bodies.size() == 1000);

    auto ct = ep_wrap(pw, 9, g23, rng);
    GroupCiphertext trunc = ct;
    trunc.body.pop_back();
    CHECK_THROWS_AS(ep_unwrap(pw, trunc, g23), FormatError);
    CHECK_THROWS_AS(GroupCiphertext::from_wire(ct.wire(), g23.ciphertext_body_width() + 1), FormatError);
    auto reparsed = GroupCiphertext::from_wire(ct.wire(), g23.ciphertext_body_width());
    CHECK(ep_unwrap(pw, reparsed, g23) == 9);
}

TEST_CASE("byte-level wrap round trips and never self-verifies") {
    auto rng = EntropySource::seeded(6, "wb");
    auto pw = Password::random(88, rng);
    Bytes payload = rng.bytes(137);
    auto ct = ep_wrap_bytes(pw, payload, rng);
    CHECK(ep_unwrap_bytes(pw, ct) == payload);

    auto other = Password::random(88, rng);
    Bytes garbled = ep_unwrap_bytes(other, ct);
    CHECK(garbled.size() == payload.size());
    CHECK(garbled != payload);

    auto round = WrappedBytes::from_wire(ct.wire());
    CHECK(ep_unwrap_bytes(pw, round) == payload);
    CHECK_THROWS_AS(WrappedBytes::from_wire(Bytes{1, 2, 3}), FormatError);
}

TEST_CASE("authenticated cipher round trips and rejects every tamper") {
    auto rng = EntropySource::seeded(7, "sym");
    SymCipher cipher(test_key(RoleTag::va, 70));
    Bytes id = bytes_of_string("ID_0007_aabbccdd");
    Bytes wire = cipher.encrypt(id, rng);
    CHECK(wire.size() == id.size() + kSymNonceBytes + kSymTagBytes);
    CHECK(cipher.decrypt(wire) == id);

    for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
        Bytes flip = wire;
        flip[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK_THROWS_AS(cipher.decrypt(flip), AuthFailError);
    }

    for (int i = 0; i < 1000; ++i) {
        SymCipher other(test_key(RoleTag::va, 1000 + i));
        CHECK_THROWS_AS(other.decrypt(wire), AuthFailError);
    }

    CHECK_THROWS_AS(cipher.decrypt(Bytes(wire.begin(), wire.begin() + 20)), FormatError);
    CHECK_THROWS_AS(cipher.encrypt(Bytes((1u << 16) + 1), rng), DomainError);
}

TEST_CASE("cipher nonce ledger refuses a repeat") {
    SymCipher cipher(test_key(RoleTag::ac, 71));
    auto r1 = EntropySource::seeded(8, "noncefix");
    auto r2 = EntropySource::seeded(8, "noncefix");
    Bytes msg = bytes_of_string("x");
    cipher.encrypt(msg, r1);
    CHECK_THROWS_AS(cipher.encrypt(msg, r2), NonceReuseError);
}

TEST_CASE("keyed hash tags verify and every perturbation is rejected") {
    auto rng = EntropySource::seeded(9, "mac");
    MacContext mac(test_key(RoleTag::vc, 72));
    Bytes message = rng.bytes(52);
    MacTag t = mac.tag(message, rng);
    CHECK(mac.verify(message, t));
    CHECK(t.wire().size() == 28);
    MacTag parsed = MacTag::from_wire(t.wire());
    CHECK(mac.verify(message, parsed));
    CHECK_THROWS_AS(MacTag::from_wire(rng.bytes(27)), FormatError);

    for (int i = 0; i < 10000; ++i) {
        Bytes perturbed = message;
        std::size_t pos = static_cast<std::size_t>(rng.below(perturbed.size()).convert_to<std::uint64_t>());
        std::uint8_t delta = 0;
        while (delta == 0)
            delta = static_cast<std::uint8_t>(rng.u64());
        perturbed[pos] ^= delta;
        CHECK_FALSE(mac.verify(perturbed, t));
    }

    // truncation, extension, tag bit flips, nonce bit flips
    CHECK_FALSE(mac.verify(Bytes(message.begin(), message.end() - 1), t));
    Bytes longer = message;
    longer.push_back(0x00);
    CHECK_FALSE(mac.verify(longer, t));
    MacTag bent = t;
    bent.tag[0] ^= 1;
    CHECK_FALSE(mac.verify(message, bent));
    bent = t;
    bent.nonce[11] ^= 1;
    CHECK_FALSE(mac.verify(message, bent));

    MacContext other(test_key(RoleTag::vc, 73));
    CHECK_FALSE(other.verify(message, t));
}

TEST_CASE("mac nonce ledger refuses a repeat") {
    MacContext mac(test_key(RoleTag::va, 74));
    std::array<std::uint8_t, kMacNonceBytes> nonce{};
    nonce[0] = 0x42;
    Bytes m1 = bytes_of_string("first");
    Bytes m2 = bytes_of_string("second");
    mac.tag(m1, nonce);
    CHECK_THROWS_AS(mac.tag(m2, nonce), NonceReuseError);
}

TEST_CASE("one-time pad pool mode consumes its schedule exactly once") {
    auto rng = EntropySource::seeded(10, "pool");
    auto key = test_key(RoleTag::vc, 75);
    Bytes pool = rng.bytes(16 * 5);
    auto mac = MacContext::with_pad_pool(key, pool);
    CHECK(mac.pool_remaining() == 5);

    Bytes message = bytes_of_string("scheduled tag input");
    std::vector<MacTag> tags;
    for (int i = 0; i < 5; ++i)
        tags.push_back(mac.tag(message, rng));
    CHECK(mac.pool_remaining() == 0);
    CHECK_THROWS_AS(mac.tag(message, rng), DomainError);

    for (const auto& t : tags)
        CHECK(mac.verify(message, t));
    // pads differ, so equal messages get unrelated tags
    CHECK(tags[0].tag != tags[1].tag);

    std::array<std::uint8_t, kMacNonceBytes> explicit_nonce{};
    CHECK_THROWS_AS(mac.tag(message, explicit_nonce), StateError);

    // nonce pointing past the pool verifies nothing
    MacTag beyond = tags[0];
    beyond.nonce[kMacNonceBytes - 1] = 0xff;
    CHECK_FALSE(mac.verify(message, beyond));

    CHECK_THROWS_AS(MacContext::with_pad_pool(key, rng.bytes(17)), FormatError);

    // the same schedule re-created verifies tags made by the first instance
    auto mac2 = MacContext::with_pad_pool(key, pool);
    CHECK(mac2.verify(message, tags[3]));
}

TEST_CASE("payload encoding is invertible and stays in the residue subgroup") {
    auto params = GroupParams::standard(768);
    auto rng = EntropySource::seeded(11, "enc");
    for (int i = 0; i < 1000; ++i) {
        Bytes payload = rng.bytes(80);
        Bigint element = encode_payload(payload, params);
        CHECK(is_quadratic_residue(element, params));
        CHECK(decode_payload(element, params) == payload);
    }

    auto rng64 = EntropySource::seeded(12, "enc64");
    auto small = GroupParams::generate(64, GroupProfile::safe_prime, rng64);
    for (int i = 0; i < 500; ++i) {
        Bytes payload = rng64.bytes(4);
        Bigint element = encode_payload(payload, small);
        CHECK(is_quadratic_residue(element, small));
        CHECK(decode_payload(element, small) == payload);
    }

    auto plain = GroupParams::generate(64, GroupProfile::plain_prime, rng64);
    for (int i = 0; i < 500; ++i) {
        Bytes payload = rng64.bytes(4);
        CHECK(decode_payload(encode_payload(payload, plain), plain) == payload);
    }
}

TEST_CASE("payload capacity limits are enforced") {
    auto params = GroupParams::standard(768);
    CHECK_NOTHROW(encode_payload(Bytes((768 - 16) / 8), params));
    CHECK_THROWS_AS(encode_payload(Bytes((768 - 16) / 8 + 1), params), PayloadTooLargeError);

    auto g23 = group23();
    // 5-bit modulus leaves no room for any frame
    CHECK_THROWS_AS(encode_payload(Bytes{0xab}, g23), PayloadTooLargeError);
    CHECK_THROWS_AS(encode_payload(Bytes{}, g23), PayloadTooLargeError);
}

TEST_CASE("decode rejects elements that carry no frame") {
    auto rng = EntropySource::seeded(13, "garbage");
    auto small = GroupParams::generate(64, GroupProfile::safe_prime, rng);
    int accidental = 0;
    for (int i = 0; i < 2000; ++i) {
        Bigint junk = rng.below(small.q());
        try {
            decode_payload(junk, small);
            ++accidental;
        } catch (const DecodeError&) {
        }
    }
    CHECK(accidental <= 1);
    CHECK_THROWS_AS(decode_payload(0, small), DecodeError);
    CHECK_THROWS_AS(decode_payload(small.q(), small), DomainError);
}

TEST_CASE("digest helpers separate domains") {
    Bytes data = bytes_of_string("payload");
    CHECK(digest32("a", data) == digest32("a", data));
    CHECK(digest32("a", data) != digest32("b", data));
    CHECK(digest16("a", data) != digest16("b", data));
}
