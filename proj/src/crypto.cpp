#include "enkvote/crypto.hpp"

#include <sodium.h>

#include <cstring>

namespace enkvote {

namespace {

void require_sodium() {
    if (sodium_init() < 0)
        throw EntropyError("libsodium initialization failed");
}

const Bigint& poly_modulus() {
    static const Bigint p = (Bigint(1) << 130) - 5;
    return p;
}

const Bigint& tag_modulus() {
    static const Bigint m = Bigint(1) << 128;
    return m;
}

std::array<std::uint8_t, 32> keyed_hash32(ByteView message, ByteView key) {
    std::array<std::uint8_t, 32> out{};
    crypto_generichash(out.data(), out.size(), message.data(), message.size(),
                       key.empty() ? nullptr : key.data(), key.size());
    return out;
}

// Pad material for the password wrap: a ChaCha20 keystream keyed by a hash of
// the password. The bit count is hashed in so equal octets at different
// lengths never share a keystream.
std::array<std::uint8_t, 32> password_stream_key(const Password& password) {
    if (password.empty())
        throw DomainError("empty password");
    Bytes material = bytes_of_string("enkvote.ep.v1");
    material.push_back(static_cast<std::uint8_t>(password.bits() >> 8));
    material.push_back(static_cast<std::uint8_t>(password.bits()));
    append(material, password.octets());
    return keyed_hash32(material, {});
}

void xor_keystream(std::uint8_t* data, std::size_t len,
                   const std::array<std::uint8_t, kPadNonceBytes>& nonce,
                   const std::array<std::uint8_t, 32>& key) {
    Bytes stream(len);
    crypto_stream_chacha20_ietf(stream.data(), stream.size(), nonce.data(), key.data());
    for (std::size_t i = 0; i < len; ++i)
        data[i] ^= stream[i];
}

std::array<std::uint8_t, kPadNonceBytes> draw_nonce(EntropySource& rng) {
    std::array<std::uint8_t, kPadNonceBytes> nonce{};
    rng.fill(nonce.data(), nonce.size());
    return nonce;
}

} // namespace

Password Password::random(unsigned bits, EntropySource& rng) {
    if (bits < 1 || bits > 4096)
        throw DomainError("password bits outside [1, 4096]");
    Password p;
    p.bits_ = bits;
    p.octets_ = rng.bytes((bits + 7) / 8);
    unsigned top = bits % 8;
    if (top != 0)
        p.octets_[0] &= static_cast<std::uint8_t>((1u << top) - 1);
    return p;
}

Password Password::from_bytes(Bytes octets, unsigned bits) {
    if (bits < 1 || bits > 4096)
        throw DomainError("password bits outside [1, 4096]");
    if (octets.size() != (bits + 7) / 8)
        throw FormatError("password octet count does not match its bit count");
    unsigned top = bits % 8;
    if (top != 0 && (octets[0] & ~((1u << top) - 1)) != 0)
        throw FormatError("password has bits set beyond its stated length");
    Password p;
    p.octets_ = std::move(octets);
    p.bits_ = bits;
    return p;
}

bool Password::operator==(const Password& other) const {
    return bits_ == other.bits_ && ct_equal(octets_, other.octets_);
}

std::string_view role_tag_name(RoleTag tag) {
    switch (tag) {
    case RoleTag::va: return "va";
    case RoleTag::ac: return "ac";
    case RoleTag::vc: return "vc";
    }
    throw DomainError("unknown role tag");
}

SymmetricKey SymmetricKey::random(RoleTag tag, EntropySource& rng) {
    SymmetricKey k;
    k.role_tag = tag;
    rng.fill(k.key.data(), k.key.size());
    return k;
}

SymmetricKey SymmetricKey::from_bytes(ByteView octets, RoleTag tag) {
    if (octets.size() != kSymKeyBytes)
        throw FormatError("symmetric key must be 32 octets");
    SymmetricKey k;
    k.role_tag = tag;
    std::memcpy(k.key.data(), octets.data(), kSymKeyBytes);
    return k;
}

Bytes MacTag::wire() const {
    Bytes out(nonce.begin(), nonce.end());
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
}

MacTag MacTag::from_wire(ByteView data) {
    if (data.size() != wire_size())
        throw FormatError("mac tag wire form must be 28 octets");
    MacTag t;
    std::memcpy(t.nonce.data(), data.data(), kMacNonceBytes);
    std::memcpy(t.tag.data(), data.data() + kMacNonceBytes, kMacTagBytes);
    return t;
}

Bytes GroupCiphertext::wire() const {
    Bytes out(pad_nonce.begin(), pad_nonce.end());
    append(out, body);
    return out;
}

GroupCiphertext GroupCiphertext::from_wire(ByteView data, std::size_t body_width) {
    if (data.size() != kPadNonceBytes + body_width)
        throw FormatError("wrapped element has the wrong width for this group");
    GroupCiphertext ct;
    std::memcpy(ct.pad_nonce.data(), data.data(), kPadNonceBytes);
    ct.body.assign(data.begin() + kPadNonceBytes, data.end());
    return ct;
}

Bytes WrappedBytes::wire() const {
    Bytes out(pad_nonce.begin(), pad_nonce.end());
    append(out, masked);
    return out;
}

WrappedBytes WrappedBytes::from_wire(ByteView data) {
    if (data.size() < kPadNonceBytes)
        throw FormatError("wrapped bytes shorter than a pad nonce");
    WrappedBytes wb;
    std::memcpy(wb.pad_nonce.data(), data.data(), kPadNonceBytes);
    wb.masked.assign(data.begin() + kPadNonceBytes, data.end());
    return wb;
}

GroupCiphertext ep_wrap(const Password& password, const Bigint& element,
                        const GroupParams& params, EntropySource& rng) {
    require_sodium();
    if (!params.is_element(element))
        throw DomainError("element outside [0, q)");
    const std::size_t width = params.ciphertext_body_width();
    // Lift to element + k*q, uniform over every representative that fits the
    // fixed width. The 64 slack bits make the lifted value statistically
    // independent of the residue.
    Bigint max_value = (Bigint(1) << (8 * width)) - 1;
    Bigint k_bound = (max_value - element) / params.q() + 1;
    Bigint lifted = element + rng.below(k_bound) * params.q();

    GroupCiphertext ct;
    ct.pad_nonce = draw_nonce(rng);
    ct.body = int_to_bytes_be(lifted, width);
    xor_keystream(ct.body.data(), ct.body.size(), ct.pad_nonce, password_stream_key(password));
    return ct;
}

Bigint ep_unwrap(const Password& password, const GroupCiphertext& ct, const GroupParams& params) {
    require_sodium();
    if (ct.body.size() != params.ciphertext_body_width())
        throw FormatError("wrapped element has the wrong width for this group");
    Bytes body = ct.body;
    xor_keystream(body.data(), body.size(), ct.pad_nonce, password_stream_key(password));
    return bytes_to_int_be(body) % params.q();
}

WrappedBytes ep_wrap_bytes(const Password& password, ByteView payload, EntropySource& rng) {
    require_sodium();
    WrappedBytes wb;
    wb.pad_nonce = draw_nonce(rng);
    wb.masked.assign(payload.begin(), payload.end());
    xor_keystream(wb.masked.data(), wb.masked.size(), wb.pad_nonce, password_stream_key(password));
    return wb;
}

Bytes ep_unwrap_bytes(const Password& password, const WrappedBytes& ct) {
    require_sodium();
    Bytes out = ct.masked;
    xor_keystream(out.data(), out.size(), ct.pad_nonce, password_stream_key(password));
    return out;
}

SymCipher::SymCipher(SymmetricKey key) : key_(key) {
    require_sodium();
}

Bytes SymCipher::encrypt(ByteView plaintext, EntropySource& rng) {
    if (plaintext.size() > (1u << 16))
        throw DomainError("plaintext above the 2^16 octet cap");
    std::array<std::uint8_t, kSymNonceBytes> nonce{};
    rng.fill(nonce.data(), nonce.size());
    if (!issued_.insert(nonce).second)
        throw NonceReuseError("cipher nonce repeated under one key");

    Bytes out(nonce.begin(), nonce.end());
    out.resize(kSymNonceBytes + plaintext.size() + kSymTagBytes);
    unsigned long long written = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(
        out.data() + kSymNonceBytes, &written,
        plaintext.data(), plaintext.size(),
        nullptr, 0, nullptr, nonce.data(), key_.key.data());
    out.resize(kSymNonceBytes + static_cast<std::size_t>(written));
    return out;
}

Bytes SymCipher::decrypt(ByteView wire) const {
    if (wire.size() < kSymNonceBytes + kSymTagBytes)
        throw FormatError("ciphertext shorter than nonce plus tag");
    Bytes plain(wire.size() - kSymNonceBytes - kSymTagBytes);
    unsigned long long written = 0;
    int rc = crypto_aead_chacha20poly1305_ietf_decrypt(
        plain.data(), &written, nullptr,
        wire.data() + kSymNonceBytes, wire.size() - kSymNonceBytes,
        nullptr, 0, wire.data(), key_.key.data());
    if (rc != 0)
        throw AuthFailError("authenticated decryption failed");
    plain.resize(static_cast<std::size_t>(written));
    return plain;
}

MacContext::MacContext(SymmetricKey key) : key_(key) {
    require_sodium();
    auto poly = digest16("enkvote.mac.poly.v1", key_.key);
    poly_key_ = bytes_to_int_be(poly);
    pad_key_ = keyed_hash32(bytes_of_string("enkvote.mac.pad.v1"), key_.key);
}

MacContext MacContext::with_pad_pool(SymmetricKey key, Bytes pool) {
    if (pool.size() % kMacTagBytes != 0)
        throw FormatError("pad pool must be a whole number of 16-octet pads");
    MacContext ctx(key);
    ctx.pool_mode_ = true;
    ctx.pool_ = std::move(pool);
    return ctx;
}

std::array<std::uint8_t, kMacTagBytes>
MacContext::compute(ByteView message, const std::array<std::uint8_t, kMacNonceBytes>&,
                    const std::array<std::uint8_t, kMacTagBytes>& pad) const {
    const Bigint& p = poly_modulus();
    Bigint h = 0;
    for (std::size_t off = 0; off < message.size(); off += kMacTagBytes) {
        std::size_t len = std::min(kMacTagBytes, message.size() - off);
        Bigint block = bytes_to_int_be(message.subspan(off, len));
        block += Bigint(1) << (8 * len);
        h = ((h + block) * poly_key_) % p;
    }
    Bigint t = (h + bytes_to_int_be(pad)) % tag_modulus();
    Bytes raw = int_to_bytes_be(t, kMacTagBytes);
    std::array<std::uint8_t, kMacTagBytes> out{};
    std::memcpy(out.data(), raw.data(), kMacTagBytes);
    return out;
}

std::optional<std::array<std::uint8_t, kMacTagBytes>>
MacContext::pad_for(const std::array<std::uint8_t, kMacNonceBytes>& nonce) const {
    std::array<std::uint8_t, kMacTagBytes> pad{};
    if (pool_mode_) {
        Bigint index = bytes_to_int_be(nonce);
        if (index * kMacTagBytes + kMacTagBytes > pool_.size())
            return std::nullopt;
        std::size_t off = static_cast<std::size_t>(index) * kMacTagBytes;
        std::memcpy(pad.data(), pool_.data() + off, kMacTagBytes);
        return pad;
    }
    crypto_stream_chacha20_ietf(pad.data(), pad.size(), nonce.data(), pad_key_.data());
    return pad;
}

MacTag MacContext::tag(ByteView message, const std::array<std::uint8_t, kMacNonceBytes>& nonce) {
    if (pool_mode_)
        throw StateError("a pad pool context schedules its own nonces");
    if (!issued_.insert(nonce).second)
        throw NonceReuseError("mac nonce repeated under one key");
    MacTag out;
    out.nonce = nonce;
    out.tag = compute(message, nonce, *pad_for(nonce));
    return out;
}

MacTag MacContext::tag(ByteView message, EntropySource& rng) {
    if (pool_mode_) {
        std::uint64_t index = next_pad_++;
        if (index * kMacTagBytes + kMacTagBytes > pool_.size())
            throw DomainError("pad pool exhausted");
        MacTag out;
        Bytes nonce_raw = int_to_bytes_be(index, kMacNonceBytes);
        std::memcpy(out.nonce.data(), nonce_raw.data(), kMacNonceBytes);
        issued_.insert(out.nonce);
        out.tag = compute(message, out.nonce, *pad_for(out.nonce));
        return out;
    }
    std::array<std::uint8_t, kMacNonceBytes> nonce{};
    rng.fill(nonce.data(), nonce.size());
    return tag(message, nonce);
}

bool MacContext::verify(ByteView message, const MacTag& tag) const {
    auto pad = pad_for(tag.nonce);
    if (!pad)
        return false;
    auto expected = compute(message, tag.nonce, *pad);
    return ct_equal(expected, tag.tag);
}

std::size_t MacContext::pool_remaining() const {
    if (!pool_mode_)
        return 0;
    std::size_t used = static_cast<std::size_t>(next_pad_) * kMacTagBytes;
    return used >= pool_.size() ? 0 : (pool_.size() - used) / kMacTagBytes;
}

Bigint encode_payload(ByteView payload, const GroupParams& params) {
    if (payload.size() > 255)
        throw PayloadTooLargeError("payload above the 255 octet frame limit");
    if (8 * payload.size() + 16 > params.bit_size())
        throw PayloadTooLargeError("payload does not fit the group capacity");
    Bytes framed;
    framed.reserve(payload.size() + 2);
    framed.push_back(0x01);
    append(framed, payload);
    framed.push_back(static_cast<std::uint8_t>(payload.size()));
    Bigint z = bytes_to_int_be(framed);
    if (params.profile() == GroupProfile::safe_prime)
        return (z * z) % params.q();
    return z;
}

namespace {

std::optional<Bytes> parse_frame(const Bigint& z) {
    if (z < 256)
        return std::nullopt;
    Bytes raw = int_to_bytes_be_min(z);
    if (raw.size() < 2 || raw[0] != 0x01)
        return std::nullopt;
    if (raw.back() != raw.size() - 2)
        return std::nullopt;
    return Bytes(raw.begin() + 1, raw.end() - 1);
}

} // namespace

Bytes decode_payload(const Bigint& element, const GroupParams& params) {
    if (!params.is_element(element))
        throw DomainError("element outside [0, q)");
    if (params.profile() == GroupProfile::plain_prime) {
        auto payload = parse_frame(element);
        if (!payload)
            throw DecodeError("element carries no payload frame");
        return *payload;
    }
    if (element == 0)
        throw DecodeError("element carries no payload frame");
    Bigint root = sqrt_in_subgroup(element, params);
    if ((root * root) % params.q() != element)
        throw DecodeError("element is not in the residue subgroup");
    if (auto payload = parse_frame(root))
        return *payload;
    if (auto payload = parse_frame(params.q() - root))
        return *payload;
    throw DecodeError("element carries no payload frame");
}

std::array<std::uint8_t, 32> digest32(std::string_view domain, ByteView data) {
    require_sodium();
    Bytes msg = bytes_of_string(domain);
    msg.push_back(0x00);
    append(msg, data);
    return keyed_hash32(msg, {});
}

std::array<std::uint8_t, 16> digest16(std::string_view domain, ByteView data) {
    require_sodium();
    Bytes msg = bytes_of_string(domain);
    msg.push_back(0x00);
    append(msg, data);
    std::array<std::uint8_t, 16> out{};
    crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), nullptr, 0);
    return out;
}

} // namespace enkvote
