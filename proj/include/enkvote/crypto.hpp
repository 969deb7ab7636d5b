#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>

#include "enkvote/bytes.hpp"
#include "enkvote/numtheory.hpp"
#include "enkvote/rng.hpp"

namespace enkvote {

constexpr std::size_t kSymKeyBytes = 32;
constexpr std::size_t kSymNonceBytes = 12;
constexpr std::size_t kSymTagBytes = 16;
constexpr std::size_t kMacTagBytes = 16;
constexpr std::size_t kMacNonceBytes = 12;
constexpr std::size_t kPadNonceBytes = 12;
constexpr unsigned kDefaultPasswordBits = 88;

/// Pre-shared low-entropy secret. Lives in credential files and in memory;
/// wire messages and logs never carry one. The bit count is part of the
/// identity: the same octets at different lengths are different passwords.
class Password {
public:
    /// Empty and unusable until assigned; any wrap attempt throws.
    Password() = default;

    static Password random(unsigned bits, EntropySource& rng);
    static Password from_bytes(Bytes octets, unsigned bits); // FormatError on width mismatch

    unsigned bits() const { return bits_; }
    ByteView octets() const { return octets_; }
    bool empty() const { return bits_ == 0; }

    bool operator==(const Password& other) const;
    bool operator!=(const Password& other) const { return !(*this == other); }

private:
    Bytes octets_;
    unsigned bits_ = 0;
};

enum class RoleTag : std::uint8_t { va = 1, ac = 2, vc = 3 };

std::string_view role_tag_name(RoleTag tag);

/// 256-bit key for the authenticated cipher and the MAC, tagged with the
/// channel it belongs to so keys cannot silently cross channels.
struct SymmetricKey {
    std::array<std::uint8_t, kSymKeyBytes> key{};
    RoleTag role_tag = RoleTag::va;

    static SymmetricKey random(RoleTag tag, EntropySource& rng);
    static SymmetricKey from_bytes(ByteView octets, RoleTag tag); // FormatError
};

/// Output of the keyed hash: 128-bit tag plus the 96-bit nonce that selected
/// the pad. Wire form is nonce followed by tag, 28 octets.
struct MacTag {
    std::array<std::uint8_t, kMacTagBytes> tag{};
    std::array<std::uint8_t, kMacNonceBytes> nonce{};

    static constexpr std::size_t wire_size() { return kMacNonceBytes + kMacTagBytes; }
    Bytes wire() const;
    static MacTag from_wire(ByteView data); // FormatError
};

/// Password-wrapped group element: fixed-width masked body plus the pad
/// nonce. The width is ciphertext_body_width() of the group, never less.
struct GroupCiphertext {
    Bytes body;
    std::array<std::uint8_t, kPadNonceBytes> pad_nonce{};

    Bytes wire() const;
    static GroupCiphertext from_wire(ByteView data, std::size_t body_width); // FormatError
};

/// Password-wrapped opaque bytes (outer transport layer). Same pad
/// construction as GroupCiphertext without the re-randomization step,
/// for payloads that are already indistinguishable from uniform.
struct WrappedBytes {
    std::array<std::uint8_t, kPadNonceBytes> pad_nonce{};
    Bytes masked;

    Bytes wire() const;
    static WrappedBytes from_wire(ByteView data); // FormatError
};

/// Wrap a group element under a password. The element is re-randomized to
/// element + k*q for uniform k before masking, so unwrapping under any
/// candidate password yields a well-formed element: the ciphertext carries
/// no password check. DomainError if element is outside [0, q).
GroupCiphertext ep_wrap(const Password& password, const Bigint& element,
                        const GroupParams& params, EntropySource& rng);

/// Always succeeds on well-formed widths and returns a value in [0, q).
/// FormatError only when the body width does not match the group. A wrong
/// password yields an undetectably wrong element, by design.
Bigint ep_unwrap(const Password& password, const GroupCiphertext& ct, const GroupParams& params);

WrappedBytes ep_wrap_bytes(const Password& password, ByteView payload, EntropySource& rng);
Bytes ep_unwrap_bytes(const Password& password, const WrappedBytes& ct);

/// Authenticated symmetric channel (the starred cipher in the protocol).
/// Wire form: 96-bit nonce, ciphertext, 128-bit tag. Each instance keeps a
/// ledger of the nonces it has issued under its key.
class SymCipher {
public:
    explicit SymCipher(SymmetricKey key);

    /// Plaintext capped at 2^16 octets (DomainError). NonceReuseError if the
    /// drawn nonce was already issued by this instance.
    Bytes encrypt(ByteView plaintext, EntropySource& rng);

    /// AuthFailError on tag mismatch, FormatError on impossible lengths.
    Bytes decrypt(ByteView wire) const;

    RoleTag role_tag() const { return key_.role_tag; }

private:
    SymmetricKey key_;
    std::set<std::array<std::uint8_t, kSymNonceBytes>> issued_;
};

/// Carter-Wegman keyed hash: polynomial evaluation over GF(2^130 - 5) in a
/// subkey derived from the channel key, masked with a per-nonce pad. The pad
/// comes from a PRF by default; one_time_pool mode consumes a caller-supplied
/// pad schedule instead, one 16-octet pad per tag, giving the
/// information-theoretic variant of the construction.
class MacContext {
public:
    explicit MacContext(SymmetricKey key);
    static MacContext with_pad_pool(SymmetricKey key, Bytes pool); // FormatError if not 16-aligned

    /// PRF mode only (StateError in pool mode). NonceReuseError if this
    /// context already issued a tag under the nonce.
    MacTag tag(ByteView message, const std::array<std::uint8_t, kMacNonceBytes>& nonce);

    /// PRF mode draws a random nonce; pool mode takes the next scheduled pad
    /// (DomainError once the pool is exhausted).
    MacTag tag(ByteView message, EntropySource& rng);

    /// Stateless, constant-time comparison. Never throws on garbage input.
    bool verify(ByteView message, const MacTag& tag) const;

    std::size_t pool_remaining() const;

private:
    MacContext() = default;

    std::array<std::uint8_t, kMacTagBytes> compute(ByteView message,
                                                   const std::array<std::uint8_t, kMacNonceBytes>& nonce,
                                                   const std::array<std::uint8_t, kMacTagBytes>& pad) const;
    std::optional<std::array<std::uint8_t, kMacTagBytes>> pad_for(const std::array<std::uint8_t, kMacNonceBytes>& nonce) const;

    SymmetricKey key_;
    Bigint poly_key_;
    std::array<std::uint8_t, kSymKeyBytes> pad_key_{};
    bool pool_mode_ = false;
    Bytes pool_;
    std::uint64_t next_pad_ = 0;
    std::set<std::array<std::uint8_t, kMacNonceBytes>> issued_;
};

/// Frame an octet string and lift it into the group. Safe-prime groups square
/// the framed value into the quadratic residue subgroup, so ciphertext
/// elements never leak a Legendre bit. Capacity: 8*len <= bits(q) - 16, and
/// len <= 255 (PayloadTooLargeError beyond either).
Bigint encode_payload(ByteView payload, const GroupParams& params);

/// Invert encode_payload. DecodeError when the element carries no valid
/// frame, which is the expected outcome for tampered or misdecrypted values.
Bytes decode_payload(const Bigint& element, const GroupParams& params);

/// Keyed BLAKE2b conveniences with domain separation.
std::array<std::uint8_t, 32> digest32(std::string_view domain, ByteView data);
std::array<std::uint8_t, 16> digest16(std::string_view domain, ByteView data);

} // namespace enkvote
