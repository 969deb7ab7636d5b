#pragma once

#include <cstdint>
#include <string>

#include "enkvote/bytes.hpp"
#include "enkvote/rng.hpp"

namespace enkvote {

enum class GroupProfile : std::uint8_t {
    safe_prime = 1,  // q = 2r + 1 with r prime; payload work happens in the QR subgroup
    plain_prime = 2, // any odd prime; no subgroup structure is relied on
};

/// Modulus for the exponentiation cipher, plus the derived values every
/// operation needs: q - 1 (the exponent modulus) and the working subgroup
/// order (r for safe primes, q - 1 otherwise).
class GroupParams {
public:
    /// Empty and unusable until assigned from create/generate/standard.
    GroupParams() = default;

    /// Validate and adopt a modulus. Primality is checked with at least
    /// `mr_rounds` Miller-Rabin rounds (40 keeps the error under 2^-80); for
    /// the safe_prime profile (q-1)/2 is checked too. DomainError on failure.
    static GroupParams create(const Bigint& q, GroupProfile profile, int mr_rounds = 40);

    /// Search for a fresh modulus of the given size. For bit_length >= 16 the
    /// result has exactly that many bits; below that, bit_length acts as a
    /// capacity (result fits in bit_length bits). Minimum 8, production use
    /// should stay at 64 or above. DomainError below the minimum,
    /// TimeoutError if the bounded search exhausts its candidate budget.
    static GroupParams generate(unsigned bit_length, GroupProfile profile, EntropySource& rng);

    /// Pinned, pre-validated safe primes from the standard MODP series:
    /// 768 (Oakley Group 1), 1024 (Oakley Group 2), 2048 (MODP Group 14).
    /// DomainError for any other size.
    static const GroupParams& standard(unsigned bits);

    const Bigint& q() const { return q_; }
    const Bigint& q_minus_1() const { return q_minus_1_; }
    const Bigint& subgroup_order() const { return subgroup_order_; }
    GroupProfile profile() const { return profile_; }
    unsigned bit_size() const { return bit_size_; }

    /// Octet width of a password-wrapped element: ceil((bits(q) + 64) / 8).
    std::size_t ciphertext_body_width() const;

    bool is_element(const Bigint& x) const { return x >= 0 && x < q_; }

    /// Text form "s<hex>" or "p<hex>" (profile tag + lowercase hex of q).
    std::string to_text() const;

    /// Parse and re-validate. FormatError on syntax, DomainError if the
    /// modulus fails its profile checks.
    static GroupParams from_text(std::string_view text);

    bool operator==(const GroupParams& other) const {
        return q_ == other.q_ && profile_ == other.profile_;
    }

private:
    Bigint q_;
    Bigint q_minus_1_;
    Bigint subgroup_order_;
    GroupProfile profile_ = GroupProfile::plain_prime;
    unsigned bit_size_ = 0;
};

/// A cipher exponent together with its inverse mod q - 1.
struct BlindingExponent {
    Bigint e;
    Bigint e_inv;
};

/// base^exponent mod q for 0 <= base < q, exponent >= 0. DomainError otherwise.
Bigint mod_exp(const Bigint& base, const Bigint& exponent, const GroupParams& params);

/// Raw three-argument modexp used where no GroupParams applies (modulus >= 2).
Bigint mod_pow(const Bigint& base, const Bigint& exponent, const Bigint& modulus);

/// Inverse of x mod modulus via extended Euclid. NotInvertibleError when
/// gcd(x, modulus) != 1, DomainError for modulus < 2 or x outside [0, modulus).
Bigint mod_inverse(const Bigint& x, const Bigint& modulus);

/// Draw e uniformly from [2, q-2] until gcd(e, q-1) == 1, then attach the
/// inverse. The draw cap (10^6) turns a pathological group into EntropyError
/// instead of a hang.
BlindingExponent sample_blinding_exponent(const GroupParams& params, EntropySource& rng);

/// Miller-Rabin with `rounds` random bases.
bool is_probable_prime(const Bigint& n, int rounds, EntropySource& rng);

/// Euler criterion. Only meaningful for prime q; x must be in [1, q-1].
bool is_quadratic_residue(const Bigint& x, const GroupParams& params);

/// Principal square root y^((r+1)/2) mod q in the QR subgroup of a safe
/// prime group. DomainError for the plain profile.
Bigint sqrt_in_subgroup(const Bigint& y, const GroupParams& params);

} // namespace enkvote
