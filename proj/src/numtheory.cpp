#include "enkvote/numtheory.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <map>
#include <mutex>
#include <vector>

namespace enkvote {

namespace {

// RFC 2409 Second Oakley Group, 768 bits.
const char* kModp768 =
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74"
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437"
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a63a3620ffffffffffffffff";

// RFC 2409 Oakley Group 2, 1024 bits.
const char* kModp1024 =
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74"
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437"
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed"
    "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece65381ffffffffffffffff";

// RFC 3526 MODP Group 14, 2048 bits.
const char* kModp2048 =
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74"
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437"
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed"
    "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05"
    "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb"
    "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b"
    "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718"
    "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff";

const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> primes = [] {
        constexpr std::uint32_t limit = 1u << 16;
        std::vector<bool> sieve(limit, true);
        std::vector<std::uint32_t> out;
        for (std::uint32_t p = 2; p < limit; ++p) {
            if (!sieve[p])
                continue;
            out.push_back(p);
            for (std::uint64_t m = static_cast<std::uint64_t>(p) * p; m < limit; m += p)
                sieve[static_cast<std::size_t>(m)] = false;
        }
        return out;
    }();
    return primes;
}

// Cheap filter before Miller-Rabin. Returns false when a small factor is found.
bool passes_trial_division(const Bigint& n) {
    for (std::uint32_t p : small_primes()) {
        if (n == p)
            return true;
        if (n % p == 0)
            return false;
    }
    return true;
}

} // namespace

bool is_probable_prime(const Bigint& n, int rounds, EntropySource& rng) {
    if (n < 2)
        return false;
    if (n == 2 || n == 3)
        return true;
    if ((n & 1) == 0)
        return false;
    if (!passes_trial_division(n))
        return false;
    if (n < static_cast<std::uint64_t>(1) << 32) {
        // Trial division above already proves primality below 2^32.
        return true;
    }
    RngAdapter gen{&rng};
    return boost::multiprecision::miller_rabin_test(n, static_cast<unsigned>(rounds), gen);
}

GroupParams GroupParams::create(const Bigint& q, GroupProfile profile, int mr_rounds) {
    if (mr_rounds < 1)
        throw DomainError("at least one Miller-Rabin round is required");
    if (q < 5)
        throw DomainError("modulus too small");
    EntropySource rng = EntropySource::os();
    if (!is_probable_prime(q, mr_rounds, rng))
        throw DomainError("modulus is not prime");
    GroupParams params;
    params.q_ = q;
    params.q_minus_1_ = q - 1;
    params.profile_ = profile;
    params.bit_size_ = bit_length(q);
    if (profile == GroupProfile::safe_prime) {
        Bigint r = (q - 1) / 2;
        if (!is_probable_prime(r, mr_rounds, rng))
            throw DomainError("(q-1)/2 is not prime, not a safe prime");
        params.subgroup_order_ = r;
    } else {
        params.subgroup_order_ = params.q_minus_1_;
    }
    return params;
}

GroupParams GroupParams::generate(unsigned bit_len, GroupProfile profile, EntropySource& rng) {
    if (bit_len < 8)
        throw DomainError("bit_length below the minimum of 8");
    const bool exact = bit_len >= 16;
    const long budget = 4096L * bit_len;
    for (long attempt = 0; attempt < budget; ++attempt) {
        Bigint candidate;
        if (profile == GroupProfile::safe_prime) {
            unsigned rbits = bit_len - 1;
            Bigint r = exact ? (Bigint(1) << (rbits - 1)) + rng.below(Bigint(1) << (rbits - 1))
                             : rng.in_range(2, (Bigint(1) << rbits) - 1);
            r |= 1;
            candidate = 2 * r + 1;
            if (exact && bit_length(candidate) != bit_len)
                continue;
            if (!passes_trial_division(r) || !passes_trial_division(candidate))
                continue;
            if (!is_probable_prime(r, 40, rng))
                continue;
            if (!is_probable_prime(candidate, 40, rng))
                continue;
        } else {
            candidate = exact ? (Bigint(1) << (bit_len - 1)) + rng.below(Bigint(1) << (bit_len - 1))
                              : rng.in_range(5, (Bigint(1) << bit_len) - 1);
            candidate |= 1;
            if (candidate < 5)
                continue;
            if (exact && bit_length(candidate) != bit_len)
                continue;
            if (!passes_trial_division(candidate))
                continue;
            if (!is_probable_prime(candidate, 40, rng))
                continue;
        }
        return create(candidate, profile);
    }
    throw TimeoutError("prime search exhausted its candidate budget");
}

const GroupParams& GroupParams::standard(unsigned bits) {
    static std::mutex mutex;
    static std::map<unsigned, GroupParams> cache;
    const char* hex = nullptr;
    switch (bits) {
    case 768: hex = kModp768; break;
    case 1024: hex = kModp1024; break;
    case 2048: hex = kModp2048; break;
    default:
        throw DomainError("no pinned group of that size (have 768, 1024, 2048)");
    }
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(bits);
    if (it == cache.end()) {
        Bigint q = bytes_to_int_be(from_hex(hex));
        it = cache.emplace(bits, create(q, GroupProfile::safe_prime)).first;
    }
    return it->second;
}

std::size_t GroupParams::ciphertext_body_width() const {
    return (bit_size_ + 64 + 7) / 8;
}

std::string GroupParams::to_text() const {
    char tag = profile_ == GroupProfile::safe_prime ? 's' : 'p';
    return tag + to_hex(int_to_bytes_be_min(q_));
}

GroupParams GroupParams::from_text(std::string_view text) {
    if (text.size() < 2)
        throw FormatError("group text too short");
    GroupProfile profile;
    switch (text[0]) {
    case 's': profile = GroupProfile::safe_prime; break;
    case 'p': profile = GroupProfile::plain_prime; break;
    default:
        throw FormatError("unknown group profile tag");
    }
    Bigint q = bytes_to_int_be(from_hex(text.substr(1)));
    return create(q, profile);
}

Bigint mod_exp(const Bigint& base, const Bigint& exponent, const GroupParams& params) {
    if (!params.is_element(base))
        throw DomainError("base outside [0, q)");
    if (exponent < 0)
        throw DomainError("negative exponent");
    return boost::multiprecision::powm(base, exponent, params.q());
}

Bigint mod_pow(const Bigint& base, const Bigint& exponent, const Bigint& modulus) {
    if (modulus < 2)
        throw DomainError("modulus below 2");
    if (exponent < 0)
        throw DomainError("negative exponent");
    return boost::multiprecision::powm(base, exponent, modulus);
}

Bigint mod_inverse(const Bigint& x, const Bigint& modulus) {
    if (modulus < 2)
        throw DomainError("modulus below 2");
    if (x < 0 || x >= modulus)
        throw DomainError("value outside [0, modulus)");
    Bigint old_r = x, r = modulus;
    Bigint old_s = 1, s = 0;
    while (r != 0) {
        Bigint quotient = old_r / r;
        Bigint tmp = old_r - quotient * r;
        old_r = r;
        r = tmp;
        tmp = old_s - quotient * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1)
        throw NotInvertibleError("value shares a factor with the modulus");
    if (old_s < 0)
        old_s += modulus;
    return old_s;
}

BlindingExponent sample_blinding_exponent(const GroupParams& params, EntropySource& rng) {
    if (params.q() < 5)
        throw DomainError("group too small for blinding exponents");
    constexpr int kMaxDraws = 1000000;
    const Bigint lo = 2;
    const Bigint hi = params.q() - 2;
    for (int i = 0; i < kMaxDraws; ++i) {
        Bigint e = rng.in_range(lo, hi);
        if (boost::multiprecision::gcd(e, params.q_minus_1()) != 1)
            continue;
        BlindingExponent out;
        out.e = e;
        out.e_inv = mod_inverse(e, params.q_minus_1());
        return out;
    }
    throw EntropyError("blinding exponent rejection cap exceeded");
}

bool is_quadratic_residue(const Bigint& x, const GroupParams& params) {
    if (x < 1 || x >= params.q())
        throw DomainError("Legendre symbol needs x in [1, q-1]");
    Bigint half = params.q_minus_1() / 2;
    return boost::multiprecision::powm(x, half, params.q()) == 1;
}

Bigint sqrt_in_subgroup(const Bigint& y, const GroupParams& params) {
    if (params.profile() != GroupProfile::safe_prime)
        throw DomainError("square roots need the safe prime profile");
    if (!params.is_element(y))
        throw DomainError("value outside [0, q)");
    Bigint exponent = (params.subgroup_order() + 1) / 2;
    return boost::multiprecision::powm(y, exponent, params.q());
}

} // namespace enkvote
