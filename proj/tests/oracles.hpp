// Independent reference implementations used to pin expected values.
// Deliberately naive: correctness by obviousness, not by speed, and no
// shared code paths with the library under test beyond the integer type.
#pragma once

#include <cstdint>
#include <vector>

#include "enkvote/bytes.hpp"

namespace oracles {

using enkvote::Bigint;

// Repeated multiplication. Only sane for small exponents.
inline Bigint naive_pow_mod(const Bigint& base, std::uint64_t exponent, const Bigint& modulus) {
    Bigint acc = 1 % modulus;
    for (std::uint64_t i = 0; i < exponent; ++i)
        acc = (acc * base) % modulus;
    return acc;
}

// Square and multiply, written out by hand.
inline Bigint oracle_pow_mod(Bigint base, Bigint exponent, const Bigint& modulus) {
    Bigint acc = 1 % modulus;
    base %= modulus;
    while (exponent > 0) {
        if ((exponent & 1) != 0)
            acc = (acc * base) % modulus;
        base = (base * base) % modulus;
        exponent >>= 1;
    }
    return acc;
}

// Exhaustive inverse search for small moduli. Returns -1 when none exists.
inline Bigint oracle_inverse_small(std::uint64_t x, std::uint64_t modulus) {
    for (std::uint64_t y = 0; y < modulus; ++y)
        if ((x * y) % modulus == 1)
            return Bigint(y);
    return Bigint(-1);
}

// Trial division.
inline bool oracle_is_prime_small(std::uint64_t n) {
    if (n < 2)
        return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

// Deterministic Miller-Rabin with the fixed base set that is proven
// sufficient for every n < 3.3 * 10^24, so in particular for 64-bit inputs.
inline bool oracle_is_prime_mr(const Bigint& n) {
    if (n < 2)
        return false;
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n == p)
            return true;
        if (n % p == 0)
            return false;
    }
    Bigint d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        Bigint x = oracle_pow_mod(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool witness = true;
        for (unsigned i = 1; i < s; ++i) {
            x = (x * x) % n;
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness)
            return false;
    }
    return true;
}

// Pearson statistic against a uniform expectation.
inline double chi_square_uniform(const std::vector<std::uint64_t>& observed, double total) {
    double expected = total / static_cast<double>(observed.size());
    double stat = 0.0;
    for (std::uint64_t count : observed) {
        double diff = static_cast<double>(count) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

} // namespace oracles
