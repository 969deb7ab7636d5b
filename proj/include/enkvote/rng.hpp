#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "enkvote/bytes.hpp"

namespace enkvote {

/// Deterministic ChaCha20-based byte stream, or the operating system RNG.
///
/// Seeded sources are pure functions of (seed, domain, fork labels, draw order),
/// which is what makes simulated and socket election runs reproduce each other
/// byte for byte. Copying a source copies its position; the copy and the
/// original then evolve independently.
class EntropySource {
public:
    /// Deterministic stream from a 64-bit seed plus a domain label.
    static EntropySource seeded(std::uint64_t seed, std::string_view domain = {});

    /// Deterministic stream keyed directly by 32 octets.
    static EntropySource seeded_key(const std::array<std::uint8_t, 32>& key);

    /// Operating system randomness. Not reproducible.
    static EntropySource os();

    /// Derive an independent child stream. Distinct labels give independent
    /// streams; the parent's position is not disturbed. EntropyError on an
    /// OS-backed source only if the system RNG is unavailable.
    EntropySource fork(std::string_view label) const;

    void fill(std::uint8_t* out, std::size_t n);
    Bytes bytes(std::size_t n);
    std::uint64_t u64();

    /// Uniform in [0, bound). DomainError if bound < 1.
    Bigint below(const Bigint& bound);

    /// Uniform in [lo, hi], both ends included. DomainError if lo > hi.
    Bigint in_range(const Bigint& lo, const Bigint& hi);

    bool deterministic() const { return !os_backed_; }

private:
    EntropySource() = default;

    std::array<std::uint8_t, 32> key_{};
    std::uint64_t block_counter_ = 0;
    std::array<std::uint8_t, 64> buffer_{};
    std::size_t buffer_pos_ = sizeof(buffer_);
    bool os_backed_ = false;

    void refill();
};

/// UniformRandomBitGenerator adapter so an EntropySource can feed standard
/// and Boost algorithms that expect one.
struct RngAdapter {
    using result_type = std::uint64_t;
    EntropySource* src;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<result_type>(0); }
    result_type operator()() { return src->u64(); }
};

} // namespace enkvote
