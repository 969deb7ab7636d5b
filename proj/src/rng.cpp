#include "enkvote/rng.hpp"

#include <sodium.h>

#include <cstring>

namespace enkvote {

namespace {

void require_sodium() {
    if (sodium_init() < 0)
        throw EntropyError("libsodium initialization failed");
}

std::array<std::uint8_t, 32> hash32(ByteView message, const std::uint8_t* key, std::size_t keylen) {
    std::array<std::uint8_t, 32> out{};
    crypto_generichash(out.data(), out.size(), message.data(), message.size(), key, keylen);
    return out;
}

} // namespace

EntropySource EntropySource::seeded(std::uint64_t seed, std::string_view domain) {
    require_sodium();
    Bytes material = bytes_of_string("enkvote.seed.v1");
    for (int i = 7; i >= 0; --i)
        material.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    append(material, bytes_of_string(domain));
    EntropySource src;
    src.key_ = hash32(material, nullptr, 0);
    return src;
}

EntropySource EntropySource::seeded_key(const std::array<std::uint8_t, 32>& key) {
    require_sodium();
    EntropySource src;
    src.key_ = key;
    return src;
}

EntropySource EntropySource::os() {
    require_sodium();
    EntropySource src;
    src.os_backed_ = true;
    return src;
}

EntropySource EntropySource::fork(std::string_view label) const {
    require_sodium();
    if (os_backed_)
        return os();
    Bytes msg = bytes_of_string("fork:");
    append(msg, bytes_of_string(label));
    EntropySource child;
    child.key_ = hash32(msg, key_.data(), key_.size());
    return child;
}

void EntropySource::refill() {
    std::uint8_t nonce[8];
    for (int i = 0; i < 8; ++i)
        nonce[i] = static_cast<std::uint8_t>(block_counter_ >> (8 * (7 - i)));
    ++block_counter_;
    crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce, key_.data());
    buffer_pos_ = 0;
}

void EntropySource::fill(std::uint8_t* out, std::size_t n) {
    if (os_backed_) {
        randombytes_buf(out, n);
        return;
    }
    std::size_t done = 0;
    while (done < n) {
        if (buffer_pos_ == buffer_.size())
            refill();
        std::size_t take = std::min(n - done, buffer_.size() - buffer_pos_);
        std::memcpy(out + done, buffer_.data() + buffer_pos_, take);
        buffer_pos_ += take;
        done += take;
    }
}

Bytes EntropySource::bytes(std::size_t n) {
    Bytes out(n);
    fill(out.data(), n);
    return out;
}

std::uint64_t EntropySource::u64() {
    std::uint8_t raw[8];
    fill(raw, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | raw[i];
    return v;
}

Bigint EntropySource::below(const Bigint& bound) {
    if (bound < 1)
        throw DomainError("below() needs a positive bound");
    if (bound == 1)
        return 0;
    unsigned bits = bit_length(bound - 1);
    std::size_t nbytes = (bits + 7) / 8;
    unsigned topmask_bits = bits % 8;
    std::uint8_t mask = topmask_bits == 0 ? 0xff : static_cast<std::uint8_t>((1u << topmask_bits) - 1);
    constexpr int kMaxDraws = 1000000;
    Bytes raw(nbytes);
    for (int i = 0; i < kMaxDraws; ++i) {
        fill(raw.data(), raw.size());
        raw[0] &= mask;
        Bigint v = bytes_to_int_be(raw);
        if (v < bound)
            return v;
    }
    throw EntropyError("rejection sampling exceeded its draw cap");
}

Bigint EntropySource::in_range(const Bigint& lo, const Bigint& hi) {
    if (lo > hi)
        throw DomainError("empty range");
    return lo + below(hi - lo + 1);
}

} // namespace enkvote
