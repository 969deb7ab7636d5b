#include "enkvote/bytes.hpp"

#include <sodium.h>

namespace enkvote {

namespace {

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(ByteView data) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0)
        throw FormatError("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw FormatError("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

Bytes int_to_bytes_be(const Bigint& value, std::size_t width) {
    if (value < 0)
        throw DomainError("cannot serialize a negative integer");
    Bytes out(width, 0);
    Bigint v = value;
    std::size_t i = width;
    while (v != 0) {
        if (i == 0)
            throw DomainError("integer does not fit the requested width");
        out[--i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

Bigint bytes_to_int_be(ByteView data) {
    Bigint v = 0;
    for (std::uint8_t b : data) {
        v <<= 8;
        v |= b;
    }
    return v;
}

Bytes int_to_bytes_be_min(const Bigint& value) {
    if (value == 0)
        return Bytes{0x00};
    std::size_t width = (bit_length(value) + 7) / 8;
    return int_to_bytes_be(value, width);
}

unsigned bit_length(const Bigint& value) {
    if (value == 0)
        return 0;
    return static_cast<unsigned>(boost::multiprecision::msb(value)) + 1u;
}

Bytes concat(std::initializer_list<ByteView> parts) {
    std::size_t total = 0;
    for (const auto& p : parts)
        total += p.size();
    Bytes out;
    out.reserve(total);
    for (const auto& p : parts)
        append(out, p);
    return out;
}

void append_u32_be(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t read_u32_be(ByteView data, std::size_t offset) {
    if (offset + 4 > data.size())
        throw FormatError("truncated 32-bit field");
    return (static_cast<std::uint32_t>(data[offset]) << 24) |
           (static_cast<std::uint32_t>(data[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(data[offset + 2]) << 8) |
           static_cast<std::uint32_t>(data[offset + 3]);
}

bool ct_equal(ByteView a, ByteView b) {
    if (a.size() != b.size())
        return false;
    if (a.empty())
        return true;
    return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

Bytes bytes_of_string(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

} // namespace enkvote
