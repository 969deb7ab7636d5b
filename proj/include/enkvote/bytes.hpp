#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enkvote/errors.hpp"

namespace enkvote {

using Bytes = std::vector<std::uint8_t>;
using Bigint = boost::multiprecision::cpp_int;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex); // FormatError on odd length or bad digit

/// Big-endian, fixed width. DomainError if the value needs more than `width` octets
/// or is negative.
Bytes int_to_bytes_be(const Bigint& value, std::size_t width);

Bigint bytes_to_int_be(ByteView data);

/// Shortest big-endian form; zero encodes as a single 0x00 octet.
Bytes int_to_bytes_be_min(const Bigint& value);

/// Number of significant bits; bit_length(0) == 0.
unsigned bit_length(const Bigint& value);

inline void append(Bytes& out, ByteView more) { out.insert(out.end(), more.begin(), more.end()); }

Bytes concat(std::initializer_list<ByteView> parts);

void append_u32_be(Bytes& out, std::uint32_t v);
std::uint32_t read_u32_be(ByteView data, std::size_t offset); // FormatError if short

/// Constant-time comparison. Lengths must match; returns false otherwise.
bool ct_equal(ByteView a, ByteView b);

Bytes bytes_of_string(std::string_view s);

} // namespace enkvote
