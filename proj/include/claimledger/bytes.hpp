#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 32-byte digest (SHA-256 output, claim ids, chain links).
using Hash32 = std::array<std::uint8_t, 32>;

std::string to_hex(ByteView bytes);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& bytes) {
    return to_hex(ByteView(bytes.data(), bytes.size()));
}

/// Lowercase or uppercase hex accepted. Throws std::invalid_argument on odd
/// length or non-hex characters.
Bytes from_hex(std::string_view hex);

/// Like from_hex but requires exactly N decoded bytes.
template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view hex);

Hash32 hash32_from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// SHA-256, backed by libsodium.
Hash32 sha256(ByteView data);

} // namespace claimledger
