#include "claimledger/bytes.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace claimledger {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(ByteView bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw std::invalid_argument("hex string has odd length");
    }
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) {
            throw std::invalid_argument("invalid hex character");
        }
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view hex) {
    auto bytes = from_hex(hex);
    if (bytes.size() != N) {
        throw std::invalid_argument("hex string decodes to " + std::to_string(bytes.size()) +
                                    " bytes, expected " + std::to_string(N));
    }
    std::array<std::uint8_t, N> out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

template std::array<std::uint8_t, 32> array_from_hex<32>(std::string_view);
template std::array<std::uint8_t, 64> array_from_hex<64>(std::string_view);

Hash32 hash32_from_hex(std::string_view hex) {
    return array_from_hex<32>(hex);
}

Hash32 sha256(ByteView data) {
    Hash32 out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

} // namespace claimledger
