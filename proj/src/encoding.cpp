#include "claimledger/encoding.hpp"

#include <algorithm>
#include <limits>

namespace claimledger {

Encoder& Encoder::u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
}

Encoder& Encoder::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

Encoder& Encoder::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
}

Encoder& Encoder::i64(std::int64_t v) {
    return u64(static_cast<std::uint64_t>(v));
}

Encoder& Encoder::fixed(ByteView raw) {
    buf_.insert(buf_.end(), raw.begin(), raw.end());
    return *this;
}

Encoder& Encoder::bytes(ByteView raw) {
    count(raw.size());
    return fixed(raw);
}

Encoder& Encoder::str(std::string_view s) {
    return bytes(as_bytes(s));
}

Encoder& Encoder::count(std::size_t n) {
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw EncodingError("length exceeds u32 prefix");
    }
    return u32(static_cast<std::uint32_t>(n));
}

ByteView Decoder::take(std::size_t n) {
    if (data_.size() - pos_ < n) {
        throw EncodingError("truncated input at offset " + std::to_string(pos_));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t Decoder::u8() {
    return take(1)[0];
}

std::uint32_t Decoder::u32() {
    std::uint32_t v = 0;
    for (auto b : take(4)) v = (v << 8) | b;
    return v;
}

std::uint64_t Decoder::u64() {
    std::uint64_t v = 0;
    for (auto b : take(8)) v = (v << 8) | b;
    return v;
}

std::int64_t Decoder::i64() {
    return static_cast<std::int64_t>(u64());
}

Hash32 Decoder::hash() {
    auto raw = take(32);
    Hash32 out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

Bytes Decoder::fixed(std::size_t n) {
    auto raw = take(n);
    return Bytes(raw.begin(), raw.end());
}

Bytes Decoder::bytes() {
    return fixed(u32());
}

std::string Decoder::str() {
    auto raw = take(u32());
    return std::string(raw.begin(), raw.end());
}

std::size_t Decoder::count() {
    return u32();
}

void Decoder::finish() const {
    if (!done()) {
        throw EncodingError(std::to_string(data_.size() - pos_) + " trailing bytes");
    }
}

} // namespace claimledger
