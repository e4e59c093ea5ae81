#pragma once

// Canonical binary encoding used for every hashed or signed structure.
//
// Layout rules (see docs/ENCODING.md):
//   u8            1 byte
//   u32 / u64     big-endian, fixed width
//   i64           two's complement, encoded as u64
//   fixed<N>      N raw bytes, no prefix (digests, keys, signatures)
//   bytes/string  u32 big-endian length followed by the raw bytes
//   list<T>       u32 big-endian element count followed by the elements

#include "claimledger/bytes.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace claimledger {

class EncodingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Encoder {
public:
    Encoder& u8(std::uint8_t v);
    Encoder& u32(std::uint32_t v);
    Encoder& u64(std::uint64_t v);
    Encoder& i64(std::int64_t v);
    Encoder& fixed(ByteView raw);
    Encoder& bytes(ByteView raw);
    Encoder& str(std::string_view s);
    Encoder& count(std::size_t n);

    const Bytes& data() const& { return buf_; }
    Bytes take() && { return std::move(buf_); }

private:
    Bytes buf_;
};

/// Cursor over an encoded buffer. Every read throws EncodingError on
/// truncation; finish() throws if unread bytes remain.
class Decoder {
public:
    explicit Decoder(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    Hash32 hash();
    Bytes fixed(std::size_t n);
    Bytes bytes();
    std::string str();
    std::size_t count();

    bool done() const { return pos_ == data_.size(); }
    void finish() const;

private:
    ByteView take(std::size_t n);

    ByteView data_;
    std::size_t pos_ = 0;
};

} // namespace claimledger
