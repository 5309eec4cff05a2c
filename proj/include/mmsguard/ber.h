#ifndef MMSGUARD_BER_H
#define MMSGUARD_BER_H

#include "mmsguard/bytes.h"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace mmsguard::ber {

// Nesting cap applied by every structured decoder built on this module.
constexpr int kMaxDepth = 32;

// Single-byte tag, short-form or 0x81/0x82 long-form length.
struct Tlv
{
    std::uint8_t tag = 0;
    std::size_t begin = 0; // offset of the tag byte
    std::size_t content_begin = 0;
    std::size_t content_end = 0;
    std::size_t next = 0; // one past the content

    std::size_t length() const { return content_end - content_begin; }
    bool constructed() const { return tag & 0x20; }
};

// Throws MalformedTlv carrying the cursor on overrun or an unsupported
// length prefix.
Tlv decode_tlv(ByteView bytes, std::size_t cursor);

// Non-throwing variant for scanners.
std::optional<Tlv> try_decode_tlv(ByteView bytes, std::size_t cursor);

inline ByteView content_of(ByteView bytes, const Tlv& tlv)
{
    return bytes.subspan(tlv.content_begin, tlv.length());
}

// Appends tag + minimal length encoding. Throws Unencodable above 0xffff.
void put_header(Bytes& out, std::uint8_t tag, std::size_t length);
void put_tlv(Bytes& out, std::uint8_t tag, ByteView content);
void put_tlv(Bytes& out, std::uint8_t tag, std::string_view content);

// Minimal two's-complement INTEGER content.
Bytes encode_integer(std::int64_t value);
// Content bytes of a two's-complement INTEGER (1..8 bytes).
std::optional<std::int64_t> decode_integer(ByteView content);

} // namespace mmsguard::ber

#endif
