#include "mmsguard/ber.h"
#include "mmsguard/error.h"

namespace mmsguard::ber {

std::optional<Tlv> try_decode_tlv(ByteView bytes, std::size_t cursor)
{
    if (cursor >= bytes.size() || bytes.size() - cursor < 2)
        return std::nullopt;
    Tlv tlv;
    tlv.tag = bytes[cursor];
    tlv.begin = cursor;
    std::size_t pos = cursor + 1;
    std::uint8_t first = bytes[pos++];
    std::size_t length;
    if (first < 0x80) {
        length = first;
    } else if (first == 0x81) {
        if (pos + 1 > bytes.size())
            return std::nullopt;
        length = bytes[pos++];
    } else if (first == 0x82) {
        if (pos + 2 > bytes.size())
            return std::nullopt;
        length = load_be16(&bytes[pos]);
        pos += 2;
    } else {
        return std::nullopt;
    }
    if (length > bytes.size() - pos)
        return std::nullopt;
    tlv.content_begin = pos;
    tlv.content_end = pos + length;
    tlv.next = tlv.content_end;
    return tlv;
}

Tlv decode_tlv(ByteView bytes, std::size_t cursor)
{
    if (cursor >= bytes.size() || bytes.size() - cursor < 2)
        throw MalformedTlv(cursor, "fewer than 2 bytes remain");
    std::uint8_t first = bytes[cursor + 1];
    if (first >= 0x80 && first != 0x81 && first != 0x82)
        throw MalformedTlv(cursor, "unsupported length prefix " + hex_byte(first));
    auto tlv = try_decode_tlv(bytes, cursor);
    if (!tlv)
        throw MalformedTlv(cursor, "length overruns buffer");
    return *tlv;
}

void put_header(Bytes& out, std::uint8_t tag, std::size_t length)
{
    out.push_back(tag);
    if (length < 0x80) {
        out.push_back(std::uint8_t(length));
    } else if (length <= 0xff) {
        out.push_back(0x81);
        out.push_back(std::uint8_t(length));
    } else if (length <= 0xffff) {
        out.push_back(0x82);
        put_be16(out, std::uint16_t(length));
    } else {
        throw Unencodable("BER content of " + std::to_string(length) + " bytes exceeds 0x82 length form");
    }
}

void put_tlv(Bytes& out, std::uint8_t tag, ByteView content)
{
    put_header(out, tag, content.size());
    out.insert(out.end(), content.begin(), content.end());
}

void put_tlv(Bytes& out, std::uint8_t tag, std::string_view content)
{
    put_header(out, tag, content.size());
    out.insert(out.end(), content.begin(), content.end());
}

Bytes encode_integer(std::int64_t value)
{
    Bytes out;
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(std::uint8_t(std::uint64_t(value) >> shift));
    // Drop redundant leading sign bytes.
    std::size_t start = 0;
    while (start + 1 < out.size() &&
           ((out[start] == 0x00 && !(out[start + 1] & 0x80)) || (out[start] == 0xff && (out[start + 1] & 0x80))))
        ++start;
    return Bytes(out.begin() + std::ptrdiff_t(start), out.end());
}

std::optional<std::int64_t> decode_integer(ByteView content)
{
    if (content.empty() || content.size() > 8)
        return std::nullopt;
    std::uint64_t v = (content[0] & 0x80) ? ~std::uint64_t(0) : 0;
    for (auto b : content)
        v = v << 8 | b;
    return std::int64_t(v);
}

} // namespace mmsguard::ber
