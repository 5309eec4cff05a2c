#include "mmsguard/bytes.h"
#include "mmsguard/error.h"

#include <charconv>
#include <cstdio>

namespace mmsguard {

std::string Timestamp::to_string() const
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%u.%06u", sec, usec);
    return buf;
}

std::optional<Timestamp> Timestamp::parse(std::string_view text)
{
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() || frac.size() > 6)
        return std::nullopt;

    Timestamp ts;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), ts.sec);
    if (ec != std::errc{} || p != whole.data() + whole.size())
        return std::nullopt;
    std::uint32_t scale = 100000;
    for (char c : frac) {
        if (c < '0' || c > '9')
            return std::nullopt;
        ts.usec += std::uint32_t(c - '0') * scale;
        scale /= 10;
    }
    return ts;
}

Timestamp Timestamp::from_usec(std::int64_t us)
{
    if (us < 0)
        us = 0;
    return Timestamp{std::uint32_t(us / 1000000), std::uint32_t(us % 1000000)};
}

std::string Ipv4::to_string() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                  value & 0xff);
    return buf;
}

std::optional<Ipv4> Ipv4::parse(std::string_view text)
{
    std::uint32_t v = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 4; ++i) {
        unsigned octet = 0;
        auto [next, ec] = std::from_chars(p, end, octet);
        if (ec != std::errc{} || next == p || octet > 255 || next - p > 3)
            return std::nullopt;
        v = v << 8 | octet;
        p = next;
        if (i < 3) {
            if (p == end || *p != '.')
                return std::nullopt;
            ++p;
        }
    }
    if (p != end)
        return std::nullopt;
    return Ipv4{v};
}

std::string to_hex(ByteView bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

static int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::optional<Bytes> from_hex(std::string_view hex)
{
    if (hex.size() % 2)
        return std::nullopt;
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0)
            return std::nullopt;
        out.push_back(std::uint8_t(hi << 4 | lo));
    }
    return out;
}

std::string hex_byte(std::uint8_t b)
{
    return "0x" + to_hex(ByteView(&b, 1));
}

std::optional<std::uint8_t> parse_hex_byte(std::string_view text)
{
    if (text.size() != 4 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X'))
        return std::nullopt;
    auto bytes = from_hex(text.substr(2));
    if (!bytes)
        return std::nullopt;
    return (*bytes)[0];
}

MalformedTlv::MalformedTlv(std::size_t offset, std::string reason, std::string path)
    : Error("malformed BER at offset " + std::to_string(offset) + (path.empty() ? "" : " (" + path + ")") +
            ": " + reason),
      offset_(offset), reason_(std::move(reason)), path_(std::move(path))
{
}

ParseError::ParseError(std::size_t line, std::size_t column, std::size_t token, const std::string& reason)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + " (token " +
            std::to_string(token) + "): " + reason),
      line_(line), column_(column), token_(token)
{
}

} // namespace mmsguard
