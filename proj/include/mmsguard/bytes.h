#ifndef MMSGUARD_BYTES_H
#define MMSGUARD_BYTES_H

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmsguard {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Capture time with microsecond resolution, as stored in classic pcap records.
struct Timestamp
{
    std::uint32_t sec = 0;
    std::uint32_t usec = 0;

    auto operator<=>(const Timestamp&) const = default;

    // "1700000000.000123"
    std::string to_string() const;
    static std::optional<Timestamp> parse(std::string_view text);
    std::int64_t total_usec() const { return std::int64_t(sec) * 1000000 + usec; }
    static Timestamp from_usec(std::int64_t us);
};

struct Ipv4
{
    std::uint32_t value = 0; // host order, a.b.c.d == a<<24 | ...

    auto operator<=>(const Ipv4&) const = default;

    std::string to_string() const;
    static std::optional<Ipv4> parse(std::string_view text);
};

// Lowercase hex without separators: {0x0a, 0xff} -> "0aff".
std::string to_hex(ByteView bytes);
std::optional<Bytes> from_hex(std::string_view hex);

// "0x0a"
std::string hex_byte(std::uint8_t b);
std::optional<std::uint8_t> parse_hex_byte(std::string_view text);

inline std::uint16_t load_be16(const std::uint8_t* p) { return std::uint16_t(p[0] << 8 | p[1]); }
inline std::uint32_t load_be32(const std::uint8_t* p)
{
    return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 | p[3];
}

inline void put_be16(Bytes& out, std::uint16_t v)
{
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

inline void put_be32(Bytes& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(std::uint8_t(v >> shift));
}

} // namespace mmsguard

#endif
