// Test-side oracles. These rebuild wire bytes and checksums without going
// through the library encoders.
#ifndef MMSGUARD_TESTS_SUPPORT_H
#define MMSGUARD_TESTS_SUPPORT_H

#include "mmsguard/bytes.h"
#include "mmsguard/pcap_io.h"

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <unistd.h>

namespace oracle {

using mmsguard::Bytes;

inline Bytes cat(std::initializer_list<Bytes> parts)
{
    Bytes out;
    for (const auto& p : parts)
        out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline Bytes tlv(std::uint8_t tag, const Bytes& content)
{
    Bytes out{tag};
    std::size_t n = content.size();
    if (n < 0x80) {
        out.push_back(std::uint8_t(n));
    } else if (n < 0x100) {
        out.push_back(0x81);
        out.push_back(std::uint8_t(n));
    } else {
        out.push_back(0x82);
        out.push_back(std::uint8_t(n >> 8));
        out.push_back(std::uint8_t(n));
    }
    out.insert(out.end(), content.begin(), content.end());
    return out;
}

inline Bytes str(const std::string& s)
{
    return Bytes(s.begin(), s.end());
}

// domain-specific ObjectName wrapped as listOfVariable entry
inline Bytes var_entry(const std::string& dom, const std::string& item)
{
    return tlv(0x30, tlv(0xa0, tlv(0xa1, cat({tlv(0x1a, str(dom)), tlv(0x1a, str(item))}))));
}

inline Bytes utc(std::uint32_t sec, std::uint8_t quality)
{
    return tlv(0x91, {std::uint8_t(sec >> 24), std::uint8_t(sec >> 16), std::uint8_t(sec >> 8), std::uint8_t(sec), 0, 0,
                      0, quality});
}

// Oper structure: ctlVal, operTm, origin{orCat, orIdent?}, ctlNum, T, Test, Check
inline Bytes oper(std::uint8_t q_oper, std::uint8_t q_t, std::uint8_t or_cat, const Bytes* or_ident,
                  std::uint32_t sec = 0x66000000)
{
    Bytes origin = tlv(0x85, {or_cat});
    if (or_ident)
        origin = cat({origin, tlv(0x89, *or_ident)});
    return tlv(0xa2, cat({tlv(0x83, {0x01}), utc(sec, q_oper), tlv(0xa2, origin), tlv(0x86, {0x00}), utc(sec, q_t),
                          tlv(0x83, {0x00}), tlv(0x84, {0x06, 0x00})}));
}

inline Bytes write_request(std::uint8_t invoke, const std::string& dom, const std::string& item, const Bytes& data)
{
    Bytes svc = tlv(0xa5, cat({tlv(0xa0, var_entry(dom, item)), tlv(0xa0, data)}));
    return tlv(0xa0, cat({tlv(0x02, {invoke}), svc}));
}

inline Bytes read_request(std::uint8_t invoke, const std::string& dom, const std::string& item)
{
    Bytes svc = tlv(0xa4, tlv(0xa1, tlv(0xa0, var_entry(dom, item))));
    return tlv(0xa0, cat({tlv(0x02, {invoke}), svc}));
}

// TPKT + COTP DT + session/presentation data skeleton
inline Bytes wrap(const Bytes& mms)
{
    Bytes pres = tlv(0x61, tlv(0x30, cat({{0x02, 0x01, 0x03}, tlv(0xa0, mms)})));
    Bytes body = cat({{0x02, 0xf0, 0x80, 0x01, 0x00, 0x01, 0x00}, pres});
    std::size_t len = body.size() + 4;
    return cat({{0x03, 0x00, std::uint8_t(len >> 8), std::uint8_t(len)}, body});
}

inline std::uint16_t internet_checksum(const Bytes& data)
{
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < data.size(); i += 2) {
        std::uint16_t word = std::uint16_t(data[i] << 8);
        if (i + 1 < data.size())
            word |= data[i + 1];
        sum += word;
    }
    while (sum >> 16)
        sum = (sum & 0xffff) + (sum >> 16);
    return std::uint16_t(~sum);
}

// Ethernet/IPv4/TCP frame with PSH|ACK and the given payload.
inline mmsguard::RawFrame tcp_frame(std::uint32_t src, std::uint16_t sport, std::uint32_t dst, std::uint16_t dport,
                                    std::uint32_t seq, const Bytes& payload, std::uint32_t ts_sec = 1000,
                                    std::uint8_t flags = 0x18)
{
    Bytes f(12, 0x02);
    f.push_back(0x08);
    f.push_back(0x00);
    std::size_t total = 40 + payload.size();
    Bytes ip{0x45, 0x00, std::uint8_t(total >> 8), std::uint8_t(total), 0, 1, 0x40, 0, 64, 6, 0, 0};
    for (auto v : {src, dst})
        for (int s = 24; s >= 0; s -= 8)
            ip.push_back(std::uint8_t(v >> s));
    Bytes tcp{std::uint8_t(sport >> 8), std::uint8_t(sport), std::uint8_t(dport >> 8), std::uint8_t(dport)};
    for (int s = 24; s >= 0; s -= 8)
        tcp.push_back(std::uint8_t(seq >> s));
    tcp.insert(tcp.end(), {0, 0, 0, 0, 0x50, flags, 0x20, 0x00, 0, 0, 0, 0});
    tcp.insert(tcp.end(), payload.begin(), payload.end());
    f = cat({f, ip, tcp});
    return {mmsguard::Timestamp{ts_sec, 0}, f};
}

class TempDir
{
public:
    TempDir()
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("mmsguard-test-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace oracle

#endif
