#ifndef MMSGUARD_PCAP_IO_H
#define MMSGUARD_PCAP_IO_H

#include "mmsguard/bytes.h"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace mmsguard {

// One captured Ethernet frame.
struct RawFrame
{
    Timestamp ts;
    Bytes link_bytes;

    bool operator==(const RawFrame&) const = default;
};

// Classic pcap, version 2.4, linktype 1 (Ethernet).
constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4;
constexpr std::uint32_t kPcapMagicNanos = 0xa1b23c4d;
constexpr std::size_t kPcapGlobalHeaderSize = 24;
constexpr std::size_t kPcapRecordHeaderSize = 16;
constexpr std::size_t kMaxFrameSize = 65535;

// Frames are returned in file order. Both byte orders and the nanosecond
// variant are accepted; nanosecond stamps are truncated to microseconds.
std::vector<RawFrame> read_pcap(const std::filesystem::path& path);
std::vector<RawFrame> parse_pcap(ByteView file);

// Little-endian, microsecond magic, snaplen 65535.
void write_pcap(const std::filesystem::path& path, const std::vector<RawFrame>& frames);
Bytes serialize_pcap(const std::vector<RawFrame>& frames);

// Stable sort on timestamp.
void sort_by_time(std::vector<RawFrame>& frames);

// Directional TCP flow identity.
struct FlowKey
{
    Ipv4 src_ip;
    std::uint16_t src_port = 0;
    Ipv4 dst_ip;
    std::uint16_t dst_port = 0;

    auto operator<=>(const FlowKey&) const = default;

    FlowKey reversed() const { return {dst_ip, dst_port, src_ip, src_port}; }
    std::string to_string() const;
};

struct TcpSegment
{
    FlowKey flow;
    std::uint32_t seq = 0;
    std::uint8_t flags = 0;
    ByteView payload; // view into the carrying frame
};

enum class FrameClass { Tcp, NonTcp, Ipv6, Vlan, Malformed };

// Ethernet/IPv4/TCP header walk. Returns nullopt for anything that is not a
// well-formed IPv4 TCP frame; the classification says why.
std::optional<TcpSegment> parse_tcp_frame(const RawFrame& frame, FrameClass* why = nullptr);

struct StreamChunk
{
    FlowKey flow;
    std::uint64_t offset = 0;
    Bytes payload;
    Timestamp ts;             // of the segment that completed the chunk
    std::size_t frame_index = 0; // index of that segment's frame in the input

    bool operator==(const StreamChunk&) const = default;
};

struct GapWarning
{
    FlowKey flow;
    std::uint64_t offset = 0; // first missing stream byte
    std::size_t discarded_bytes = 0;
};

struct ReassemblyResult
{
    std::vector<StreamChunk> chunks; // emission order; per flow, gap-free and offset-ordered
    std::vector<GapWarning> gaps;
    std::size_t tcp_frames = 0;
    std::size_t non_tcp_frames = 0;
    std::size_t ipv6_frames = 0;
    std::size_t vlan_frames = 0;
    std::size_t malformed_frames = 0;
    std::size_t duplicate_bytes = 0;
};

// Pure sequence-number assembler: SYN/FIN/RST are ignored and stream offset 0
// is the lowest payload sequence number seen for the flow.
ReassemblyResult reassemble(const std::vector<RawFrame>& frames);

} // namespace mmsguard

#endif
