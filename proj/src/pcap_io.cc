#include "mmsguard/pcap_io.h"
#include "mmsguard/error.h"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace mmsguard {

namespace {

constexpr std::uint32_t kPcapngMagic = 0x0a0d0d0a;
constexpr std::uint32_t kLinkEthernet = 1;

std::uint32_t load_le32(const std::uint8_t* p)
{
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void put_le32(Bytes& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8)
        out.push_back(std::uint8_t(v >> shift));
}

void put_le16(Bytes& out, std::uint16_t v)
{
    out.push_back(std::uint8_t(v));
    out.push_back(std::uint8_t(v >> 8));
}

} // namespace

std::vector<RawFrame> parse_pcap(ByteView file)
{
    if (file.size() < 4)
        throw UnsupportedFormat("not a pcap file: shorter than the magic number");

    std::uint32_t magic_le = load_le32(file.data());
    if (magic_le == kPcapngMagic)
        throw UnsupportedFormat("pcapng capture is not supported; convert it to classic pcap first "
                                "(e.g. editcap -F pcap in.pcapng out.pcap)");

    bool swapped;
    bool nanos = false;
    if (magic_le == kPcapMagic || magic_le == kPcapMagicNanos) {
        swapped = false;
        nanos = magic_le == kPcapMagicNanos;
    } else if (load_be32(file.data()) == kPcapMagic || load_be32(file.data()) == kPcapMagicNanos) {
        swapped = true;
        nanos = load_be32(file.data()) == kPcapMagicNanos;
    } else {
        throw UnsupportedFormat("unrecognized capture magic number; only classic pcap is supported");
    }
    if (file.size() < kPcapGlobalHeaderSize)
        throw TruncatedFile("pcap global header truncated", 0);

    auto u32 = [&](std::size_t off) { return swapped ? load_be32(&file[off]) : load_le32(&file[off]); };

    std::uint32_t linktype = u32(20) & 0x0fffffff;
    if (linktype != kLinkEthernet)
        throw UnsupportedFormat("pcap link type " + std::to_string(linktype) + " is not supported; only Ethernet (1)");

    std::vector<RawFrame> frames;
    std::size_t pos = kPcapGlobalHeaderSize;
    while (pos < file.size()) {
        if (file.size() - pos < kPcapRecordHeaderSize)
            throw TruncatedFile("partial pcap record header after " + std::to_string(frames.size()) + " frames",
                                frames.size());
        std::uint32_t sec = u32(pos);
        std::uint32_t frac = u32(pos + 4);
        std::uint32_t incl = u32(pos + 8);
        pos += kPcapRecordHeaderSize;
        if (incl > file.size() - pos)
            throw TruncatedFile("partial pcap record body after " + std::to_string(frames.size()) + " frames",
                                frames.size());
        RawFrame frame;
        frame.ts = Timestamp{sec, nanos ? frac / 1000 : frac};
        frame.link_bytes.assign(file.begin() + std::ptrdiff_t(pos), file.begin() + std::ptrdiff_t(pos + incl));
        frames.push_back(std::move(frame));
        pos += incl;
    }
    return frames;
}

std::vector<RawFrame> read_pcap(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open " + path.string() + ": " + std::strerror(errno));
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoFailure("read error on " + path.string());
    return parse_pcap(data);
}

Bytes serialize_pcap(const std::vector<RawFrame>& frames)
{
    std::size_t total = kPcapGlobalHeaderSize;
    for (const auto& f : frames) {
        if (f.link_bytes.size() > kMaxFrameSize)
            throw std::invalid_argument("frame exceeds 65535 bytes");
        total += kPcapRecordHeaderSize + f.link_bytes.size();
    }

    Bytes out;
    out.reserve(total);
    put_le32(out, kPcapMagic);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0); // thiszone
    put_le32(out, 0); // sigfigs
    put_le32(out, kMaxFrameSize);
    put_le32(out, kLinkEthernet);
    for (const auto& f : frames) {
        put_le32(out, f.ts.sec);
        put_le32(out, f.ts.usec);
        put_le32(out, std::uint32_t(f.link_bytes.size()));
        put_le32(out, std::uint32_t(f.link_bytes.size()));
        out.insert(out.end(), f.link_bytes.begin(), f.link_bytes.end());
    }
    return out;
}

void write_pcap(const std::filesystem::path& path, const std::vector<RawFrame>& frames)
{
    Bytes data = serialize_pcap(frames);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure("cannot create " + path.string() + ": " + std::strerror(errno));
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    out.flush();
    if (!out)
        throw IoFailure("write error on " + path.string() + ": " + std::strerror(errno));
}

void sort_by_time(std::vector<RawFrame>& frames)
{
    std::stable_sort(frames.begin(), frames.end(), [](const RawFrame& a, const RawFrame& b) { return a.ts < b.ts; });
}

std::string FlowKey::to_string() const
{
    return src_ip.to_string() + ":" + std::to_string(src_port) + "->" + dst_ip.to_string() + ":" +
           std::to_string(dst_port);
}

std::optional<TcpSegment> parse_tcp_frame(const RawFrame& frame, FrameClass* why)
{
    auto fail = [&](FrameClass c) -> std::optional<TcpSegment> {
        if (why)
            *why = c;
        return std::nullopt;
    };

    const Bytes& b = frame.link_bytes;
    if (b.size() < 14)
        return fail(FrameClass::Malformed);
    std::uint16_t ethertype = load_be16(&b[12]);
    if (ethertype == 0x8100 || ethertype == 0x88a8)
        return fail(FrameClass::Vlan);
    if (ethertype == 0x86dd)
        return fail(FrameClass::Ipv6);
    if (ethertype != 0x0800)
        return fail(FrameClass::NonTcp);

    std::size_t ip = 14;
    if (b.size() < ip + 20 || (b[ip] >> 4) != 4)
        return fail(FrameClass::Malformed);
    std::size_t ihl = std::size_t(b[ip] & 0x0f) * 4;
    std::size_t total_len = load_be16(&b[ip + 2]);
    if (ihl < 20 || total_len < ihl || ip + total_len > b.size())
        return fail(FrameClass::Malformed);
    if (b[ip + 9] != 6)
        return fail(FrameClass::NonTcp);
    // Fragments other than the first carry no TCP header.
    if ((load_be16(&b[ip + 6]) & 0x1fff) != 0)
        return fail(FrameClass::NonTcp);

    std::size_t tcp = ip + ihl;
    std::size_t ip_end = ip + total_len;
    if (ip_end < tcp + 20)
        return fail(FrameClass::Malformed);
    std::size_t data_off = std::size_t(b[tcp + 12] >> 4) * 4;
    if (data_off < 20 || tcp + data_off > ip_end)
        return fail(FrameClass::Malformed);

    TcpSegment seg;
    seg.flow.src_ip = Ipv4{load_be32(&b[ip + 12])};
    seg.flow.dst_ip = Ipv4{load_be32(&b[ip + 16])};
    seg.flow.src_port = load_be16(&b[tcp]);
    seg.flow.dst_port = load_be16(&b[tcp + 2]);
    seg.seq = load_be32(&b[tcp + 4]);
    seg.flags = b[tcp + 13];
    seg.payload = ByteView(b.data() + tcp + data_off, ip_end - tcp - data_off);
    if (why)
        *why = FrameClass::Tcp;
    return seg;
}

namespace {

struct FlowState
{
    std::uint32_t ref_seq = 0;
    std::int64_t base = 0; // lowest relative offset with payload
    std::int64_t next = 0;
    std::map<std::int64_t, Bytes> pending;
};

} // namespace

ReassemblyResult reassemble(const std::vector<RawFrame>& frames)
{
    ReassemblyResult result;

    struct Parsed
    {
        std::size_t index;
        TcpSegment seg;
    };
    std::vector<Parsed> segments;
    segments.reserve(frames.size());

    for (std::size_t i = 0; i < frames.size(); ++i) {
        FrameClass why = FrameClass::Tcp;
        auto seg = parse_tcp_frame(frames[i], &why);
        switch (why) {
        case FrameClass::Tcp: ++result.tcp_frames; break;
        case FrameClass::NonTcp: ++result.non_tcp_frames; break;
        case FrameClass::Ipv6: ++result.ipv6_frames; break;
        case FrameClass::Vlan: ++result.vlan_frames; break;
        case FrameClass::Malformed: ++result.malformed_frames; break;
        }
        if (seg && !seg->payload.empty())
            segments.push_back({i, *seg});
    }

    // Offsets are taken relative to the first sequence number seen so that
    // wraparound and out-of-order first arrivals both resolve.
    std::map<FlowKey, FlowState> flows;
    for (const auto& p : segments) {
        auto [it, inserted] = flows.try_emplace(p.seg.flow);
        FlowState& st = it->second;
        if (inserted) {
            st.ref_seq = p.seg.seq;
            st.base = 0;
        }
        std::int64_t rel = std::int32_t(p.seg.seq - st.ref_seq);
        st.base = std::min(st.base, rel);
    }
    for (auto& [key, st] : flows)
        st.next = st.base;

    auto emit = [&](const FlowKey& flow, FlowState& st, std::int64_t offset, ByteView data, const Parsed& carrier) {
        std::int64_t end = offset + std::int64_t(data.size());
        if (end <= st.next) {
            result.duplicate_bytes += data.size();
            return;
        }
        std::size_t skip = std::size_t(st.next - offset);
        result.duplicate_bytes += skip;
        StreamChunk chunk;
        chunk.flow = flow;
        chunk.offset = std::uint64_t(st.next - st.base);
        chunk.payload.assign(data.begin() + std::ptrdiff_t(skip), data.end());
        chunk.ts = frames[carrier.index].ts;
        chunk.frame_index = carrier.index;
        result.chunks.push_back(std::move(chunk));
        st.next = end;
    };

    for (const auto& p : segments) {
        FlowState& st = flows[p.seg.flow];
        std::int64_t rel = std::int32_t(p.seg.seq - st.ref_seq);
        if (rel > st.next) {
            auto& slot = st.pending[rel];
            if (p.seg.payload.size() > slot.size())
                slot.assign(p.seg.payload.begin(), p.seg.payload.end());
            else
                result.duplicate_bytes += p.seg.payload.size();
            continue;
        }
        emit(p.seg.flow, st, rel, p.seg.payload, p);
        while (!st.pending.empty() && st.pending.begin()->first <= st.next) {
            auto node = st.pending.extract(st.pending.begin());
            emit(p.seg.flow, st, node.key(), node.mapped(), p);
        }
    }

    for (auto& [key, st] : flows) {
        if (st.pending.empty())
            continue;
        std::size_t lost = 0;
        for (const auto& [off, data] : st.pending)
            lost += data.size();
        result.gaps.push_back({key, std::uint64_t(st.next - st.base), lost});
    }
    return result;
}

} // namespace mmsguard
