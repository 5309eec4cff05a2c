// Random generators for property tests.
#ifndef MMSGUARD_TESTS_GEN_H
#define MMSGUARD_TESTS_GEN_H

#include "mmsguard/baseline.h"
#include "mmsguard/ber.h"
#include "mmsguard/mms_codec.h"

#include <random>
#include <string>

namespace gen {

using namespace mmsguard;

class Source
{
public:
    explicit Source(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t next() { return rng_(); }
    std::uint64_t below(std::uint64_t n) { return rng_() % n; }
    bool coin() { return rng_() & 1; }
    std::uint8_t byte() { return std::uint8_t(rng_()); }

    Bytes bytes(std::size_t max)
    {
        Bytes b(below(max + 1));
        for (auto& x : b)
            x = byte();
        return b;
    }

    // Printable ASCII except '/', 1..max chars.
    std::string identifier(std::size_t max = 24)
    {
        std::string s(1 + below(max), ' ');
        for (auto& c : s) {
            do {
                c = char(0x20 + below(0x5f));
            } while (c == '/');
        }
        return s;
    }

    ObjectName name() { return {identifier(), identifier(40)}; }

    UtcTimestamp utc() { return {std::uint32_t(next()), std::uint32_t(below(1u << 24)), byte()}; }

    OperPayload oper()
    {
        OperPayload o;
        o.ctl_val = coin();
        o.oper_tm = utc();
        o.or_cat = std::int32_t(std::int64_t(below(1ull << 32)) - (1ll << 31));
        switch (below(3)) {
        case 0: break;
        case 1: o.or_ident = Bytes{}; break;
        default: o.or_ident = bytes(80);
        }
        o.ctl_num = byte();
        o.t = utc();
        o.test = coin();
        o.check = std::uint8_t(below(4));
        return o;
    }

    // A Data TLV that is not an Oper structure.
    Bytes plain_data()
    {
        Bytes out;
        switch (below(3)) {
        case 0: ber::put_tlv(out, 0x83, Bytes{std::uint8_t(below(2))}); break;
        case 1: ber::put_tlv(out, 0x85, ber::encode_integer(std::int64_t(next() % 100000) - 50000)); break;
        default: ber::put_tlv(out, 0x8a, identifier()); break;
        }
        return out;
    }

    // A sequence of well-formed TLVs for opaque payloads.
    Bytes opaque()
    {
        Bytes out;
        std::size_t n = below(3);
        for (std::size_t i = 0; i < n; ++i)
            ber::put_tlv(out, std::uint8_t(0x80 | below(0x1f)), bytes(12));
        return out;
    }

    MmsMessage message()
    {
        MmsMessage m;
        std::uint64_t kind = below(10);
        if (kind == 0) {
            m.kind = coin() ? PduKind::InitiateRequest : PduKind::InitiateResponse;
            m.response_payload = opaque();
            return m;
        }
        m.invoke_id = std::uint32_t(below(1u << 31));
        if (kind <= 2) {
            m.kind = PduKind::ConfirmedResponse;
            const Service svcs[] = {Service::Read, Service::Write, Service::GetNameList,
                                    Service::GetNamedVariableListAttributes};
            m.service = svcs[below(4)];
            m.response_payload = opaque();
            return m;
        }
        m.kind = PduKind::ConfirmedRequest;
        switch (below(5)) {
        case 0:
        case 1: {
            m.service = Service::Read;
            m.specification_with_result = coin();
            m.by_list_name = below(4) == 0;
            std::size_t n = m.by_list_name ? 1 : 1 + below(4);
            for (std::size_t i = 0; i < n; ++i)
                m.reads.push_back(name());
            break;
        }
        case 2:
        case 3: {
            m.service = Service::Write;
            m.by_list_name = below(5) == 0;
            ObjectName list = name();
            std::size_t n = 1 + below(3);
            for (std::size_t i = 0; i < n; ++i) {
                ObjectName nm = m.by_list_name ? list : name();
                if (coin())
                    m.writes.push_back(WriteItem::with_oper(nm, oper()));
                else
                    m.writes.push_back(WriteItem{nm, std::nullopt, plain_data()});
            }
            break;
        }
        default:
            if (below(3) == 0) {
                m.service = Service::GetNameList;
                m.response_payload = opaque();
            } else {
                m.service = coin() ? Service::GetVariableAccessAttributes : Service::GetNamedVariableListAttributes;
                m.target = name();
            }
            break;
        }
        return m;
    }

    ExtractedRecord record(std::size_t pool)
    {
        ExtractedRecord r;
        r.ts = Timestamp{std::uint32_t(1000 + below(100000)), std::uint32_t(below(1000000))};
        r.src_ip = Ipv4{std::uint32_t(0x0a000000 | below(4))};
        r.dst_ip = Ipv4{std::uint32_t(0x0a000100 | below(4))};
        const char* domains[] = {"GIED1CTRL", "SIED1PROT", "WAGO61850ServerLogicalDevice"};
        r.domain_id = domains[below(3)];
        if (coin()) {
            r.service = Service::Read;
            r.item_id = "LLN0$Item" + std::to_string(below(pool));
        } else {
            r.service = Service::Write;
            r.item_id = "GGIO" + std::to_string(below(pool)) + "$CO$SPCSO$Oper";
            if (below(5) != 0) {
                const TimeAccuracy acc[] = {{0x0f, 0x00}, {0x0f, 0x10}, {0x0a, 0x0a}, {0x0a, 0x00}};
                r.time_acc = acc[below(4)];
                r.or_cat = std::int32_t(below(4));
                switch (below(3)) {
                case 0: break;
                case 1: r.or_ident = Bytes(64, 0); break;
                default: r.or_ident = Bytes{byte(), byte()};
                }
            }
        }
        return r;
    }

private:
    std::mt19937_64 rng_;
};

} // namespace gen

#endif
