#include "mmsguard/field_extract.h"
#include "mmsguard/envelope.h"
#include "mmsguard/error.h"

#include <algorithm>
#include <ostream>
#include <tuple>

namespace mmsguard {

std::string canonical_or_ident(const std::optional<Bytes>& or_ident)
{
    if (!or_ident)
        return kOrIdentAbsent;
    if (or_ident->empty())
        return kOrIdentEmpty;
    return to_hex(*or_ident);
}

CaptureDecode decode_capture(const std::vector<RawFrame>& frames)
{
    CaptureDecode out;
    ExtractionReport& rep = out.report;
    rep.total_frames = frames.size();

    ReassemblyResult streams = reassemble(frames);
    rep.tcp_frames = streams.tcp_frames;
    rep.gaps = streams.gaps.size();

    std::map<FlowKey, EnvelopeDecoder> decoders;
    for (const auto& chunk : streams.chunks) {
        auto& dec = decoders[chunk.flow];
        dec.feed(chunk.payload, chunk.ts, chunk.frame_index);
        for (auto& pdu : dec.take()) {
            ++rep.mms_pdus;
            try {
                DecodedPdu d{chunk.flow, pdu.ts, pdu.frame_index, decode_mms(pdu.bytes)};
                switch (d.msg.kind) {
                case PduKind::ConfirmedRequest: ++rep.requests[*d.msg.service]; break;
                case PduKind::ConfirmedResponse: ++rep.responses; break;
                case PduKind::InitiateRequest: ++rep.initiate_requests; break;
                case PduKind::InitiateResponse: ++rep.initiate_responses; break;
                case PduKind::Other: break;
                }
                out.pdus.push_back(std::move(d));
            } catch (const MalformedTlv& e) {
                ++rep.decode_errors;
                out.failures.push_back({chunk.flow, pdu.ts, pdu.frame_index, e.what()});
            }
        }
    }
    for (const auto& [flow, dec] : decoders) {
        rep.not_mms += dec.stats().not_mms;
        rep.resyncs += dec.stats().resyncs;
    }

    std::stable_sort(out.pdus.begin(), out.pdus.end(), [](const DecodedPdu& a, const DecodedPdu& b) {
        return std::tie(a.ts, a.frame_index) < std::tie(b.ts, b.frame_index);
    });
    return out;
}

std::vector<ExtractedRecord> records_from_pdu(const DecodedPdu& pdu)
{
    std::vector<ExtractedRecord> out;
    const MmsMessage& m = pdu.msg;
    if (m.kind != PduKind::ConfirmedRequest || !m.service)
        return out;

    auto base = [&](const ObjectName& name) {
        ExtractedRecord r;
        r.ts = pdu.ts;
        r.frame_index = pdu.frame_index;
        r.src_ip = pdu.flow.src_ip;
        r.dst_ip = pdu.flow.dst_ip;
        r.service = *m.service;
        r.domain_id = name.domain_id;
        r.item_id = name.item_id;
        return r;
    };

    switch (*m.service) {
    case Service::Read:
        for (const auto& name : m.reads)
            out.push_back(base(name));
        break;
    case Service::Write:
        for (const auto& w : m.writes) {
            auto r = base(w.name);
            if (w.oper) {
                r.time_acc = extract_time_accuracy(*w.oper);
                r.or_ident = w.oper->or_ident;
                r.or_cat = w.oper->or_cat;
            }
            out.push_back(std::move(r));
        }
        break;
    default:
        if (m.target)
            out.push_back(base(*m.target));
        break;
    }
    return out;
}

Extraction extract(const CaptureDecode& decoded)
{
    Extraction ex;
    ex.report = decoded.report;
    for (const auto& pdu : decoded.pdus) {
        auto recs = records_from_pdu(pdu);
        ex.records.insert(ex.records.end(), std::make_move_iterator(recs.begin()),
                          std::make_move_iterator(recs.end()));
    }
    std::stable_sort(ex.records.begin(), ex.records.end(),
                     [](const ExtractedRecord& a, const ExtractedRecord& b) { return a.ts < b.ts; });
    ex.report.records = ex.records.size();
    return ex;
}

Extraction extract(const std::vector<RawFrame>& frames)
{
    return extract(decode_capture(frames));
}

static std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

void write_records_csv(std::ostream& out, const std::vector<ExtractedRecord>& records)
{
    out << "ts,src,dst,service,domain,item,acc1,acc2,orident,orcat\n";
    for (const auto& r : records) {
        out << r.ts.to_string() << ',' << r.src_ip.to_string() << ',' << r.dst_ip.to_string() << ','
            << service_tag(r.service) << ',' << csv_field(r.domain_id) << ',' << csv_field(r.item_id) << ',';
        if (r.time_acc)
            out << hex_byte(r.time_acc->oper_tm) << ',' << hex_byte(r.time_acc->t) << ',';
        else
            out << ",,";
        if (r.time_acc)
            out << canonical_or_ident(r.or_ident);
        out << ',';
        if (r.or_cat)
            out << *r.or_cat;
        out << '\n';
    }
}

} // namespace mmsguard
