#ifndef MMSGUARD_FIELD_EXTRACT_H
#define MMSGUARD_FIELD_EXTRACT_H

#include "mmsguard/bytes.h"
#include "mmsguard/mms_codec.h"
#include "mmsguard/pcap_io.h"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmsguard {

// One (request, object name) pair reduced to the detection fields.
struct ExtractedRecord
{
    Timestamp ts;
    std::size_t frame_index = 0;
    Ipv4 src_ip;
    Ipv4 dst_ip;
    Service service = Service::Read;
    std::string domain_id;
    std::string item_id;
    std::optional<TimeAccuracy> time_acc; // writes carrying an Oper only
    std::optional<Bytes> or_ident;
    std::optional<std::int32_t> or_cat;

    bool operator==(const ExtractedRecord&) const = default;
};

inline constexpr const char* kOrIdentAbsent = "ABSENT";
inline constexpr const char* kOrIdentEmpty = "EMPTY";

// ABSENT, EMPTY, or lowercase hex.
std::string canonical_or_ident(const std::optional<Bytes>& or_ident);

struct ExtractionReport
{
    std::size_t total_frames = 0;
    std::size_t tcp_frames = 0;
    std::size_t mms_pdus = 0;
    std::map<Service, std::size_t> requests; // confirmed requests per service
    std::size_t responses = 0;
    std::size_t initiate_requests = 0;
    std::size_t initiate_responses = 0;
    std::size_t decode_errors = 0;
    std::size_t not_mms = 0;
    std::size_t resyncs = 0;
    std::size_t gaps = 0;
    std::size_t records = 0;

    bool operator==(const ExtractionReport&) const = default;
};

struct DecodedPdu
{
    FlowKey flow;
    Timestamp ts;
    std::size_t frame_index = 0;
    MmsMessage msg;
};

struct DecodeFailure
{
    FlowKey flow;
    Timestamp ts;
    std::size_t frame_index = 0;
    std::string what;
};

struct CaptureDecode
{
    std::vector<DecodedPdu> pdus; // ordered by (ts, frame_index)
    std::vector<DecodeFailure> failures;
    ExtractionReport report;
};

// Reassembles every flow, strips the ISO envelope, and decodes each MMS PDU.
CaptureDecode decode_capture(const std::vector<RawFrame>& frames);

// Records for one decoded PDU; responses and Initiate PDUs yield none.
std::vector<ExtractedRecord> records_from_pdu(const DecodedPdu& pdu);

struct Extraction
{
    std::vector<ExtractedRecord> records; // ordered by timestamp
    ExtractionReport report;
};

Extraction extract(const std::vector<RawFrame>& frames);
Extraction extract(const CaptureDecode& decoded);

// Header: ts,src,dst,service,domain,item,acc1,acc2,orident,orcat
void write_records_csv(std::ostream& out, const std::vector<ExtractedRecord>& records);

} // namespace mmsguard

#endif
