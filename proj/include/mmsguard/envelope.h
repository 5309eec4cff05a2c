#ifndef MMSGUARD_ENVELOPE_H
#define MMSGUARD_ENVELOPE_H

#include "mmsguard/bytes.h"

#include <cstddef>
#include <optional>
#include <vector>

namespace mmsguard {

// One MMS PDU lifted out of the ISO stack, stamped with the frame that
// completed its TPKT.
struct MmsPdu
{
    Timestamp ts;
    std::size_t frame_index = 0;
    Bytes bytes;
};

struct EnvelopeStats
{
    std::size_t tpkts = 0;
    std::size_t resyncs = 0;
    std::size_t not_mms = 0; // COTP connection setup, session PDUs without MMS user data
    std::size_t cotp_segments = 0; // DT TPDUs without EOT that were joined
};

// Incremental splitter for one flow direction. The stream must start on a
// TPKT boundary; version bytes other than 0x03 trigger a resync scan for the
// next 0x03 0x00.
class EnvelopeDecoder
{
public:
    void feed(ByteView data, Timestamp ts, std::size_t frame_index = 0);
    std::vector<MmsPdu> take();

    const EnvelopeStats& stats() const { return stats_; }
    std::size_t buffered() const { return buf_.size(); }

private:
    void process_tpkt(ByteView tpkt, Timestamp ts, std::size_t frame_index);

    Bytes buf_;
    Bytes cotp_accum_;
    bool in_desync_ = false;
    EnvelopeStats stats_;
    std::vector<MmsPdu> out_;
};

std::vector<MmsPdu> decode_envelope(ByteView stream, Timestamp ts = {}, EnvelopeStats* stats = nullptr);

// Finds the MMS PDU in COTP DT user data (session + presentation). Data
// transfer SPDUs are matched on their fixed skeleton; CONNECT/ACCEPT SPDUs
// are scanned for the ACSE user-information EXTERNAL.
std::optional<Bytes> locate_mms_pdu(ByteView session_data);

// Encoders used to fabricate traffic. Each returns a complete TPKT.
Bytes wrap_data_pdu(ByteView mms_pdu);
Bytes wrap_connect_request(ByteView initiate_request);
Bytes wrap_connect_response(ByteView initiate_response);
Bytes cotp_connection_request();
Bytes cotp_connection_confirm();

} // namespace mmsguard

#endif
