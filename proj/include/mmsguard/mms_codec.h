#ifndef MMSGUARD_MMS_CODEC_H
#define MMSGUARD_MMS_CODEC_H

#include "mmsguard/bytes.h"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmsguard {

// Confirmed service choice tags. Values outside the named set are legal and
// print as Other(n).
enum class Service : std::uint32_t
{
    GetNameList = 1,
    Read = 4,
    Write = 5,
    GetVariableAccessAttributes = 6,
    GetNamedVariableListAttributes = 12,
};

std::string service_name(Service s);
inline std::uint32_t service_tag(Service s) { return static_cast<std::uint32_t>(s); }

// Printable ASCII (0x20..0x7e) except '/', non-empty.
bool is_identifier(std::string_view text);

// Domain-specific MMS object reference: logical device + "LN$FC$DO$DA" path.
struct ObjectName
{
    std::string domain_id;
    std::string item_id;

    auto operator<=>(const ObjectName&) const = default;
    std::string to_string() const { return domain_id + "/" + item_id; }
};

// IEC 61850 UtcTime: 4 bytes seconds, 3 bytes fraction, 1 byte time quality.
struct UtcTimestamp
{
    std::uint32_t seconds = 0;
    std::uint32_t fraction = 0; // 24 bits used
    std::uint8_t quality = 0;

    bool operator==(const UtcTimestamp&) const = default;
};

// Quality bytes of operTm and T, in that order.
struct TimeAccuracy
{
    std::uint8_t oper_tm = 0;
    std::uint8_t t = 0;

    auto operator<=>(const TimeAccuracy&) const = default;
};

// Oper structure of a controllable data object, eight components in wire order;
// origin.orCat and origin.orIdent share one nested structure.
struct OperPayload
{
    bool ctl_val = false;
    UtcTimestamp oper_tm;
    std::int32_t or_cat = 0; // 2 station-control, 3 remote-control
    std::optional<Bytes> or_ident; // absent is distinct from present-and-empty
    std::uint8_t ctl_num = 0;
    UtcTimestamp t;
    bool test = false;
    std::uint8_t check = 0; // 2-bit bitstring

    bool operator==(const OperPayload&) const = default;

    // orCat is defined for 0..8; decoded values outside are kept as-is.
    bool or_cat_in_range() const { return or_cat >= 0 && or_cat <= 8; }
};

TimeAccuracy extract_time_accuracy(const OperPayload& oper);

struct WriteItem
{
    ObjectName name;
    std::optional<OperPayload> oper; // set when the Data matches the Oper layout
    Bytes raw_value;                  // the complete Data TLV

    bool operator==(const WriteItem&) const = default;

    static WriteItem with_oper(ObjectName name, const OperPayload& oper);
};

enum class PduKind
{
    ConfirmedRequest,
    ConfirmedResponse,
    InitiateRequest,
    InitiateResponse,
    Other,
};

std::string pdu_kind_name(PduKind kind);

struct MmsMessage
{
    PduKind kind = PduKind::Other;
    std::optional<std::uint32_t> invoke_id;
    std::optional<Service> service;

    // Read request layout flags.
    bool specification_with_result = false;
    // variableAccessSpecification used the variableListName form.
    bool by_list_name = false;

    std::vector<ObjectName> reads;
    std::vector<WriteItem> writes;
    // Object named by GetVariableAccessAttributes / GetNamedVariableListAttributes requests.
    std::optional<ObjectName> target;

    // Opaque content: response service bodies, Initiate PDUs, and request
    // services that are not modeled (e.g. GetNameList).
    Bytes response_payload;
    // The service element was encoded primitive rather than constructed.
    bool service_primitive = false;

    bool operator==(const MmsMessage&) const = default;
};

// Data TLV for an Oper structure (structure tag 0xa2).
Bytes encode_oper(const OperPayload& oper);
std::optional<OperPayload> decode_oper(ByteView data_tlv);

// Throws MalformedTlv with path context.
MmsMessage decode_mms(ByteView pdu);

// Throws Unencodable for kind Other, bad identifiers, or type invariant violations.
Bytes encode_mms(const MmsMessage& msg);

// GetNamedVariableListAttributes response body (content of the service element).
std::vector<ObjectName> decode_dataset_members(ByteView response_payload);
Bytes encode_dataset_members(const std::vector<ObjectName>& members);

} // namespace mmsguard

#endif
