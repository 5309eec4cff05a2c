#include "mmsguard/mms_codec.h"
#include "mmsguard/ber.h"
#include "mmsguard/error.h"

namespace mmsguard {

namespace {

// ISO 9506 tags used here.
constexpr std::uint8_t kConfirmedRequest = 0xa0;
constexpr std::uint8_t kConfirmedResponse = 0xa1;
constexpr std::uint8_t kInitiateRequest = 0xa8;
constexpr std::uint8_t kInitiateResponse = 0xa9;
constexpr std::uint8_t kInteger = 0x02;
constexpr std::uint8_t kSequence = 0x30;
constexpr std::uint8_t kVisibleString = 0x1a;
constexpr std::uint8_t kDomainSpecific = 0xa1;

// Data CHOICE tags.
constexpr std::uint8_t kDataStructure = 0xa2;
constexpr std::uint8_t kDataBoolean = 0x83;
constexpr std::uint8_t kDataBitString = 0x84;
constexpr std::uint8_t kDataInteger = 0x85;
constexpr std::uint8_t kDataUnsigned = 0x86;
constexpr std::uint8_t kDataOctetString = 0x89;
constexpr std::uint8_t kDataUtcTime = 0x91;

ber::Tlv decode_at(ByteView bytes, std::size_t cursor, const std::string& path)
{
    try {
        return ber::decode_tlv(bytes, cursor);
    } catch (const MalformedTlv& e) {
        throw MalformedTlv(e.offset(), e.reason(), path);
    }
}

std::vector<ber::Tlv> children(ByteView pdu, const ber::Tlv& parent, const std::string& path)
{
    std::vector<ber::Tlv> out;
    ByteView bounded = pdu.first(parent.content_end);
    std::size_t pos = parent.content_begin;
    while (pos < parent.content_end) {
        out.push_back(decode_at(bounded, pos, path));
        pos = out.back().next;
    }
    return out;
}

[[noreturn]] void fail(const ber::Tlv& at, const std::string& reason, const std::string& path)
{
    throw MalformedTlv(at.begin, reason, path);
}

void expect_tag(const ber::Tlv& tlv, std::uint8_t tag, const std::string& path)
{
    if (tlv.tag != tag)
        fail(tlv, "expected tag " + hex_byte(tag) + ", found " + hex_byte(tlv.tag), path);
}

void validate_nesting(ByteView pdu, const ber::Tlv& tlv, int depth, const std::string& path)
{
    if (depth > ber::kMaxDepth)
        fail(tlv, "nesting deeper than " + std::to_string(ber::kMaxDepth), path);
    if (!tlv.constructed())
        return;
    for (const auto& child : children(pdu, tlv, path))
        validate_nesting(pdu, child, depth + 1, path);
}

std::uint32_t decode_invoke_id(ByteView pdu, const ber::Tlv& tlv, const std::string& path)
{
    expect_tag(tlv, kInteger, path);
    auto v = ber::decode_integer(ber::content_of(pdu, tlv));
    if (!v || *v < 0 || *v > 0xffffffffLL)
        fail(tlv, "invokeID out of range", path);
    return std::uint32_t(*v);
}

std::string decode_identifier(ByteView pdu, const ber::Tlv& tlv, const std::string& path)
{
    expect_tag(tlv, kVisibleString, path);
    auto c = ber::content_of(pdu, tlv);
    std::string id(c.begin(), c.end());
    if (!is_identifier(id))
        fail(tlv, "invalid identifier", path);
    return id;
}

ObjectName decode_object_name(ByteView pdu, const ber::Tlv& tlv, const std::string& path)
{
    if (tlv.tag != kDomainSpecific)
        fail(tlv, "unsupported ObjectName form " + hex_byte(tlv.tag), path);
    auto parts = children(pdu, tlv, path);
    if (parts.size() != 2)
        fail(tlv, "domain-specific name needs domainId and itemId", path);
    return ObjectName{decode_identifier(pdu, parts[0], path + "/domainId"),
                      decode_identifier(pdu, parts[1], path + "/itemId")};
}

// variableAccessSpecification: listOfVariable [0] or variableListName [1].
std::vector<ObjectName> decode_access_spec(ByteView pdu, const ber::Tlv& vas, bool& by_list_name,
                                           const std::string& path)
{
    std::vector<ObjectName> names;
    if (vas.tag == 0xa0) {
        by_list_name = false;
        for (const auto& entry : children(pdu, vas, path + "/listOfVariable")) {
            expect_tag(entry, kSequence, path + "/listOfVariable");
            auto parts = children(pdu, entry, path + "/listOfVariable");
            if (parts.empty())
                fail(entry, "empty variable entry", path + "/listOfVariable");
            // parts[1], when present, is alternateAccess; not modeled.
            expect_tag(parts[0], 0xa0, path + "/listOfVariable/name");
            auto inner = children(pdu, parts[0], path + "/listOfVariable/name");
            if (inner.size() != 1)
                fail(parts[0], "name must hold one ObjectName", path + "/listOfVariable/name");
            names.push_back(decode_object_name(pdu, inner[0], path + "/listOfVariable/name"));
        }
    } else if (vas.tag == 0xa1) {
        by_list_name = true;
        auto inner = children(pdu, vas, path + "/variableListName");
        if (inner.size() != 1)
            fail(vas, "variableListName must hold one ObjectName", path + "/variableListName");
        names.push_back(decode_object_name(pdu, inner[0], path + "/variableListName"));
    } else {
        fail(vas, "unknown variableAccessSpecification form " + hex_byte(vas.tag), path);
    }
    if (names.empty())
        fail(vas, "no variables", path);
    return names;
}

void decode_read(ByteView pdu, const ber::Tlv& svc, MmsMessage& msg)
{
    const std::string path = "confirmedServiceRequest/read";
    auto parts = children(pdu, svc, path);
    std::size_t i = 0;
    if (i < parts.size() && parts[i].tag == 0x80) {
        auto c = ber::content_of(pdu, parts[i]);
        if (c.size() != 1)
            fail(parts[i], "specificationWithResult must be one byte", path);
        msg.specification_with_result = c[0] != 0;
        ++i;
    }
    if (i + 1 != parts.size())
        fail(svc, "expected exactly one variableAccessSpecification", path);
    expect_tag(parts[i], 0xa1, path + "/variableAccessSpecification");
    auto inner = children(pdu, parts[i], path + "/variableAccessSpecification");
    if (inner.size() != 1)
        fail(parts[i], "variableAccessSpecification must hold one choice", path + "/variableAccessSpecification");
    msg.reads = decode_access_spec(pdu, inner[0], msg.by_list_name, path + "/variableAccessSpecification");
}

void decode_write(ByteView pdu, const ber::Tlv& svc, MmsMessage& msg)
{
    const std::string path = "confirmedServiceRequest/write";
    auto parts = children(pdu, svc, path);
    if (parts.size() != 2)
        fail(svc, "expected variableAccessSpecification and listOfData", path);
    auto names = decode_access_spec(pdu, parts[0], msg.by_list_name, path + "/variableAccessSpecification");
    expect_tag(parts[1], 0xa0, path + "/listOfData");
    auto data = children(pdu, parts[1], path + "/listOfData");
    if (data.empty())
        fail(parts[1], "empty listOfData", path + "/listOfData");
    if (!msg.by_list_name && data.size() != names.size())
        fail(parts[1], "listOfData count differs from variable count", path + "/listOfData");

    for (std::size_t k = 0; k < data.size(); ++k) {
        validate_nesting(pdu, data[k], 1, path + "/listOfData");
        WriteItem item;
        item.name = msg.by_list_name ? names[0] : names[k];
        item.raw_value.assign(pdu.begin() + std::ptrdiff_t(data[k].begin), pdu.begin() + std::ptrdiff_t(data[k].next));
        item.oper = decode_oper(item.raw_value);
        msg.writes.push_back(std::move(item));
    }
}

std::optional<UtcTimestamp> decode_utc(ByteView c)
{
    if (c.size() != 8)
        return std::nullopt;
    UtcTimestamp ts;
    ts.seconds = load_be32(c.data());
    ts.fraction = std::uint32_t(c[4]) << 16 | std::uint32_t(c[5]) << 8 | c[6];
    ts.quality = c[7];
    return ts;
}

void put_utc(Bytes& out, const UtcTimestamp& ts)
{
    if (ts.fraction > 0xffffff)
        throw Unencodable("UtcTime fraction exceeds 24 bits");
    Bytes c;
    put_be32(c, ts.seconds);
    c.push_back(std::uint8_t(ts.fraction >> 16));
    c.push_back(std::uint8_t(ts.fraction >> 8));
    c.push_back(std::uint8_t(ts.fraction));
    c.push_back(ts.quality);
    ber::put_tlv(out, kDataUtcTime, c);
}

void put_identifier(Bytes& out, const std::string& id)
{
    if (!is_identifier(id))
        throw Unencodable("identifier \"" + id + "\" outside the MMS identifier charset");
    ber::put_tlv(out, kVisibleString, id);
}

Bytes encode_object_name(const ObjectName& name)
{
    Bytes inner;
    put_identifier(inner, name.domain_id);
    put_identifier(inner, name.item_id);
    Bytes out;
    ber::put_tlv(out, kDomainSpecific, inner);
    return out;
}

Bytes encode_access_spec(const std::vector<ObjectName>& names, bool by_list_name)
{
    Bytes out;
    if (by_list_name) {
        ber::put_tlv(out, 0xa1, encode_object_name(names.front()));
        return out;
    }
    Bytes list;
    for (const auto& n : names) {
        Bytes name_choice;
        ber::put_tlv(name_choice, 0xa0, encode_object_name(n));
        ber::put_tlv(list, kSequence, name_choice);
    }
    ber::put_tlv(out, 0xa0, list);
    return out;
}

Bytes encode_service_body(const MmsMessage& msg)
{
    Service svc = *msg.service;
    Bytes body;
    if (msg.kind != PduKind::ConfirmedRequest)
        return msg.response_payload;

    switch (svc) {
    case Service::Read: {
        if (msg.reads.empty())
            throw Unencodable("read request without variables");
        if (msg.by_list_name && msg.reads.size() != 1)
            throw Unencodable("variableListName read names exactly one list");
        if (msg.specification_with_result) {
            const std::uint8_t yes = 0x01;
            ber::put_tlv(body, 0x80, ByteView(&yes, 1));
        }
        ber::put_tlv(body, 0xa1, encode_access_spec(msg.reads, msg.by_list_name));
        return body;
    }
    case Service::Write: {
        if (msg.writes.empty())
            throw Unencodable("write request without variables");
        std::vector<ObjectName> names;
        for (const auto& w : msg.writes) {
            if (msg.by_list_name && w.name != msg.writes.front().name)
                throw Unencodable("variableListName write must use one list name");
            names.push_back(w.name);
        }
        if (msg.by_list_name)
            names.resize(1);
        body = encode_access_spec(names, msg.by_list_name);
        Bytes data;
        for (const auto& w : msg.writes) {
            if (w.oper) {
                auto enc = encode_oper(*w.oper);
                data.insert(data.end(), enc.begin(), enc.end());
            } else {
                auto tlv = ber::try_decode_tlv(w.raw_value, 0);
                if (!tlv || tlv->next != w.raw_value.size())
                    throw Unencodable("raw write value is not one complete Data TLV");
                data.insert(data.end(), w.raw_value.begin(), w.raw_value.end());
            }
        }
        ber::put_tlv(body, 0xa0, data);
        return body;
    }
    case Service::GetVariableAccessAttributes:
        if (!msg.target)
            throw Unencodable("GetVariableAccessAttributes request without a name");
        ber::put_tlv(body, 0xa0, encode_object_name(*msg.target));
        return body;
    case Service::GetNamedVariableListAttributes:
        if (!msg.target)
            throw Unencodable("GetNamedVariableListAttributes request without a list name");
        return encode_object_name(*msg.target);
    default:
        return msg.response_payload;
    }
}

} // namespace

std::string service_name(Service s)
{
    switch (s) {
    case Service::GetNameList: return "GetNameList";
    case Service::Read: return "Read";
    case Service::Write: return "Write";
    case Service::GetVariableAccessAttributes: return "GetVariableAccessAttributes";
    case Service::GetNamedVariableListAttributes: return "GetNamedVariableListAttributes";
    }
    return "Other(" + std::to_string(service_tag(s)) + ")";
}

std::string pdu_kind_name(PduKind kind)
{
    switch (kind) {
    case PduKind::ConfirmedRequest: return "ConfirmedRequest";
    case PduKind::ConfirmedResponse: return "ConfirmedResponse";
    case PduKind::InitiateRequest: return "InitiateRequest";
    case PduKind::InitiateResponse: return "InitiateResponse";
    case PduKind::Other: return "Other";
    }
    return "Other";
}

bool is_identifier(std::string_view text)
{
    if (text.empty())
        return false;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u > 0x7e || c == '/')
            return false;
    }
    return true;
}

TimeAccuracy extract_time_accuracy(const OperPayload& oper)
{
    return TimeAccuracy{oper.oper_tm.quality, oper.t.quality};
}

WriteItem WriteItem::with_oper(ObjectName name, const OperPayload& oper)
{
    return WriteItem{std::move(name), oper, encode_oper(oper)};
}

Bytes encode_oper(const OperPayload& oper)
{
    if (oper.check > 3)
        throw Unencodable("Check is a 2-bit bitstring");
    Bytes s;
    const std::uint8_t ctl = oper.ctl_val ? 0x01 : 0x00;
    ber::put_tlv(s, kDataBoolean, ByteView(&ctl, 1));
    put_utc(s, oper.oper_tm);

    Bytes origin;
    ber::put_tlv(origin, kDataInteger, ber::encode_integer(oper.or_cat));
    if (oper.or_ident)
        ber::put_tlv(origin, kDataOctetString, *oper.or_ident);
    ber::put_tlv(s, kDataStructure, origin);

    ber::put_tlv(s, kDataUnsigned, ber::encode_integer(oper.ctl_num));
    put_utc(s, oper.t);
    const std::uint8_t test = oper.test ? 0x01 : 0x00;
    ber::put_tlv(s, kDataBoolean, ByteView(&test, 1));
    const std::uint8_t check[2] = {0x06, std::uint8_t(oper.check << 6)};
    ber::put_tlv(s, kDataBitString, ByteView(check, 2));

    Bytes out;
    ber::put_tlv(out, kDataStructure, s);
    return out;
}

std::optional<OperPayload> decode_oper(ByteView data)
{
    auto top = ber::try_decode_tlv(data, 0);
    if (!top || top->tag != kDataStructure || top->next != data.size())
        return std::nullopt;

    std::vector<ber::Tlv> parts;
    for (std::size_t pos = top->content_begin; pos < top->content_end;) {
        auto t = ber::try_decode_tlv(data.first(top->content_end), pos);
        if (!t)
            return std::nullopt;
        parts.push_back(*t);
        pos = t->next;
    }
    // origin nests orCat and orIdent, so eight components span seven TLVs.
    if (parts.size() != 7)
        return std::nullopt;
    auto c = [&](std::size_t i) { return ber::content_of(data, parts[i]); };

    OperPayload oper;
    if (parts[0].tag != kDataBoolean || c(0).size() != 1)
        return std::nullopt;
    oper.ctl_val = c(0)[0] != 0;

    if (parts[1].tag != kDataUtcTime)
        return std::nullopt;
    auto oper_tm = decode_utc(c(1));
    if (!oper_tm)
        return std::nullopt;
    oper.oper_tm = *oper_tm;

    if (parts[2].tag != kDataStructure)
        return std::nullopt;
    std::vector<ber::Tlv> origin;
    for (std::size_t pos = parts[2].content_begin; pos < parts[2].content_end;) {
        auto t = ber::try_decode_tlv(data.first(parts[2].content_end), pos);
        if (!t)
            return std::nullopt;
        origin.push_back(*t);
        pos = t->next;
    }
    if (origin.empty() || origin.size() > 2 || origin[0].tag != kDataInteger)
        return std::nullopt;
    auto cat = ber::decode_integer(ber::content_of(data, origin[0]));
    if (!cat || *cat < INT32_MIN || *cat > INT32_MAX)
        return std::nullopt;
    oper.or_cat = std::int32_t(*cat);
    if (origin.size() == 2) {
        if (origin[1].tag != kDataOctetString)
            return std::nullopt;
        auto id = ber::content_of(data, origin[1]);
        oper.or_ident = Bytes(id.begin(), id.end());
    }

    if (parts[3].tag != kDataUnsigned)
        return std::nullopt;
    auto num = ber::decode_integer(c(3));
    if (!num || *num < 0 || *num > 0xff)
        return std::nullopt;
    oper.ctl_num = std::uint8_t(*num);

    if (parts[4].tag != kDataUtcTime)
        return std::nullopt;
    auto t = decode_utc(c(4));
    if (!t)
        return std::nullopt;
    oper.t = *t;

    if (parts[5].tag != kDataBoolean || c(5).size() != 1)
        return std::nullopt;
    oper.test = c(5)[0] != 0;

    if (parts[6].tag != kDataBitString || c(6).size() != 2)
        return std::nullopt;
    oper.check = std::uint8_t(c(6)[1] >> 6);
    return oper;
}

MmsMessage decode_mms(ByteView pdu)
{
    auto top = decode_at(pdu, 0, "pdu");
    if (top.next != pdu.size())
        throw MalformedTlv(top.next, "trailing bytes after PDU", "pdu");

    MmsMessage msg;
    switch (top.tag) {
    case kConfirmedRequest: msg.kind = PduKind::ConfirmedRequest; break;
    case kConfirmedResponse: msg.kind = PduKind::ConfirmedResponse; break;
    case kInitiateRequest: msg.kind = PduKind::InitiateRequest; break;
    case kInitiateResponse: msg.kind = PduKind::InitiateResponse; break;
    default: msg.kind = PduKind::Other; break;
    }

    if (msg.kind != PduKind::ConfirmedRequest && msg.kind != PduKind::ConfirmedResponse) {
        auto c = ber::content_of(pdu, top);
        msg.response_payload.assign(c.begin(), c.end());
        return msg;
    }

    const std::string path = msg.kind == PduKind::ConfirmedRequest ? "confirmedServiceRequest"
                                                                    : "confirmedServiceResponse";
    auto parts = children(pdu, top, path);
    if (parts.size() != 2)
        fail(top, "expected invokeID and one service element", path);
    msg.invoke_id = decode_invoke_id(pdu, parts[0], path + "/invokeID");

    const auto& svc = parts[1];
    if ((svc.tag & 0xc0) != 0x80 || (svc.tag & 0x1f) == 0x1f)
        fail(svc, "service element must be a low-number context tag", path);
    msg.service = static_cast<Service>(svc.tag & 0x1f);
    msg.service_primitive = !svc.constructed();

    if (msg.kind == PduKind::ConfirmedResponse) {
        auto c = ber::content_of(pdu, svc);
        msg.response_payload.assign(c.begin(), c.end());
        return msg;
    }

    switch (*msg.service) {
    case Service::Read:
        if (msg.service_primitive)
            fail(svc, "read request must be constructed", path);
        decode_read(pdu, svc, msg);
        break;
    case Service::Write:
        if (msg.service_primitive)
            fail(svc, "write request must be constructed", path);
        decode_write(pdu, svc, msg);
        break;
    case Service::GetVariableAccessAttributes: {
        const std::string p = path + "/getVariableAccessAttributes";
        auto inner = children(pdu, svc, p);
        if (inner.size() != 1 || inner[0].tag != 0xa0)
            fail(svc, "expected name choice", p);
        auto name = children(pdu, inner[0], p + "/name");
        if (name.size() != 1)
            fail(inner[0], "name must hold one ObjectName", p + "/name");
        msg.target = decode_object_name(pdu, name[0], p + "/name");
        break;
    }
    case Service::GetNamedVariableListAttributes: {
        const std::string p = path + "/getNamedVariableListAttributes";
        if (msg.service_primitive)
            fail(svc, "expected ObjectName", p);
        // The element itself carries the ObjectName choice's content; the
        // explicit [12] wraps a domain-specific name.
        auto inner = children(pdu, svc, p);
        if (inner.size() != 1)
            fail(svc, "expected one ObjectName", p);
        msg.target = decode_object_name(pdu, inner[0], p);
        break;
    }
    default: {
        if (svc.constructed())
            validate_nesting(pdu, svc, 2, path);
        auto c = ber::content_of(pdu, svc);
        msg.response_payload.assign(c.begin(), c.end());
        break;
    }
    }
    return msg;
}

Bytes encode_mms(const MmsMessage& msg)
{
    std::uint8_t top_tag;
    switch (msg.kind) {
    case PduKind::ConfirmedRequest: top_tag = kConfirmedRequest; break;
    case PduKind::ConfirmedResponse: top_tag = kConfirmedResponse; break;
    case PduKind::InitiateRequest: top_tag = kInitiateRequest; break;
    case PduKind::InitiateResponse: top_tag = kInitiateResponse; break;
    default: throw Unencodable("PDU kind Other cannot be encoded");
    }

    Bytes out;
    if (msg.kind == PduKind::InitiateRequest || msg.kind == PduKind::InitiateResponse) {
        ber::put_tlv(out, top_tag, msg.response_payload);
        return out;
    }
    if (!msg.invoke_id || !msg.service)
        throw Unencodable("confirmed PDU needs invokeID and service");
    std::uint32_t tag = service_tag(*msg.service);
    if (tag >= 0x1f)
        throw Unencodable("service tag " + std::to_string(tag) + " needs high-tag-number form");

    Bytes content;
    ber::put_tlv(content, kInteger, ber::encode_integer(*msg.invoke_id));
    std::uint8_t svc_tag = std::uint8_t(0x80 | tag | (msg.service_primitive ? 0x00 : 0x20));
    ber::put_tlv(content, svc_tag, encode_service_body(msg));
    ber::put_tlv(out, top_tag, content);
    return out;
}

std::vector<ObjectName> decode_dataset_members(ByteView body)
{
    const std::string path = "getNamedVariableListAttributes-response";
    std::vector<ObjectName> members;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto t = decode_at(body, pos, path);
        pos = t.next;
        if (t.tag != 0xa1)
            continue; // mmsDeletable [0]
        ber::Tlv list = t;
        list.tag = 0xa0; // same layout as listOfVariable
        bool by_list = false;
        auto tmp = decode_access_spec(body, list, by_list, path);
        members.insert(members.end(), tmp.begin(), tmp.end());
    }
    return members;
}

Bytes encode_dataset_members(const std::vector<ObjectName>& members)
{
    Bytes body;
    const std::uint8_t no = 0x00;
    ber::put_tlv(body, 0x80, ByteView(&no, 1));
    Bytes spec = encode_access_spec(members, false);
    // Re-tag listOfVariable [0] as [1].
    spec[0] = 0xa1;
    body.insert(body.end(), spec.begin(), spec.end());
    return body;
}

} // namespace mmsguard
