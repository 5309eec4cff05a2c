#include "json_codec.h"

namespace mmsguard::json_codec {

json parse_document(std::string_view text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaMismatch(std::string(what) + ": invalid JSON: " + e.what());
    }
}

const json& require(const json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key))
        throw SchemaMismatch(std::string("missing field \"") + key + "\"");
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key)
{
    const json& v = require(obj, key);
    if (!v.is_string())
        throw SchemaMismatch(std::string("field \"") + key + "\" must be a string");
    return v.get<std::string>();
}

json time_acc_to_json(const std::optional<TimeAccuracy>& acc)
{
    if (!acc)
        return nullptr;
    return json::array({hex_byte(acc->oper_tm), hex_byte(acc->t)});
}

std::optional<TimeAccuracy> time_acc_from_json(const json& j, const char* what)
{
    if (j.is_null())
        return std::nullopt;
    if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
        throw SchemaMismatch(std::string(what) + ": expected [\"0x..\", \"0x..\"] or null");
    auto a = parse_hex_byte(j[0].get<std::string>());
    auto b = parse_hex_byte(j[1].get<std::string>());
    if (!a || !b)
        throw SchemaMismatch(std::string(what) + ": bad hex byte");
    return TimeAccuracy{*a, *b};
}

std::string bytes_to_json(const Bytes& b)
{
    return "0x" + to_hex(b);
}

Bytes bytes_from_json(const json& j, const char* what)
{
    if (!j.is_string())
        throw SchemaMismatch(std::string(what) + ": expected a \"0x..\" string");
    auto s = j.get<std::string>();
    if (s.size() < 2 || s[0] != '0' || s[1] != 'x')
        throw SchemaMismatch(std::string(what) + ": expected a \"0x..\" string");
    auto bytes = from_hex(std::string_view(s).substr(2));
    if (!bytes)
        throw SchemaMismatch(std::string(what) + ": bad hex");
    return *bytes;
}

Service service_from_json(const json& j, const char* what)
{
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw SchemaMismatch(std::string(what) + ": service must be a non-negative integer tag");
    return static_cast<Service>(j.get<std::uint32_t>());
}

json record_to_json(const ExtractedRecord& r)
{
    json j = {
        {"ts", r.ts.to_string()},
        {"frame", r.frame_index},
        {"src", r.src_ip.to_string()},
        {"dst", r.dst_ip.to_string()},
        {"service", service_tag(r.service)},
        {"domain", r.domain_id},
        {"item", r.item_id},
        {"time_acc", time_acc_to_json(r.time_acc)},
        {"or_ident", r.or_ident ? json(bytes_to_json(*r.or_ident)) : json(nullptr)},
        {"or_cat", r.or_cat ? json(*r.or_cat) : json(nullptr)},
    };
    return j;
}

ExtractedRecord record_from_json(const json& j)
{
    ExtractedRecord r;
    try {
        auto ts = Timestamp::parse(require_string(j, "ts"));
        auto src = Ipv4::parse(require_string(j, "src"));
        auto dst = Ipv4::parse(require_string(j, "dst"));
        if (!ts || !src || !dst)
            throw SchemaMismatch("record: bad ts/src/dst");
        r.ts = *ts;
        r.src_ip = *src;
        r.dst_ip = *dst;
        r.frame_index = require(j, "frame").get<std::size_t>();
        r.service = service_from_json(require(j, "service"), "record");
        r.domain_id = require_string(j, "domain");
        r.item_id = require_string(j, "item");
        r.time_acc = time_acc_from_json(require(j, "time_acc"), "record.time_acc");
        if (!require(j, "or_ident").is_null())
            r.or_ident = bytes_from_json(j["or_ident"], "record.or_ident");
        if (!require(j, "or_cat").is_null())
            r.or_cat = j["or_cat"].get<std::int32_t>();
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("record: ") + e.what());
    }
    return r;
}

json signature_to_json(const AttackSignature& s)
{
    const FieldPredicate& p = s.predicate;
    json j = {
        {"id", s.id},
        {"service", service_tag(p.service)},
        {"time_acc", time_acc_to_json(p.time_acc)},
        {"or_ident_form", or_ident_form_name(p.or_ident_form)},
        {"domain", p.domain ? json(*p.domain) : json(nullptr)},
        {"item", p.item ? json(*p.item) : json(nullptr)},
        {"item_match", p.item_match == ItemMatch::Exact ? "exact" : "prefix"},
        {"provenance", origin_name(s.origin)},
        {"severity", severity_name(s.severity)},
        {"description", s.description},
    };
    if (p.or_ident_form == OrIdentForm::Exact)
        j["or_ident"] = bytes_to_json(p.or_ident);
    return j;
}

AttackSignature signature_from_json(const json& j)
{
    AttackSignature s;
    try {
        s.id = require_string(j, "id");
        if (s.id.empty())
            throw SchemaMismatch("signature: empty id");
        FieldPredicate& p = s.predicate;
        p.service = service_from_json(require(j, "service"), "signature");
        p.time_acc = time_acc_from_json(require(j, "time_acc"), "signature.time_acc");

        std::string form = require_string(j, "or_ident_form");
        if (form == "ABSENT")
            p.or_ident_form = OrIdentForm::Absent;
        else if (form == "ALL_ZERO_64")
            p.or_ident_form = OrIdentForm::AllZero64;
        else if (form == "EXACT") {
            p.or_ident_form = OrIdentForm::Exact;
            p.or_ident = bytes_from_json(require(j, "or_ident"), "signature.or_ident");
        } else if (form == "ANY")
            p.or_ident_form = OrIdentForm::Any;
        else
            throw SchemaMismatch("signature " + s.id + ": unknown or_ident_form " + form);

        if (j.contains("domain") && !j["domain"].is_null())
            p.domain = j["domain"].get<std::string>();
        if (j.contains("item") && !j["item"].is_null())
            p.item = j["item"].get<std::string>();
        std::string im = j.value("item_match", "exact");
        if (im == "exact")
            p.item_match = ItemMatch::Exact;
        else if (im == "prefix")
            p.item_match = ItemMatch::Prefix;
        else
            throw SchemaMismatch("signature " + s.id + ": unknown item_match " + im);

        std::string prov = require_string(j, "provenance");
        if (prov == "LEARNED_M1")
            s.origin = SignatureOrigin::LearnedM1;
        else if (prov == "FLAGGED_M2")
            s.origin = SignatureOrigin::FlaggedM2;
        else if (prov == "BUILTIN")
            s.origin = SignatureOrigin::Builtin;
        else
            throw SchemaMismatch("signature " + s.id + ": unknown provenance " + prov);

        std::string sev = require_string(j, "severity");
        if (sev == "BLOCKING")
            s.severity = Severity::Blocking;
        else if (sev == "MONITOR")
            s.severity = Severity::Monitor;
        else
            throw SchemaMismatch("signature " + s.id + ": unknown severity " + sev);

        s.description = j.value("description", "");
        if (!p.constrains_beyond_service())
            throw SchemaMismatch("signature " + s.id + ": must constrain at least one field beyond service");
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("signature: ") + e.what());
    }
    return s;
}

} // namespace mmsguard::json_codec
