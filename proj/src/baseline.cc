#include "mmsguard/baseline.h"
#include "mmsguard/error.h"
#include "mmsguard/file_util.h"

#include "json_codec.h"

#include <algorithm>
#include <cstdio>

namespace mmsguard {

using json_codec::json;

ReadKey read_key(const ExtractedRecord& r)
{
    return ReadKey{r.domain_id, r.item_id};
}

WriteKey write_key(const ExtractedRecord& r)
{
    return WriteKey{r.domain_id, r.item_id, r.time_acc, canonical_or_ident(r.or_ident)};
}

std::optional<std::string> ggio_node_of(std::string_view item_id)
{
    auto node = item_id.substr(0, item_id.find('$'));
    if (node.find("GGIO") == std::string_view::npos)
        return std::nullopt;
    return std::string(node);
}

GgioMapResult build_ggio_map(const std::vector<DecodedPdu>& pdus)
{
    GgioMapResult result;
    // (request flow, invokeID) -> dataset short name
    std::map<std::pair<FlowKey, std::uint32_t>, std::string> pending;

    for (const auto& pdu : pdus) {
        const MmsMessage& m = pdu.msg;
        if (m.service != Service::GetNamedVariableListAttributes || !m.invoke_id)
            continue;
        if (m.kind == PduKind::ConfirmedRequest && m.target) {
            ++result.directory_requests;
            std::string name = m.target->item_id;
            auto sep = name.rfind('$');
            pending[{pdu.flow, *m.invoke_id}] = sep == std::string::npos ? name : name.substr(sep + 1);
        } else if (m.kind == PduKind::ConfirmedResponse) {
            auto it = pending.find({pdu.flow.reversed(), *m.invoke_id});
            if (it == pending.end()) {
                ++result.unmatched_responses;
                continue;
            }
            std::vector<ObjectName> members;
            try {
                members = decode_dataset_members(m.response_payload);
            } catch (const MalformedTlv&) {
                ++result.unmatched_responses;
                pending.erase(it);
                continue;
            }
            for (const auto& member : members)
                if (auto node = ggio_node_of(member.item_id))
                    result.map[*node] = it->second;
            pending.erase(it);
        }
    }
    return result;
}

Baseline learn(std::span<const ExtractedRecord> records, GgioMap ggio_map, std::vector<std::string> sources)
{
    if (records.empty())
        throw EmptyBenign("benign traffic contains no MMS requests; refusing to emit a baseline");

    Baseline b;
    for (const auto& r : records) {
        if (r.service == Service::Read)
            b.read_whitelist.insert(read_key(r));
        else if (r.service == Service::Write)
            b.write_whitelist.insert(write_key(r));
    }
    b.ggio_map = std::move(ggio_map);
    b.provenance.sources = std::move(sources);
    Timestamp last{};
    for (const auto& r : records)
        last = std::max(last, r.ts);
    b.provenance.learned_at = last.to_string();
    return b;
}

std::vector<std::size_t> whitelist_growth(std::span<const ExtractedRecord> records, std::size_t window)
{
    std::vector<std::size_t> growth;
    if (window == 0)
        return growth;
    std::set<ReadKey> reads;
    std::set<WriteKey> writes;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i % window == 0)
            growth.push_back(0);
        const auto& r = records[i];
        bool fresh = false;
        if (r.service == Service::Read)
            fresh = reads.insert(read_key(r)).second;
        else if (r.service == Service::Write)
            fresh = writes.insert(write_key(r)).second;
        if (fresh)
            ++growth.back();
    }
    return growth;
}

DiffResult diff(const Baseline& baseline, std::span<const ExtractedRecord> attack_records)
{
    DiffResult d;
    for (const auto& r : attack_records) {
        if (r.service == Service::Read) {
            auto k = read_key(r);
            if (!baseline.read_whitelist.contains(k))
                d.potential_read.insert(std::move(k));
        } else if (r.service == Service::Write) {
            auto k = write_key(r);
            if (!baseline.write_whitelist.contains(k))
                d.potential_write.insert(std::move(k));
        }
    }
    return d;
}

std::string or_ident_form_name(OrIdentForm f)
{
    switch (f) {
    case OrIdentForm::Absent: return "ABSENT";
    case OrIdentForm::AllZero64: return "ALL_ZERO_64";
    case OrIdentForm::Exact: return "EXACT";
    case OrIdentForm::Any: return "ANY";
    }
    return "ANY";
}

std::string origin_name(SignatureOrigin o)
{
    switch (o) {
    case SignatureOrigin::LearnedM1: return "LEARNED_M1";
    case SignatureOrigin::FlaggedM2: return "FLAGGED_M2";
    case SignatureOrigin::Builtin: return "BUILTIN";
    }
    return "BUILTIN";
}

std::string severity_name(Severity s)
{
    return s == Severity::Blocking ? "BLOCKING" : "MONITOR";
}

static bool is_all_zero_64(const Bytes& b)
{
    return b.size() == 64 && std::all_of(b.begin(), b.end(), [](std::uint8_t x) { return x == 0; });
}

bool matches(const FieldPredicate& p, const ExtractedRecord& r)
{
    if (r.service != p.service)
        return false;
    if (p.time_acc && r.time_acc != p.time_acc)
        return false;
    switch (p.or_ident_form) {
    case OrIdentForm::Any: break;
    case OrIdentForm::Absent:
        if (r.or_ident)
            return false;
        break;
    case OrIdentForm::AllZero64:
        if (!r.or_ident || !is_all_zero_64(*r.or_ident))
            return false;
        break;
    case OrIdentForm::Exact:
        if (!r.or_ident || *r.or_ident != p.or_ident)
            return false;
        break;
    }
    if (p.domain && r.domain_id != *p.domain)
        return false;
    if (p.item) {
        if (p.item_match == ItemMatch::Exact ? r.item_id != *p.item : !r.item_id.starts_with(*p.item))
            return false;
    }
    return true;
}

namespace {

std::uint32_t fnv1a(std::string_view s)
{
    std::uint32_t h = 2166136261u;
    for (unsigned char c : s) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::string acc_token(const std::optional<TimeAccuracy>& acc)
{
    if (!acc)
        return "noacc";
    std::uint8_t b[2] = {acc->oper_tm, acc->t};
    return "acc" + to_hex(ByteView(b, 2));
}

void set_or_ident(FieldPredicate& p, const std::string& canonical, std::string& token)
{
    if (canonical == kOrIdentAbsent) {
        p.or_ident_form = OrIdentForm::Absent;
        token = "absent";
        return;
    }
    Bytes bytes;
    if (canonical != kOrIdentEmpty)
        bytes = from_hex(canonical).value_or(Bytes{});
    if (is_all_zero_64(bytes)) {
        p.or_ident_form = OrIdentForm::AllZero64;
        token = "zero64";
        return;
    }
    p.or_ident_form = OrIdentForm::Exact;
    p.or_ident = bytes;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", fnv1a(canonical));
    token = bytes.empty() ? "empty" : std::string("exact-") + buf;
}

std::string describe_write(const FieldPredicate& p)
{
    std::string d = "write fingerprint:";
    if (p.time_acc)
        d += " timeAccuracy " + hex_byte(p.time_acc->oper_tm) + "," + hex_byte(p.time_acc->t);
    else
        d += " non-Oper write";
    d += " orIdent " + or_ident_form_name(p.or_ident_form);
    if (p.item)
        d += " on " + p.domain.value_or("") + "/" + *p.item;
    return d;
}

} // namespace

SignResult validate_and_sign(const std::set<WriteKey>& potential_write, const std::set<ReadKey>& potential_read,
                             const GgioMap& ggio_map, std::span<const ExtractedRecord> benign,
                             SignatureOrigin origin)
{
    const std::string prefix = origin == SignatureOrigin::FlaggedM2 ? "m2-" : "m1-";
    std::map<std::string, AttackSignature> by_id;
    SignResult result;

    for (const auto& key : potential_write) {
        auto node = ggio_node_of(key.item_id);
        bool component = (node && ggio_map.contains(*node)) || key.item_id.find("$CO$") != std::string::npos;
        if (!component) {
            result.discarded.push_back({key, "item names no mapped GGIO node and no $CO$ control object"});
            continue;
        }

        AttackSignature sig;
        sig.origin = origin;
        sig.severity = Severity::Blocking;
        sig.predicate.service = Service::Write;
        sig.predicate.time_acc = key.time_acc;
        std::string form_token;
        set_or_ident(sig.predicate, key.or_ident, form_token);
        sig.id = prefix + "write-" + acc_token(key.time_acc) + "-" + form_token;

        // Non-Oper writes carry no fingerprint; they stay bound to their object.
        bool narrow = !key.time_acc;
        if (!narrow)
            narrow = std::any_of(benign.begin(), benign.end(),
                                 [&](const ExtractedRecord& r) { return matches(sig.predicate, r); });
        if (narrow) {
            sig.predicate.domain = key.domain_id;
            sig.predicate.item = key.item_id;
            sig.id += "@" + key.domain_id + "/" + key.item_id;
        }
        sig.description = describe_write(sig.predicate);
        by_id.try_emplace(sig.id, std::move(sig));
    }

    for (const auto& key : potential_read) {
        AttackSignature sig;
        sig.id = prefix + "read@" + key.domain_id + "/" + key.item_id;
        sig.origin = origin;
        sig.severity = Severity::Monitor;
        sig.predicate.service = Service::Read;
        sig.predicate.domain = key.domain_id;
        sig.predicate.item = key.item_id;
        sig.description = "reconnaissance: read of non-whitelisted pair " + key.domain_id + "/" + key.item_id;
        by_id.try_emplace(sig.id, std::move(sig));
    }

    for (auto& [id, sig] : by_id)
        result.signatures.push_back(std::move(sig));
    return result;
}

std::vector<AttackSignature> builtin_signatures()
{
    AttackSignature bean;
    bean.id = "builtin-iec61850bean";
    bean.origin = SignatureOrigin::Builtin;
    bean.severity = Severity::Blocking;
    bean.predicate.service = Service::Write;
    bean.predicate.time_acc = TimeAccuracy{0x0a, 0x0a};
    bean.predicate.or_ident_form = OrIdentForm::AllZero64;
    bean.description = "iec61850bean write: timeAccuracy 0x0a,0x0a with 64 zero-byte orIdent";

    AttackSignature script;
    script.id = "builtin-libiec61850-script";
    script.origin = SignatureOrigin::Builtin;
    script.severity = Severity::Blocking;
    script.predicate.service = Service::Write;
    script.predicate.time_acc = TimeAccuracy{0x0a, 0x00};
    script.predicate.or_ident_form = OrIdentForm::Absent;
    script.description = "libiec61850 script write: timeAccuracy 0x0a,0x00 with orIdent missing";

    return {bean, script};
}

std::string baseline_to_json(const Baseline& b)
{
    json reads = json::array();
    for (const auto& k : b.read_whitelist)
        reads.push_back({k.domain_id, k.item_id});
    json writes = json::array();
    for (const auto& k : b.write_whitelist) {
        json acc1 = nullptr, acc2 = nullptr;
        if (k.time_acc) {
            acc1 = hex_byte(k.time_acc->oper_tm);
            acc2 = hex_byte(k.time_acc->t);
        }
        writes.push_back({k.domain_id, k.item_id, acc1, acc2, k.or_ident});
    }
    json doc = {
        {"version", kBaselineVersion},
        {"read_whitelist", reads},
        {"write_whitelist", writes},
        {"ggio_map", b.ggio_map},
        {"provenance", {{"sources", b.provenance.sources}, {"learned_at", b.provenance.learned_at}}},
    };
    return doc.dump(2) + "\n";
}

Baseline baseline_from_json(std::string_view text)
{
    using namespace json_codec;
    json doc = parse_document(text, "baseline");
    if (!doc.is_object())
        throw SchemaMismatch("baseline: top level must be an object");
    const json& version = require(doc, "version");
    if (!version.is_number_integer() || version.get<int>() != kBaselineVersion)
        throw SchemaMismatch("baseline: unsupported version " + version.dump() + " (expected " +
                             std::to_string(kBaselineVersion) + ")");

    Baseline b;
    try {
        for (const auto& e : require(doc, "read_whitelist")) {
            if (!e.is_array() || e.size() != 2)
                throw SchemaMismatch("baseline: read_whitelist entries are [domain, item]");
            b.read_whitelist.insert({e[0].get<std::string>(), e[1].get<std::string>()});
        }
        for (const auto& e : require(doc, "write_whitelist")) {
            if (!e.is_array() || e.size() != 5)
                throw SchemaMismatch("baseline: write_whitelist entries are [domain, item, acc1, acc2, orident]");
            WriteKey k{e[0].get<std::string>(), e[1].get<std::string>(), std::nullopt, e[4].get<std::string>()};
            if (!e[2].is_null() || !e[3].is_null())
                k.time_acc = time_acc_from_json(json::array({e[2], e[3]}), "baseline: write_whitelist acc");
            b.write_whitelist.insert(std::move(k));
        }
        b.ggio_map = require(doc, "ggio_map").get<GgioMap>();
        if (doc.contains("provenance")) {
            const json& p = doc["provenance"];
            if (p.contains("sources"))
                b.provenance.sources = p["sources"].get<std::vector<std::string>>();
            if (p.contains("learned_at"))
                b.provenance.learned_at = p["learned_at"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("baseline: ") + e.what());
    }
    return b;
}

void save_baseline(const std::filesystem::path& path, const Baseline& b)
{
    write_file_atomic(path, baseline_to_json(b));
}

Baseline load_baseline(const std::filesystem::path& path)
{
    return baseline_from_json(read_text_file(path));
}

std::string signatures_to_json(const std::vector<AttackSignature>& sigs)
{
    json arr = json::array();
    for (const auto& s : sigs)
        arr.push_back(json_codec::signature_to_json(s));
    return arr.dump(2) + "\n";
}

std::vector<AttackSignature> signatures_from_json(std::string_view text)
{
    json doc = json_codec::parse_document(text, "signatures");
    if (!doc.is_array())
        throw SchemaMismatch("signatures: top level must be an array");
    std::vector<AttackSignature> out;
    for (const auto& j : doc)
        out.push_back(json_codec::signature_from_json(j));
    return out;
}

void save_signatures(const std::filesystem::path& path, const std::vector<AttackSignature>& sigs)
{
    write_file_atomic(path, signatures_to_json(sigs));
}

std::vector<AttackSignature> load_signatures(const std::filesystem::path& path)
{
    return signatures_from_json(read_text_file(path));
}

} // namespace mmsguard
