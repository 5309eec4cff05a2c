#include "mmsguard/detector.h"
#include "mmsguard/error.h"

#include "json_codec.h"

#include <algorithm>
#include <sstream>

namespace mmsguard {

using json_codec::json;

std::size_t Detection::blocking_count() const
{
    return std::size_t(std::count_if(paths.begin(), paths.end(),
                                     [](const AttackPath& p) { return p.severity == Severity::Blocking; }));
}

AttackPath make_attack_path(const ExtractedRecord& r, const GgioMap& ggio_map, std::string signature_id,
                            Severity severity)
{
    AttackPath p;
    p.ts = r.ts;
    p.frame_index = r.frame_index;
    p.origin_ip = r.src_ip;
    p.target_ip = r.dst_ip;
    p.operation = r.service;
    p.domain_id = r.domain_id;
    p.item_id = r.item_id;
    if (auto node = ggio_node_of(r.item_id)) {
        if (auto it = ggio_map.find(*node); it != ggio_map.end())
            p.component = it->second;
    }
    p.signature_id = std::move(signature_id);
    p.severity = severity;
    return p;
}

Detection detect(std::span<const ExtractedRecord> records, const Baseline& baseline,
                 std::span<const AttackSignature> signatures)
{
    std::vector<const AttackSignature*> ordered;
    for (const auto& s : signatures)
        ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const AttackSignature* a, const AttackSignature* b) { return a->id < b->id; });

    Detection d;
    for (const auto& r : records) {
        ++d.stats.scanned;
        auto hit = std::find_if(ordered.begin(), ordered.end(),
                                [&](const AttackSignature* s) { return matches(*s, r); });
        if (hit != ordered.end()) {
            ++d.stats.matched;
            d.paths.push_back(make_attack_path(r, baseline.ggio_map, (*hit)->id, (*hit)->severity));
            continue;
        }
        if (r.service == Service::Read) {
            if (baseline.read_whitelist.contains(read_key(r))) {
                ++d.stats.whitelisted;
            } else {
                ++d.stats.novel;
                d.novel_candidates.push_back({r, "read pair unknown"});
            }
        } else if (r.service == Service::Write) {
            if (baseline.write_whitelist.contains(write_key(r))) {
                ++d.stats.whitelisted;
            } else {
                ++d.stats.novel;
                d.novel_candidates.push_back({r, "write tuple unknown"});
            }
        } else {
            ++d.stats.ignored;
        }
    }
    return d;
}

std::vector<AttackSignature> promote_novel(const Detection& d, const Baseline& baseline)
{
    std::set<WriteKey> writes;
    std::set<ReadKey> reads;
    for (const auto& n : d.novel_candidates) {
        if (n.record.service == Service::Write)
            writes.insert(write_key(n.record));
        else if (n.record.service == Service::Read)
            reads.insert(read_key(n.record));
    }
    return validate_and_sign(writes, reads, baseline.ggio_map, {}, SignatureOrigin::FlaggedM2).signatures;
}

namespace {

std::string text_line(const AttackPath& p)
{
    return p.ts.to_string() + " " + p.origin_ip.to_string() + " -> " + p.target_ip.to_string() + " [" +
           service_name(p.operation) + "] " + p.domain_id + "/" + p.item_id + " (" + p.component.value_or("-") +
           ") sig=" + p.signature_id;
}

json path_to_json(const AttackPath& p)
{
    return {
        {"ts", p.ts.to_string()},
        {"frame", p.frame_index},
        {"origin", p.origin_ip.to_string()},
        {"target", p.target_ip.to_string()},
        {"operation", service_tag(p.operation)},
        {"domain", p.domain_id},
        {"item", p.item_id},
        {"component", p.component ? json(*p.component) : json(nullptr)},
        {"signature", p.signature_id},
        {"severity", severity_name(p.severity)},
    };
}

AttackPath path_from_json(const json& j)
{
    using namespace json_codec;
    AttackPath p;
    auto ts = Timestamp::parse(require_string(j, "ts"));
    auto origin = Ipv4::parse(require_string(j, "origin"));
    auto target = Ipv4::parse(require_string(j, "target"));
    if (!ts || !origin || !target)
        throw SchemaMismatch("path: bad ts/origin/target");
    p.ts = *ts;
    p.origin_ip = *origin;
    p.target_ip = *target;
    p.frame_index = require(j, "frame").get<std::size_t>();
    p.operation = service_from_json(require(j, "operation"), "path");
    p.domain_id = require_string(j, "domain");
    p.item_id = require_string(j, "item");
    if (!require(j, "component").is_null())
        p.component = j["component"].get<std::string>();
    p.signature_id = require_string(j, "signature");
    std::string sev = require_string(j, "severity");
    if (sev != "BLOCKING" && sev != "MONITOR")
        throw SchemaMismatch("path: unknown severity " + sev);
    p.severity = sev == "BLOCKING" ? Severity::Blocking : Severity::Monitor;
    return p;
}

std::string csv_escape(const std::string& s)
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

} // namespace

std::string render_report(const Detection& d, ReportFormat format, bool color)
{
    std::ostringstream out;
    switch (format) {
    case ReportFormat::Text: {
        const auto& s = d.stats;
        out << "# detection: scanned=" << s.scanned << " matched=" << s.matched << " whitelisted=" << s.whitelisted
            << " novel=" << s.novel << " ignored=" << s.ignored << " blocking=" << d.blocking_count() << "\n";
        for (const auto& p : d.paths) {
            bool red = color && p.severity == Severity::Blocking;
            out << (red ? "\033[31m" : "") << text_line(p) << (red ? "\033[0m" : "") << "\n";
        }
        for (const auto& n : d.novel_candidates) {
            const auto& r = n.record;
            out << "# novel " << r.ts.to_string() << " " << r.src_ip.to_string() << " -> " << r.dst_ip.to_string()
                << " [" << service_name(r.service) << "] " << r.domain_id << "/" << r.item_id << ": " << n.reason
                << "\n";
        }
        break;
    }
    case ReportFormat::Csv:
        out << "ts,origin,target,service,domain,item,component,signature,severity\n";
        for (const auto& p : d.paths) {
            out << p.ts.to_string() << ',' << p.origin_ip.to_string() << ',' << p.target_ip.to_string() << ','
                << service_tag(p.operation) << ',' << csv_escape(p.domain_id) << ',' << csv_escape(p.item_id) << ','
                << csv_escape(p.component.value_or("")) << ',' << csv_escape(p.signature_id) << ','
                << severity_name(p.severity) << '\n';
        }
        break;
    case ReportFormat::Json: {
        json paths = json::array();
        for (const auto& p : d.paths)
            paths.push_back(path_to_json(p));
        json novel = json::array();
        for (const auto& n : d.novel_candidates)
            novel.push_back({{"record", json_codec::record_to_json(n.record)}, {"reason", n.reason}});
        json doc = {
            {"stats",
             {{"scanned", d.stats.scanned},
              {"matched", d.stats.matched},
              {"whitelisted", d.stats.whitelisted},
              {"novel", d.stats.novel},
              {"ignored", d.stats.ignored}}},
            {"paths", paths},
            {"novel", novel},
        };
        out << doc.dump(2) << "\n";
        break;
    }
    }
    return out.str();
}

Detection detection_from_json(std::string_view text)
{
    using namespace json_codec;
    json doc = parse_document(text, "detection");
    Detection d;
    try {
        const json& s = require(doc, "stats");
        d.stats.scanned = require(s, "scanned").get<std::size_t>();
        d.stats.matched = require(s, "matched").get<std::size_t>();
        d.stats.whitelisted = require(s, "whitelisted").get<std::size_t>();
        d.stats.novel = require(s, "novel").get<std::size_t>();
        d.stats.ignored = require(s, "ignored").get<std::size_t>();
        for (const auto& p : require(doc, "paths"))
            d.paths.push_back(path_from_json(p));
        for (const auto& n : require(doc, "novel"))
            d.novel_candidates.push_back({record_from_json(require(n, "record")), require_string(n, "reason")});
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("detection: ") + e.what());
    }
    return d;
}

} // namespace mmsguard
