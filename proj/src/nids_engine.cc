#include "mmsguard/nids_engine.h"
#include "mmsguard/error.h"
#include "mmsguard/field_extract.h"
#include "mmsguard/file_util.h"

#include <json.hpp>

#include <algorithm>
#include <map>

namespace mmsguard {

namespace {

const NidsRule* first_match(std::span<const NidsRule* const> by_sid, const ExtractedRecord& r)
{
    for (const NidsRule* rule : by_sid)
        if (rule_matches(*rule, r))
            return rule;
    return nullptr;
}

} // namespace

FilterOutcome filter(const std::vector<RawFrame>& frames, std::span<const NidsRule> rules,
                     const Baseline* baseline, FilterOptions options)
{
    FilterOutcome out;
    out.stats.frames = frames.size();

    std::vector<const NidsRule*> by_sid;
    for (const auto& r : rules)
        by_sid.push_back(&r);
    std::sort(by_sid.begin(), by_sid.end(), [](const NidsRule* a, const NidsRule* b) { return a->sid < b->sid; });

    static const GgioMap kNoMap;
    const GgioMap& ggio = baseline ? baseline->ggio_map : kNoMap;

    std::map<std::size_t, DroppedFrame> drops;
    CaptureDecode decoded = decode_capture(frames);
    out.stats.decode_errors = decoded.failures.size();

    if (!by_sid.empty()) {
        for (const auto& pdu : decoded.pdus) {
            for (const auto& rec : records_from_pdu(pdu)) {
                ++out.stats.records;
                const NidsRule* rule = first_match(by_sid, rec);
                if (!rule)
                    continue;
                if (rule->action == RuleAction::Alert) {
                    out.alerts.push_back({rec.ts, rule->sid, rule->msg, pdu.flow, rec.frame_index});
                    continue;
                }
                auto it = drops.find(rec.frame_index);
                if (it == drops.end() || rule->sid < it->second.sid) {
                    DroppedFrame d;
                    d.frame_index = rec.frame_index;
                    d.sid = rule->sid;
                    d.path = make_attack_path(rec, ggio, "sid:" + std::to_string(rule->sid), Severity::Blocking);
                    drops[rec.frame_index] = std::move(d);
                }
            }
        }
    }

    for (const auto& f : decoded.failures) {
        if (options.fail_closed) {
            if (!drops.contains(f.frame_index))
                drops[f.frame_index] = DroppedFrame{f.frame_index, {}, 0, std::nullopt};
        } else {
            ++out.stats.undecodable_passed;
        }
    }

    for (std::size_t i = 0; i < frames.size(); ++i) {
        auto it = drops.find(i);
        if (it == drops.end()) {
            out.passed.push_back(frames[i]);
            out.passed_indices.push_back(i);
        } else {
            it->second.frame = frames[i];
            out.dropped.push_back(std::move(it->second));
        }
    }
    std::stable_sort(out.alerts.begin(), out.alerts.end(), [](const RuleAlert& a, const RuleAlert& b) {
        return std::tie(a.ts, a.frame_index) < std::tie(b.ts, b.frame_index);
    });
    return out;
}

void write_filtered(const FilterOutcome& outcome, const std::filesystem::path& path)
{
    Bytes data = serialize_pcap(outcome.passed);
    write_file_atomic(path, ByteView(data));
}

std::string alert_log_jsonl(const FilterOutcome& outcome)
{
    std::string out;
    for (const auto& a : outcome.alerts) {
        nlohmann::ordered_json j;
        j["ts"] = a.ts.to_string();
        j["sid"] = a.sid;
        j["msg"] = a.msg;
        j["src"] = a.flow.src_ip.to_string();
        j["dst"] = a.flow.dst_ip.to_string();
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace mmsguard
