#ifndef MMSGUARD_DETECTOR_H
#define MMSGUARD_DETECTOR_H

#include "mmsguard/baseline.h"

#include <string>
#include <vector>

namespace mmsguard {

// Origin -> target -> operation -> object -> component for one malicious request.
struct AttackPath
{
    Timestamp ts;
    std::size_t frame_index = 0;
    Ipv4 origin_ip;
    Ipv4 target_ip;
    Service operation = Service::Write;
    std::string domain_id;
    std::string item_id;
    std::optional<std::string> component; // dataset of the item's GGIO node
    std::string signature_id;
    Severity severity = Severity::Blocking;

    bool operator==(const AttackPath&) const = default;
};

AttackPath make_attack_path(const ExtractedRecord& r, const GgioMap& ggio_map, std::string signature_id,
                            Severity severity);

struct NovelCandidate
{
    ExtractedRecord record;
    std::string reason;

    bool operator==(const NovelCandidate&) const = default;
};

struct DetectionStats
{
    std::size_t scanned = 0;
    std::size_t matched = 0;
    std::size_t whitelisted = 0;
    std::size_t novel = 0;
    std::size_t ignored = 0;

    bool operator==(const DetectionStats&) const = default;
};

struct Detection
{
    std::vector<AttackPath> paths;
    std::vector<NovelCandidate> novel_candidates;
    DetectionStats stats;

    bool operator==(const Detection&) const = default;

    std::size_t blocking_count() const;
};

// Signature match takes precedence over whitelist membership; among several
// matching signatures the lexicographically smallest id wins.
Detection detect(std::span<const ExtractedRecord> records, const Baseline& baseline,
                 std::span<const AttackSignature> signatures);

// Turns novel candidates into FLAGGED_M2 signatures for analyst-approved promotion.
std::vector<AttackSignature> promote_novel(const Detection& d, const Baseline& baseline);

enum class ReportFormat { Text, Csv, Json };

std::string render_report(const Detection& d, ReportFormat format, bool color = false);
Detection detection_from_json(std::string_view text);

} // namespace mmsguard

#endif
