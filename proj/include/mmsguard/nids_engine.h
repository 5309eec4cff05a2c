#ifndef MMSGUARD_NIDS_ENGINE_H
#define MMSGUARD_NIDS_ENGINE_H

#include "mmsguard/detector.h"
#include "mmsguard/rulegen.h"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmsguard {

struct FilterOptions
{
    // Drop frames whose MMS PDU fails to decode (sid 0) instead of passing them.
    bool fail_closed = false;
};

struct DroppedFrame
{
    std::size_t frame_index = 0;
    RawFrame frame;
    std::uint32_t sid = 0; // 0 for fail-closed drops
    std::optional<AttackPath> path;
};

struct RuleAlert
{
    Timestamp ts;
    std::uint32_t sid = 0;
    std::string msg;
    FlowKey flow;
    std::size_t frame_index = 0;
};

struct FilterStats
{
    std::size_t frames = 0;
    std::size_t records = 0;
    std::size_t decode_errors = 0;
    std::size_t undecodable_passed = 0;
};

struct FilterOutcome
{
    std::vector<RawFrame> passed; // input order preserved
    std::vector<std::size_t> passed_indices;
    std::vector<DroppedFrame> dropped; // ascending frame index
    std::vector<RuleAlert> alerts;     // ordered by (ts, frame index)
    FilterStats stats;
};

// Each record is matched against all rules; the smallest matching sid decides
// its action. A drop withholds the frame that completed the carrying PDU.
FilterOutcome filter(const std::vector<RawFrame>& frames, std::span<const NidsRule> rules,
                     const Baseline* baseline = nullptr, FilterOptions options = {});

void write_filtered(const FilterOutcome& outcome, const std::filesystem::path& path);

// One JSON object per line: {ts, sid, msg, src, dst}.
std::string alert_log_jsonl(const FilterOutcome& outcome);

} // namespace mmsguard

#endif
