#ifndef MMSGUARD_RULEGEN_H
#define MMSGUARD_RULEGEN_H

#include "mmsguard/baseline.h"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmsguard {

enum class RuleAction { Drop, Alert };

// Declarative match/action record. Protocol and port are fixed (tcp/102).
struct NidsRule
{
    static constexpr const char* kProto = "tcp";
    static constexpr std::uint16_t kDstPort = 102;

    std::uint32_t sid = 0;
    RuleAction action = RuleAction::Alert;
    FieldPredicate match;
    std::string msg;
    int rev = 1;

    bool operator==(const NidsRule&) const = default;
};

constexpr std::uint32_t kMinSidBase = 1000000;

// One rule per signature, ordered by signature id, sids sequential from
// sid_base. BLOCKING signatures compile to drop, MONITOR to alert.
// Throws DuplicateSignatureId.
std::vector<NidsRule> compile(std::span<const AttackSignature> signatures, std::uint32_t sid_base = kMinSidBase);

inline bool rule_matches(const NidsRule& rule, const ExtractedRecord& r)
{
    return matches(rule.match, r);
}

// Line grammar:
//   RULE <sid> <drop|alert> service=<int> [acc=<0xhh>,<0xhh>]
//        [orident=<absent|zero64|hex:..|any>] [domain="..."]
//        [item="..."|item_prefix="..."] [rev=<int>] msg="..."
// '#' starts a comment line.
std::string emit_dsl(std::span<const NidsRule> rules);
std::vector<NidsRule> parse_dsl(std::string_view text); // throws ParseError

// Best-effort byte-pattern rules for generic NIDS engines.
std::string export_suricata_like(std::span<const NidsRule> rules);

} // namespace mmsguard

#endif
