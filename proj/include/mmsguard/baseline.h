#ifndef MMSGUARD_BASELINE_H
#define MMSGUARD_BASELINE_H

#include "mmsguard/field_extract.h"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmsguard {

struct ReadKey
{
    std::string domain_id;
    std::string item_id;

    auto operator<=>(const ReadKey&) const = default;
};

// time_acc is absent for writes whose Data is not an Oper structure.
struct WriteKey
{
    std::string domain_id;
    std::string item_id;
    std::optional<TimeAccuracy> time_acc;
    std::string or_ident; // canonical form, see canonical_or_ident()

    auto operator<=>(const WriteKey&) const = default;
};

ReadKey read_key(const ExtractedRecord& r);
WriteKey write_key(const ExtractedRecord& r);

using GgioMap = std::map<std::string, std::string>; // GGIO node -> dataset short name

struct BaselineProvenance
{
    std::vector<std::string> sources;
    std::string learned_at; // capture time of the last learned record

    bool operator==(const BaselineProvenance&) const = default;
};

struct Baseline
{
    std::set<ReadKey> read_whitelist;
    std::set<WriteKey> write_whitelist;
    GgioMap ggio_map;
    BaselineProvenance provenance;

    bool operator==(const Baseline&) const = default;
};

// Logical node name ahead of the first '$' when it is a GGIO node
// ("GGIO12$CO$SPCSO$Oper" -> "GGIO12", "BI6GGIO1$ST$Health" -> "BI6GGIO1").
std::optional<std::string> ggio_node_of(std::string_view item_id);

struct GgioMapResult
{
    GgioMap map;
    std::size_t directory_requests = 0;
    std::size_t unmatched_responses = 0;
};

// Pairs GetNamedVariableListAttributes requests with their responses on the
// reverse flow by invokeID.
GgioMapResult build_ggio_map(const std::vector<DecodedPdu>& pdus);

// Throws EmptyBenign when records hold no MMS requests.
Baseline learn(std::span<const ExtractedRecord> records, GgioMap ggio_map = {}, std::vector<std::string> sources = {});

// New whitelist keys contributed by each consecutive window of records.
std::vector<std::size_t> whitelist_growth(std::span<const ExtractedRecord> records, std::size_t window = 1000);

struct DiffResult
{
    std::set<ReadKey> potential_read;
    std::set<WriteKey> potential_write;

    bool operator==(const DiffResult&) const = default;
};

DiffResult diff(const Baseline& baseline, std::span<const ExtractedRecord> attack_records);

enum class OrIdentForm { Absent, AllZero64, Exact, Any };
enum class ItemMatch { Exact, Prefix };
enum class SignatureOrigin { LearnedM1, FlaggedM2, Builtin };
enum class Severity { Blocking, Monitor };

std::string or_ident_form_name(OrIdentForm f);
std::string origin_name(SignatureOrigin o);
std::string severity_name(Severity s);

// Conjunction over the present constraints. Shared by signatures and rules.
struct FieldPredicate
{
    Service service = Service::Write;
    std::optional<TimeAccuracy> time_acc;
    OrIdentForm or_ident_form = OrIdentForm::Any;
    Bytes or_ident; // compared when or_ident_form == Exact
    std::optional<std::string> domain;
    std::optional<std::string> item;
    ItemMatch item_match = ItemMatch::Exact;

    bool operator==(const FieldPredicate&) const = default;

    bool constrains_beyond_service() const
    {
        return time_acc || or_ident_form != OrIdentForm::Any || domain || item;
    }
};

bool matches(const FieldPredicate& p, const ExtractedRecord& r);

struct AttackSignature
{
    std::string id;
    FieldPredicate predicate;
    SignatureOrigin origin = SignatureOrigin::LearnedM1;
    Severity severity = Severity::Blocking;
    std::string description;

    bool operator==(const AttackSignature&) const = default;
};

inline bool matches(const AttackSignature& s, const ExtractedRecord& r)
{
    return matches(s.predicate, r);
}

struct DiscardedKey
{
    WriteKey key;
    std::string reason;
};

struct SignResult
{
    std::vector<AttackSignature> signatures; // sorted by id
    std::vector<DiscardedKey> discarded;
};

// Promotes potential write keys that target a substation component to
// blocking signatures and turns potential read keys into monitor-only
// signatures. When benign records are supplied, a generalized write
// signature that would match any of them is narrowed to its exact
// domain/item.
SignResult validate_and_sign(const std::set<WriteKey>& potential_write, const std::set<ReadKey>& potential_read,
                             const GgioMap& ggio_map, std::span<const ExtractedRecord> benign = {},
                             SignatureOrigin origin = SignatureOrigin::LearnedM1);

// The two published tool fingerprints (iec61850bean, libiec61850 script).
std::vector<AttackSignature> builtin_signatures();

constexpr int kBaselineVersion = 1;

std::string baseline_to_json(const Baseline& b);
Baseline baseline_from_json(std::string_view text); // SchemaMismatch on version conflict
void save_baseline(const std::filesystem::path& path, const Baseline& b);
Baseline load_baseline(const std::filesystem::path& path);

std::string signatures_to_json(const std::vector<AttackSignature>& sigs);
std::vector<AttackSignature> signatures_from_json(std::string_view text);
void save_signatures(const std::filesystem::path& path, const std::vector<AttackSignature>& sigs);
std::vector<AttackSignature> load_signatures(const std::filesystem::path& path);

} // namespace mmsguard

#endif
