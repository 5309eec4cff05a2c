#ifndef MMSGUARD_TRAFFIC_SYNTH_H
#define MMSGUARD_TRAFFIC_SYNTH_H

#include "mmsguard/baseline.h"
#include "mmsguard/field_extract.h"
#include "mmsguard/pcap_io.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmsguard {

enum class Fingerprint { Bean, Script };

std::string fingerprint_name(Fingerprint f);

struct Endpoints
{
    Ipv4 scada_ip;
    std::vector<Ipv4> plc_ips;
    std::vector<Ipv4> ied_ips;
    std::vector<Ipv4> attacker_ips;
};

// Periodic SCADA poll of one object. period 0 uses the scenario poll period.
struct ReadPlanEntry
{
    Ipv4 server;
    ReadKey key;
    double period = 0;
};

// SCADA Oper writes. Without a fixed quality each write draws one of the three
// SCADA timeAccuracy pairs.
struct WritePlanEntry
{
    Ipv4 target;
    std::string domain_id;
    std::string item_id;
    std::optional<TimeAccuracy> quality;
    std::size_t count = 1;
    double at = 0;      // seconds from scenario start
    double spacing = 1; // seconds between consecutive writes
};

struct AttackPlanEntry
{
    Fingerprint fingerprint = Fingerprint::Bean;
    Ipv4 attacker;
    Ipv4 target;
    std::string domain_id;
    std::string item_id;
    std::size_t count = 1;
    double at = 0;
    double spacing = 1;
};

// Attacker reads probing the data model.
struct ReconPlanEntry
{
    Ipv4 attacker;
    Ipv4 target;
    std::vector<ReadKey> keys;
    double at = 0;
};

// Datasets under LLN0 of one logical device, each listing its GGIO nodes.
struct DatasetDecl
{
    Ipv4 server;
    std::string domain_id;
    std::map<std::string, std::vector<std::string>> datasets;
};

struct ScenarioConfig
{
    Timestamp start{1714521600, 0};
    double duration = 60;
    Endpoints endpoints;
    double poll_period = 5;
    std::vector<ReadPlanEntry> read_plan;
    std::vector<WritePlanEntry> write_plan;
    std::vector<AttackPlanEntry> attack_plan;
    std::vector<ReconPlanEntry> recon_plan;
    DatasetDecl dataset_decl;
    std::uint64_t seed = 1;
    double jitter = 0.05; // fraction of the poll period, applied symmetrically
    bool associate = true; // TCP handshake plus MMS Initiate on every connection
};

enum class FrameKind {
    BenignRead,
    BenignWrite,
    AttackBean,
    AttackScript,
    AttackRecon,
    Directory,
    Response,
    Association,
};

std::string frame_kind_name(FrameKind k);
std::optional<FrameKind> frame_kind_from_name(std::string_view name);

struct FrameLabel
{
    std::size_t frame_index = 0;
    FrameKind kind = FrameKind::BenignRead;

    bool operator==(const FrameLabel&) const = default;
};

struct Manifest
{
    std::uint64_t seed = 0;
    std::vector<FrameLabel> labels;          // one per frame, ascending index
    std::vector<ExtractedRecord> records;    // expected extraction output, in order
    std::map<std::string, std::string> ggio_map; // GGIO node -> dataset

    std::size_t count(FrameKind k) const;
    std::vector<std::size_t> frames_of(FrameKind k) const;
    std::vector<std::size_t> attack_frames() const; // ATTACK_BEAN and ATTACK_SCRIPT

    bool operator==(const Manifest&) const = default;
};

struct Synthesis
{
    std::vector<RawFrame> frames;
    Manifest manifest;
};

// Throws InvalidConfig naming the offending field.
void validate(const ScenarioConfig& config);
Synthesis synthesize(const ScenarioConfig& config);

// scenario1_scaled, bean_attack, script_attack, mixed. Throws UnknownPreset.
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

// Testbed addresses and object names shared by the presets.
namespace testbed {
inline const Ipv4 kScadaIp{0xac12053c};     // 172.18.5.60
inline const Ipv4 kSmartHomePlc{0xac100329}; // 172.16.3.41
inline const Ipv4 kBeanAttacker{0xac1004c9}; // 172.16.4.201
inline const Ipv4 kScriptAttacker{0xac100567}; // 172.16.5.103
inline constexpr const char* kWagoDomain = "WAGO61850ServerLogicalDevice";
inline constexpr const char* kBreakerItem = "GGIO12$CO$SPCSO$Oper";
} // namespace testbed

constexpr int kScenarioVersion = 1;
std::string config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(std::string_view text); // InvalidConfig / SchemaMismatch
std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(std::string_view text);

} // namespace mmsguard

#endif
