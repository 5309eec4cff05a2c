#include "mmsguard/traffic_synth.h"
#include "mmsguard/envelope.h"
#include "mmsguard/error.h"
#include "json_codec.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

namespace mmsguard {

std::string fingerprint_name(Fingerprint f)
{
    return f == Fingerprint::Bean ? "BEAN" : "SCRIPT";
}

namespace {

constexpr std::pair<FrameKind, const char*> kKindNames[] = {
    {FrameKind::BenignRead, "BENIGN_READ"},   {FrameKind::BenignWrite, "BENIGN_WRITE"},
    {FrameKind::AttackBean, "ATTACK_BEAN"},   {FrameKind::AttackScript, "ATTACK_SCRIPT"},
    {FrameKind::AttackRecon, "ATTACK_RECON"}, {FrameKind::Directory, "DIRECTORY"},
    {FrameKind::Response, "RESPONSE"},        {FrameKind::Association, "ASSOCIATION"},
};

} // namespace

std::string frame_kind_name(FrameKind k)
{
    for (auto [kind, name] : kKindNames)
        if (kind == k)
            return name;
    return "UNKNOWN";
}

std::optional<FrameKind> frame_kind_from_name(std::string_view name)
{
    for (auto [kind, n] : kKindNames)
        if (name == n)
            return kind;
    return std::nullopt;
}

std::size_t Manifest::count(FrameKind k) const
{
    return std::size_t(std::count_if(labels.begin(), labels.end(), [k](const FrameLabel& l) { return l.kind == k; }));
}

std::vector<std::size_t> Manifest::frames_of(FrameKind k) const
{
    std::vector<std::size_t> out;
    for (const auto& l : labels)
        if (l.kind == k)
            out.push_back(l.frame_index);
    return out;
}

std::vector<std::size_t> Manifest::attack_frames() const
{
    std::vector<std::size_t> out;
    for (const auto& l : labels)
        if (l.kind == FrameKind::AttackBean || l.kind == FrameKind::AttackScript)
            out.push_back(l.frame_index);
    return out;
}

// ---------------------------------------------------------------- validation

namespace {

constexpr std::size_t kMaxRequests = 5'000'000;

std::string idx(const char* list, std::size_t i)
{
    return std::string(list) + "[" + std::to_string(i) + "]";
}

void check_identifier(const std::string& field, const std::string& value)
{
    if (!is_identifier(value))
        throw InvalidConfig(field, "\"" + value + "\" is not a valid MMS identifier");
}

void check_window(const std::string& field, double at, double spacing, std::size_t count, double duration)
{
    if (!std::isfinite(at) || at < 0)
        throw InvalidConfig(field + ".at", "must be a non-negative number of seconds");
    if (!std::isfinite(spacing) || spacing < 0)
        throw InvalidConfig(field + ".spacing", "must be a non-negative number of seconds");
    if (count > kMaxRequests)
        throw InvalidConfig(field + ".count", "exceeds " + std::to_string(kMaxRequests));
    if (count > 0 && at + spacing * double(count - 1) > duration)
        throw InvalidConfig(field + ".at", "schedule ends after the scenario duration");
}

bool contains(const std::vector<Ipv4>& v, Ipv4 ip)
{
    return std::find(v.begin(), v.end(), ip) != v.end();
}

std::size_t polls(double duration, double period)
{
    return std::size_t(std::ceil(duration / period));
}

} // namespace

void validate(const ScenarioConfig& c)
{
    if (!std::isfinite(c.duration) || c.duration <= 0)
        throw InvalidConfig("duration", "must be positive");
    if (!std::isfinite(c.poll_period) || c.poll_period <= 0)
        throw InvalidConfig("poll_period", "must be positive");
    if (!std::isfinite(c.jitter) || c.jitter < 0 || c.jitter >= 0.5)
        throw InvalidConfig("jitter", "must lie in [0, 0.5)");

    const auto& ep = c.endpoints;
    for (std::size_t i = 0; i < ep.attacker_ips.size(); ++i)
        if (ep.attacker_ips[i] == ep.scada_ip)
            throw InvalidConfig(idx("endpoints.attacker_ips", i), "attacker address equals the SCADA address");

    std::size_t total = 0;
    for (std::size_t i = 0; i < c.read_plan.size(); ++i) {
        const auto& r = c.read_plan[i];
        std::string f = idx("read_plan", i);
        check_identifier(f + ".domain", r.key.domain_id);
        check_identifier(f + ".item", r.key.item_id);
        if (!std::isfinite(r.period) || r.period < 0)
            throw InvalidConfig(f + ".period", "must be non-negative");
        total += polls(c.duration, r.period > 0 ? r.period : c.poll_period);
        if (total > kMaxRequests)
            throw InvalidConfig(f + ".period", "scenario exceeds " + std::to_string(kMaxRequests) + " requests");
    }
    for (std::size_t i = 0; i < c.write_plan.size(); ++i) {
        const auto& w = c.write_plan[i];
        std::string f = idx("write_plan", i);
        check_identifier(f + ".domain", w.domain_id);
        check_identifier(f + ".item", w.item_id);
        check_window(f, w.at, w.spacing, w.count, c.duration);
    }

    std::set<std::string> declared;
    const auto& dd = c.dataset_decl;
    if (!dd.datasets.empty())
        check_identifier("dataset_decl.domain", dd.domain_id);
    for (const auto& [name, nodes] : dd.datasets) {
        std::string f = "dataset_decl.datasets." + name;
        check_identifier(f, "LLN0$" + name);
        if (name.find('$') != std::string::npos)
            throw InvalidConfig(f, "dataset name must not contain '$'");
        for (const auto& node : nodes) {
            if (!ggio_node_of(node) || node.find('$') != std::string::npos)
                throw InvalidConfig(f, "\"" + node + "\" is not a GGIO node name");
            if (!declared.insert(node).second)
                throw InvalidConfig(f, node + " is declared in more than one dataset");
        }
    }

    for (std::size_t i = 0; i < c.attack_plan.size(); ++i) {
        const auto& a = c.attack_plan[i];
        std::string f = idx("attack_plan", i);
        if (!contains(ep.attacker_ips, a.attacker))
            throw InvalidConfig(f + ".attacker", a.attacker.to_string() + " is not listed in endpoints.attacker_ips");
        check_identifier(f + ".domain", a.domain_id);
        check_identifier(f + ".item", a.item_id);
        auto node = ggio_node_of(a.item_id);
        if (!node || !declared.contains(*node))
            throw InvalidConfig(f + ".item", "GGIO node of \"" + a.item_id + "\" is not declared in dataset_decl");
        check_window(f, a.at, a.spacing, a.count, c.duration);
    }
    for (std::size_t i = 0; i < c.recon_plan.size(); ++i) {
        const auto& r = c.recon_plan[i];
        std::string f = idx("recon_plan", i);
        if (!contains(ep.attacker_ips, r.attacker))
            throw InvalidConfig(f + ".attacker", r.attacker.to_string() + " is not listed in endpoints.attacker_ips");
        for (std::size_t k = 0; k < r.keys.size(); ++k) {
            check_identifier(idx((f + ".keys").c_str(), k) + ".domain", r.keys[k].domain_id);
            check_identifier(idx((f + ".keys").c_str(), k) + ".item", r.keys[k].item_id);
        }
        check_window(f, r.at, 0, 1, c.duration);
    }
}

// ---------------------------------------------------------------- generation

namespace {

constexpr std::int64_t kLeadUs = 1'000'000; // room for association before t=0
constexpr std::uint16_t kMmsPort = 102;

// Portable draws: mt19937_64 output is specified by the standard, the
// distribution classes are not.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }
    std::uint32_t u32() { return std::uint32_t(engine_() >> 32); }

private:
    std::mt19937_64 engine_;
};

const TimeAccuracy kScadaQualities[] = {{0x0f, 0x00}, {0x0f, 0x11}, {0x0f, 0x10}};
const TimeAccuracy kBeanQuality{0x0a, 0x0a};
const TimeAccuracy kScriptQuality{0x0a, 0x00};

const Bytes kInitiateContent = {0x80, 0x03, 0x00, 0xfd, 0xe8, 0x81, 0x01, 0x05, 0x82, 0x01, 0x05, 0x83, 0x01,
                                0x0a, 0xa4, 0x0b, 0x80, 0x01, 0x01, 0x81, 0x03, 0x05, 0xf1, 0x00, 0x82, 0x01, 0x00};

struct Flow
{
    Ipv4 client;
    std::uint16_t client_port = 0;
    Ipv4 server;
    std::uint32_t client_seq = 0;
    std::uint32_t server_seq = 0;
    std::uint16_t ip_id = 0;
    std::uint32_t next_invoke = 1;
    std::int64_t first_us = -1;
};

struct Tx
{
    std::int64_t t_us = 0;
    std::size_t order = 0;
    std::size_t flow = 0;
    bool from_client = true;
    std::uint8_t tcp_flags = 0;
    Bytes payload;
    FrameKind kind = FrameKind::Response;
    std::vector<ExtractedRecord> records;
};

constexpr std::uint8_t kSyn = 0x02, kAck = 0x10, kPsh = 0x08;

std::uint16_t checksum(ByteView data, std::uint32_t sum = 0)
{
    for (std::size_t i = 0; i + 1 < data.size(); i += 2)
        sum += std::uint32_t(data[i]) << 8 | data[i + 1];
    if (data.size() % 2)
        sum += std::uint32_t(data.back()) << 8;
    while (sum >> 16)
        sum = (sum & 0xffff) + (sum >> 16);
    return std::uint16_t(~sum);
}

void put_mac(Bytes& out, Ipv4 ip)
{
    out.push_back(0x02);
    out.push_back(0x00);
    put_be32(out, ip.value);
}

RawFrame build_frame(Flow& fl, const Tx& tx, Timestamp ts)
{
    Ipv4 src = tx.from_client ? fl.client : fl.server;
    Ipv4 dst = tx.from_client ? fl.server : fl.client;
    std::uint16_t sport = tx.from_client ? fl.client_port : kMmsPort;
    std::uint16_t dport = tx.from_client ? kMmsPort : fl.client_port;
    std::uint32_t& seq = tx.from_client ? fl.client_seq : fl.server_seq;
    std::uint32_t ack = tx.from_client ? fl.server_seq : fl.client_seq;

    Bytes tcp;
    put_be16(tcp, sport);
    put_be16(tcp, dport);
    put_be32(tcp, seq);
    put_be32(tcp, (tx.tcp_flags & kAck) ? ack : 0);
    tcp.push_back(0x50);
    tcp.push_back(tx.tcp_flags);
    put_be16(tcp, 8192);
    put_be16(tcp, 0); // checksum
    put_be16(tcp, 0);
    tcp.insert(tcp.end(), tx.payload.begin(), tx.payload.end());

    Bytes pseudo;
    put_be32(pseudo, src.value);
    put_be32(pseudo, dst.value);
    put_be16(pseudo, 6);
    put_be16(pseudo, std::uint16_t(tcp.size()));
    std::uint32_t partial = 0;
    for (std::size_t i = 0; i < pseudo.size(); i += 2)
        partial += std::uint32_t(pseudo[i]) << 8 | pseudo[i + 1];
    std::uint16_t tcs = checksum(tcp, partial);
    tcp[16] = std::uint8_t(tcs >> 8);
    tcp[17] = std::uint8_t(tcs);

    Bytes ip;
    ip.push_back(0x45);
    ip.push_back(0x00);
    put_be16(ip, std::uint16_t(20 + tcp.size()));
    put_be16(ip, fl.ip_id++);
    put_be16(ip, 0x4000);
    ip.push_back(64);
    ip.push_back(6);
    put_be16(ip, 0);
    put_be32(ip, src.value);
    put_be32(ip, dst.value);
    std::uint16_t ics = checksum(ip);
    ip[10] = std::uint8_t(ics >> 8);
    ip[11] = std::uint8_t(ics);

    RawFrame f;
    f.ts = ts;
    put_mac(f.link_bytes, dst);
    put_mac(f.link_bytes, src);
    put_be16(f.link_bytes, 0x0800);
    f.link_bytes.insert(f.link_bytes.end(), ip.begin(), ip.end());
    f.link_bytes.insert(f.link_bytes.end(), tcp.begin(), tcp.end());

    seq += std::uint32_t(tx.payload.size()) + ((tx.tcp_flags & kSyn) ? 1 : 0);
    return f;
}

class Builder
{
public:
    explicit Builder(const ScenarioConfig& c) : c_(c), rng_(c.seed) {}

    Synthesis run()
    {
        schedule_directory();
        schedule_reads();
        schedule_writes();
        schedule_recon();
        schedule_attacks();
        if (c_.associate)
            schedule_associations();
        return assemble();
    }

private:
    std::int64_t us(double seconds) const { return kLeadUs + std::int64_t(std::llround(seconds * 1e6)); }

    std::size_t flow_for(Ipv4 client, Ipv4 server)
    {
        auto [it, fresh] = flow_ids_.try_emplace({client, server}, flows_.size());
        if (fresh) {
            Flow fl;
            fl.client = client;
            fl.server = server;
            fl.client_port = std::uint16_t(49152 + flows_.size() % 16000);
            fl.client_seq = rng_.u32();
            fl.server_seq = rng_.u32();
            flows_.push_back(fl);
        }
        return it->second;
    }

    void push(std::int64_t t, std::size_t flow, bool from_client, std::uint8_t flags, Bytes payload, FrameKind kind,
              std::vector<ExtractedRecord> records = {})
    {
        Tx tx;
        tx.t_us = t;
        tx.order = txs_.size();
        tx.flow = flow;
        tx.from_client = from_client;
        tx.tcp_flags = flags;
        tx.payload = std::move(payload);
        tx.kind = kind;
        tx.records = std::move(records);
        txs_.push_back(std::move(tx));
        Flow& fl = flows_[flow];
        if (fl.first_us < 0 || t < fl.first_us)
            fl.first_us = t;
    }

    // Request plus its response 2-3 ms later.
    void exchange(std::int64_t t, Ipv4 client, Ipv4 server, MmsMessage request, Bytes response_body, FrameKind kind,
                  std::vector<ExtractedRecord> records)
    {
        std::size_t f = flow_for(client, server);
        std::uint32_t invoke = flows_[f].next_invoke++;
        request.kind = PduKind::ConfirmedRequest;
        request.invoke_id = invoke;
        for (auto& r : records) {
            r.src_ip = client;
            r.dst_ip = server;
        }
        MmsMessage response;
        response.kind = PduKind::ConfirmedResponse;
        response.invoke_id = invoke;
        response.service = request.service;
        response.response_payload = std::move(response_body);

        push(t, f, true, kPsh | kAck, wrap_data_pdu(encode_mms(request)), kind, std::move(records));
        std::int64_t delay = 2000 + std::int64_t(rng_.below(1000));
        push(t + delay, f, false, kPsh | kAck, wrap_data_pdu(encode_mms(response)), FrameKind::Response);
    }

    void read(std::int64_t t, Ipv4 client, Ipv4 server, const ReadKey& key, FrameKind kind)
    {
        MmsMessage m;
        m.service = Service::Read;
        m.reads = {ObjectName{key.domain_id, key.item_id}};
        ExtractedRecord r;
        r.service = Service::Read;
        r.domain_id = key.domain_id;
        r.item_id = key.item_id;
        // listOfAccessResult [1] { boolean FALSE }
        exchange(t, client, server, std::move(m), Bytes{0xa1, 0x03, 0x83, 0x01, 0x00}, kind, {std::move(r)});
    }

    void write(std::int64_t t, Ipv4 client, Ipv4 server, const std::string& domain, const std::string& item,
               const OperPayload& oper, FrameKind kind)
    {
        MmsMessage m;
        m.service = Service::Write;
        m.writes = {WriteItem::with_oper(ObjectName{domain, item}, oper)};
        ExtractedRecord r;
        r.service = Service::Write;
        r.domain_id = domain;
        r.item_id = item;
        r.time_acc = extract_time_accuracy(oper);
        r.or_ident = oper.or_ident;
        r.or_cat = oper.or_cat;
        // success [1] NULL
        exchange(t, client, server, std::move(m), Bytes{0x81, 0x00}, kind, {std::move(r)});
    }

    UtcTimestamp utc(std::int64_t t, std::uint8_t quality)
    {
        Timestamp ts = Timestamp::from_usec(c_.start.total_usec() + t);
        return UtcTimestamp{ts.sec, rng_.u32() >> 8, quality};
    }

    OperPayload oper(std::int64_t t, TimeAccuracy q, std::int32_t or_cat, std::optional<Bytes> or_ident, bool ctl_val,
                     std::uint8_t ctl_num)
    {
        OperPayload o;
        o.ctl_val = ctl_val;
        o.oper_tm = utc(t, q.oper_tm);
        o.or_cat = or_cat;
        o.or_ident = std::move(or_ident);
        o.ctl_num = ctl_num;
        o.t = utc(t, q.t);
        o.test = false;
        o.check = 0;
        return o;
    }

    void schedule_directory()
    {
        const auto& dd = c_.dataset_decl;
        std::int64_t t = us(0);
        for (const auto& [name, nodes] : dd.datasets) {
            MmsMessage m;
            m.service = Service::GetNamedVariableListAttributes;
            m.target = ObjectName{dd.domain_id, "LLN0$" + name};
            std::vector<ObjectName> members;
            for (const auto& node : nodes)
                members.push_back({dd.domain_id, node + "$ST$SPCSO$stVal"});
            ExtractedRecord r;
            r.service = Service::GetNamedVariableListAttributes;
            r.domain_id = dd.domain_id;
            r.item_id = "LLN0$" + name;
            exchange(t, c_.endpoints.scada_ip, dd.server, std::move(m), encode_dataset_members(members),
                     FrameKind::Directory, {std::move(r)});
            t += 10'000;
        }
    }

    void schedule_reads()
    {
        for (const auto& plan : c_.read_plan) {
            double period = plan.period > 0 ? plan.period : c_.poll_period;
            std::size_t n = polls(c_.duration, period);
            for (std::size_t k = 0; k < n; ++k) {
                double jitter = (2 * rng_.uniform() - 1) * c_.jitter * period;
                double at = std::max(0.0, double(k) * period + jitter);
                read(us(at), c_.endpoints.scada_ip, plan.server, plan.key, FrameKind::BenignRead);
            }
        }
    }

    void schedule_writes()
    {
        for (const auto& plan : c_.write_plan) {
            for (std::size_t k = 0; k < plan.count; ++k) {
                TimeAccuracy q = plan.quality ? *plan.quality : kScadaQualities[rng_.below(3)];
                std::int64_t t = us(plan.at + plan.spacing * double(k));
                write(t, c_.endpoints.scada_ip, plan.target, plan.domain_id, plan.item_id,
                      oper(t, q, 2, Bytes(64, 0x00), k % 2 == 0, std::uint8_t(k)), FrameKind::BenignWrite);
            }
        }
    }

    void schedule_recon()
    {
        for (const auto& plan : c_.recon_plan) {
            for (std::size_t k = 0; k < plan.keys.size(); ++k)
                read(us(plan.at) + std::int64_t(k) * 200'000, plan.attacker, plan.target, plan.keys[k],
                     FrameKind::AttackRecon);
        }
    }

    void schedule_attacks()
    {
        for (const auto& plan : c_.attack_plan) {
            bool bean = plan.fingerprint == Fingerprint::Bean;
            for (std::size_t k = 0; k < plan.count; ++k) {
                std::int64_t t = us(plan.at + plan.spacing * double(k));
                auto o = bean ? oper(t, kBeanQuality, 3, Bytes(64, 0x00), k % 2 == 0, std::uint8_t(k))
                              : oper(t, kScriptQuality, 3, std::nullopt, k % 2 == 0, std::uint8_t(k));
                write(t, plan.attacker, plan.target, plan.domain_id, plan.item_id, o,
                      bean ? FrameKind::AttackBean : FrameKind::AttackScript);
            }
        }
    }

    // TCP handshake, COTP connect and MMS Initiate ahead of each flow's first request.
    void schedule_associations()
    {
        for (std::size_t f = 0; f < flows_.size(); ++f) {
            std::int64_t t = flows_[f].first_us - 10'000;
            MmsMessage init_req;
            init_req.kind = PduKind::InitiateRequest;
            init_req.response_payload = kInitiateContent;
            MmsMessage init_resp = init_req;
            init_resp.kind = PduKind::InitiateResponse;

            push(t, f, true, kSyn, {}, FrameKind::Association);
            push(t + 500, f, false, kSyn | kAck, {}, FrameKind::Association);
            push(t + 1000, f, true, kAck, {}, FrameKind::Association);
            push(t + 1500, f, true, kPsh | kAck, cotp_connection_request(), FrameKind::Association);
            push(t + 2500, f, false, kPsh | kAck, cotp_connection_confirm(), FrameKind::Association);
            push(t + 3000, f, true, kPsh | kAck, wrap_connect_request(encode_mms(init_req)), FrameKind::Association);
            push(t + 4500, f, false, kPsh | kAck, wrap_connect_response(encode_mms(init_resp)),
                 FrameKind::Association);
        }
    }

    Synthesis assemble()
    {
        std::sort(txs_.begin(), txs_.end(),
                  [](const Tx& a, const Tx& b) { return std::tie(a.t_us, a.order) < std::tie(b.t_us, b.order); });
        Synthesis out;
        out.manifest.seed = c_.seed;
        out.frames.reserve(txs_.size());
        for (const auto& tx : txs_) {
            std::size_t index = out.frames.size();
            Timestamp ts = Timestamp::from_usec(c_.start.total_usec() + tx.t_us);
            out.frames.push_back(build_frame(flows_[tx.flow], tx, ts));
            out.manifest.labels.push_back({index, tx.kind});
            for (auto r : tx.records) {
                r.ts = ts;
                r.frame_index = index;
                out.manifest.records.push_back(std::move(r));
            }
        }
        for (const auto& [name, nodes] : c_.dataset_decl.datasets)
            for (const auto& node : nodes)
                out.manifest.ggio_map[node] = name;
        return out;
    }

    const ScenarioConfig& c_;
    Rng rng_;
    std::vector<Flow> flows_;
    std::map<std::pair<Ipv4, Ipv4>, std::size_t> flow_ids_;
    std::vector<Tx> txs_;
};

} // namespace

Synthesis synthesize(const ScenarioConfig& config)
{
    validate(config);
    return Builder(config).run();
}

// ---------------------------------------------------------------- presets

namespace {

Ipv4 ip(const char* text)
{
    return *Ipv4::parse(text);
}

const Ipv4 kGied1 = ip("172.16.1.21");
const Ipv4 kSied1 = ip("172.16.3.21");
const Ipv4 kTied1 = ip("172.16.2.21");

ScenarioConfig benign_base()
{
    ScenarioConfig c;
    c.duration = 305;
    c.poll_period = 5;
    c.seed = 61850;
    c.endpoints.scada_ip = testbed::kScadaIp;
    c.endpoints.plc_ips = {testbed::kSmartHomePlc};
    c.endpoints.ied_ips = {kGied1, kTied1, kSied1};

    const char* wago_items[] = {
        "LLN0$AMI",         "LLN0$AT_Signal",      "LLN0$CircuitBreaker",    "LLN0$DC$NamPlt$configRev",
        "LLN0$Gen_Control", "LLN0$Loadbank1_IN",   "LLN0$Loadbank1_OUT",     "LLN0$Loadbank2_IN",
        "LLN0$Loadbank2_OUT", "LLN0$Microgrid_Control", "LLN0$Network",      "LLN0$NetworkAlarm",
        "LLN0$Q1ASync",     "LLN0$SwitchAlarm",    "LLN0$Sync",              "LLN0$Sync_Operations",
        "LLN0$Testbed",     "LLN0$VSD1",           "LLN0$VSD2",              "LLN0$VSD3",
    };
    for (const char* item : wago_items)
        c.read_plan.push_back({testbed::kSmartHomePlc, {testbed::kWagoDomain, item}, 0});

    const char* config_rev = "LLN0$DC$NamPlt$configRev";
    for (const char* dom : {"GIED1CTRL", "GIED1MEAS", "GIED1DR"})
        c.read_plan.push_back({kGied1, {dom, config_rev}, 0});
    for (const char* item : {config_rev, "LLN0$Measurement", "LLN0$Protection"})
        c.read_plan.push_back({kGied1, {"GIED1PROT", item}, 0});
    c.read_plan.push_back({kSied1, {"SIED1CTRL", config_rev}, 0});
    for (const char* item : {config_rev, "LLN0$Measurement", "LLN0$Protection"})
        c.read_plan.push_back({kSied1, {"SIED1PROT", item}, 0});
    c.read_plan.push_back({kTied1, {"TIED1PROT", "LLN0$Protection"}, 0});

    c.write_plan.push_back({testbed::kSmartHomePlc, testbed::kWagoDomain, testbed::kBreakerItem,
                            TimeAccuracy{0x0f, 0x10}, 1, 120, 1});

    c.dataset_decl.server = testbed::kSmartHomePlc;
    c.dataset_decl.domain_id = testbed::kWagoDomain;
    c.dataset_decl.datasets = {
        {"AMI", {"GGIO2", "GGIO3"}},
        {"CircuitBreaker", {"GGIO12"}},
        {"Sync", {"GGIO5", "GGIO6"}},
    };
    return c;
}

void add_bean(ScenarioConfig& c, std::size_t count)
{
    if (!contains(c.endpoints.attacker_ips, testbed::kBeanAttacker))
        c.endpoints.attacker_ips.push_back(testbed::kBeanAttacker);
    c.recon_plan.push_back({testbed::kBeanAttacker,
                            kSied1,
                            {{"SIED1CTRL", "LPHD1$ST$PhyHealth"},
                             {"SIED1CTRL", "BI6GGIO1$CF$Mod"},
                             {"SIED1PROT", "LLN0$Measurement"}},
                            140});
    c.attack_plan.push_back(
        {Fingerprint::Bean, testbed::kBeanAttacker, testbed::kSmartHomePlc, testbed::kWagoDomain, testbed::kBreakerItem, count,
         150, 1});
}

void add_script(ScenarioConfig& c, std::size_t count)
{
    if (!contains(c.endpoints.attacker_ips, testbed::kScriptAttacker))
        c.endpoints.attacker_ips.push_back(testbed::kScriptAttacker);
    c.attack_plan.push_back({Fingerprint::Script, testbed::kScriptAttacker, testbed::kSmartHomePlc, testbed::kWagoDomain,
                             testbed::kBreakerItem, count, 200, 1});
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"scenario1_scaled", "bean_attack", "script_attack", "mixed"};
}

ScenarioConfig preset(std::string_view name)
{
    ScenarioConfig c = benign_base();
    if (name == "scenario1_scaled")
        return c;
    if (name == "bean_attack") {
        c.seed = 4201;
        add_bean(c, 10);
        return c;
    }
    if (name == "script_attack") {
        c.seed = 5103;
        add_script(c, 10);
        return c;
    }
    if (name == "mixed") {
        c.seed = 9506;
        add_bean(c, 5);
        add_script(c, 5);
        return c;
    }
    throw UnknownPreset("unknown preset \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------- JSON

namespace {

using json_codec::json;

struct Reader
{
    const json& j;
    std::string path;

    Reader at(const char* key) const
    {
        std::string p = path.empty() ? key : path + "." + key;
        if (!j.is_object() || !j.contains(key))
            throw InvalidConfig(p, "missing");
        return {j.at(key), p};
    }
    Reader at(std::size_t i) const { return {j.at(i), path + "[" + std::to_string(i) + "]"}; }
    bool has(const char* key) const { return j.is_object() && j.contains(key); }

    [[noreturn]] void bad(const std::string& why) const { throw InvalidConfig(path, why); }

    const json& array() const
    {
        if (!j.is_array())
            bad("expected an array");
        return j;
    }
    double number() const
    {
        if (!j.is_number())
            bad("expected a number");
        return j.get<double>();
    }
    std::uint64_t uint() const
    {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
            bad("expected a non-negative integer");
        return j.get<std::uint64_t>();
    }
    std::string string() const
    {
        if (!j.is_string())
            bad("expected a string");
        return j.get<std::string>();
    }
    bool boolean() const
    {
        if (!j.is_boolean())
            bad("expected true or false");
        return j.get<bool>();
    }
    Ipv4 ipv4() const
    {
        auto v = Ipv4::parse(string());
        if (!v)
            bad("expected a dotted IPv4 address");
        return *v;
    }
    std::vector<Ipv4> ipv4_list() const
    {
        std::vector<Ipv4> out;
        for (std::size_t i = 0; i < array().size(); ++i)
            out.push_back(at(i).ipv4());
        return out;
    }
    ReadKey key_pair() const
    {
        if (!j.is_array() || j.size() != 2)
            bad("expected [domain, item]");
        return {at(std::size_t(0)).string(), at(std::size_t(1)).string()};
    }
};

json ip_list(const std::vector<Ipv4>& v)
{
    json out = json::array();
    for (auto ip : v)
        out.push_back(ip.to_string());
    return out;
}

} // namespace

std::string config_to_json(const ScenarioConfig& c)
{
    json j;
    j["version"] = kScenarioVersion;
    j["start"] = c.start.to_string();
    j["duration"] = c.duration;
    j["poll_period"] = c.poll_period;
    j["seed"] = c.seed;
    j["jitter"] = c.jitter;
    j["associate"] = c.associate;
    j["endpoints"] = {{"scada_ip", c.endpoints.scada_ip.to_string()},
                      {"plc_ips", ip_list(c.endpoints.plc_ips)},
                      {"ied_ips", ip_list(c.endpoints.ied_ips)},
                      {"attacker_ips", ip_list(c.endpoints.attacker_ips)}};
    j["read_plan"] = json::array();
    for (const auto& r : c.read_plan)
        j["read_plan"].push_back(
            {{"server", r.server.to_string()}, {"domain", r.key.domain_id}, {"item", r.key.item_id}, {"period", r.period}});
    j["write_plan"] = json::array();
    for (const auto& w : c.write_plan)
        j["write_plan"].push_back({{"target", w.target.to_string()},
                                   {"domain", w.domain_id},
                                   {"item", w.item_id},
                                   {"quality", json_codec::time_acc_to_json(w.quality)},
                                   {"count", w.count},
                                   {"at", w.at},
                                   {"spacing", w.spacing}});
    j["attack_plan"] = json::array();
    for (const auto& a : c.attack_plan)
        j["attack_plan"].push_back({{"fingerprint", fingerprint_name(a.fingerprint)},
                                    {"attacker", a.attacker.to_string()},
                                    {"target", a.target.to_string()},
                                    {"domain", a.domain_id},
                                    {"item", a.item_id},
                                    {"count", a.count},
                                    {"at", a.at},
                                    {"spacing", a.spacing}});
    j["recon_plan"] = json::array();
    for (const auto& r : c.recon_plan) {
        json keys = json::array();
        for (const auto& k : r.keys)
            keys.push_back({k.domain_id, k.item_id});
        j["recon_plan"].push_back(
            {{"attacker", r.attacker.to_string()}, {"target", r.target.to_string()}, {"keys", keys}, {"at", r.at}});
    }
    json datasets = json::object();
    for (const auto& [name, nodes] : c.dataset_decl.datasets)
        datasets[name] = nodes;
    j["dataset_decl"] = {{"server", c.dataset_decl.server.to_string()},
                         {"domain", c.dataset_decl.domain_id},
                         {"datasets", datasets}};
    return j.dump(2) + "\n";
}

ScenarioConfig config_from_json(std::string_view text)
{
    json doc = json_codec::parse_document(text, "scenario config");
    Reader root{doc, ""};
    if (!root.has("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kScenarioVersion)
        throw SchemaMismatch("scenario config: unsupported or missing version (expected " +
                             std::to_string(kScenarioVersion) + ")");

    ScenarioConfig c;
    if (root.has("start")) {
        auto ts = Timestamp::parse(root.at("start").string());
        if (!ts)
            root.at("start").bad("expected seconds.microseconds");
        c.start = *ts;
    }
    c.duration = root.at("duration").number();
    if (root.has("poll_period"))
        c.poll_period = root.at("poll_period").number();
    if (root.has("seed"))
        c.seed = root.at("seed").uint();
    if (root.has("jitter"))
        c.jitter = root.at("jitter").number();
    if (root.has("associate"))
        c.associate = root.at("associate").boolean();

    Reader ep = root.at("endpoints");
    c.endpoints.scada_ip = ep.at("scada_ip").ipv4();
    if (ep.has("plc_ips"))
        c.endpoints.plc_ips = ep.at("plc_ips").ipv4_list();
    if (ep.has("ied_ips"))
        c.endpoints.ied_ips = ep.at("ied_ips").ipv4_list();
    if (ep.has("attacker_ips"))
        c.endpoints.attacker_ips = ep.at("attacker_ips").ipv4_list();

    if (root.has("read_plan")) {
        Reader list = root.at("read_plan");
        for (std::size_t i = 0; i < list.array().size(); ++i) {
            Reader e = list.at(i);
            ReadPlanEntry r;
            r.server = e.at("server").ipv4();
            r.key = {e.at("domain").string(), e.at("item").string()};
            if (e.has("period"))
                r.period = e.at("period").number();
            c.read_plan.push_back(std::move(r));
        }
    }
    if (root.has("write_plan")) {
        Reader list = root.at("write_plan");
        for (std::size_t i = 0; i < list.array().size(); ++i) {
            Reader e = list.at(i);
            WritePlanEntry w;
            w.target = e.at("target").ipv4();
            w.domain_id = e.at("domain").string();
            w.item_id = e.at("item").string();
            if (e.has("quality")) {
                try {
                    w.quality = json_codec::time_acc_from_json(e.at("quality").j, "quality");
                } catch (const SchemaMismatch& err) {
                    e.at("quality").bad(err.what());
                }
            }
            if (e.has("count"))
                w.count = e.at("count").uint();
            if (e.has("at"))
                w.at = e.at("at").number();
            if (e.has("spacing"))
                w.spacing = e.at("spacing").number();
            c.write_plan.push_back(std::move(w));
        }
    }
    if (root.has("attack_plan")) {
        Reader list = root.at("attack_plan");
        for (std::size_t i = 0; i < list.array().size(); ++i) {
            Reader e = list.at(i);
            AttackPlanEntry a;
            std::string fp = e.at("fingerprint").string();
            if (fp == "BEAN")
                a.fingerprint = Fingerprint::Bean;
            else if (fp == "SCRIPT")
                a.fingerprint = Fingerprint::Script;
            else
                e.at("fingerprint").bad("expected BEAN or SCRIPT");
            a.attacker = e.at("attacker").ipv4();
            a.target = e.at("target").ipv4();
            a.domain_id = e.at("domain").string();
            a.item_id = e.at("item").string();
            if (e.has("count"))
                a.count = e.at("count").uint();
            if (e.has("at"))
                a.at = e.at("at").number();
            if (e.has("spacing"))
                a.spacing = e.at("spacing").number();
            c.attack_plan.push_back(std::move(a));
        }
    }
    if (root.has("recon_plan")) {
        Reader list = root.at("recon_plan");
        for (std::size_t i = 0; i < list.array().size(); ++i) {
            Reader e = list.at(i);
            ReconPlanEntry r;
            r.attacker = e.at("attacker").ipv4();
            r.target = e.at("target").ipv4();
            Reader keys = e.at("keys");
            for (std::size_t k = 0; k < keys.array().size(); ++k)
                r.keys.push_back(keys.at(k).key_pair());
            if (e.has("at"))
                r.at = e.at("at").number();
            c.recon_plan.push_back(std::move(r));
        }
    }
    if (root.has("dataset_decl")) {
        Reader dd = root.at("dataset_decl");
        c.dataset_decl.server = dd.at("server").ipv4();
        c.dataset_decl.domain_id = dd.at("domain").string();
        Reader ds = dd.at("datasets");
        if (!ds.j.is_object())
            ds.bad("expected an object");
        for (const auto& [name, nodes] : ds.j.items()) {
            Reader n{nodes, ds.path + "." + name};
            std::vector<std::string> list;
            for (std::size_t i = 0; i < n.array().size(); ++i)
                list.push_back(n.at(i).string());
            c.dataset_decl.datasets[name] = std::move(list);
        }
    }
    validate(c);
    return c;
}

std::string manifest_to_json(const Manifest& m)
{
    json j;
    j["version"] = kScenarioVersion;
    j["seed"] = m.seed;
    json counts = json::object();
    for (auto [kind, name] : kKindNames)
        counts[name] = m.count(kind);
    j["counts"] = counts;
    j["ggio_map"] = m.ggio_map;
    json labels = json::array();
    for (const auto& l : m.labels)
        labels.push_back({l.frame_index, frame_kind_name(l.kind)});
    j["frames"] = labels;
    json records = json::array();
    for (const auto& r : m.records)
        records.push_back(json_codec::record_to_json(r));
    j["records"] = records;
    return j.dump(1) + "\n";
}

Manifest manifest_from_json(std::string_view text)
{
    json doc = json_codec::parse_document(text, "manifest");
    if (!doc.is_object() || !doc.contains("version") || doc["version"] != kScenarioVersion)
        throw SchemaMismatch("manifest: unsupported or missing version");
    Manifest m;
    try {
        m.seed = json_codec::require(doc, "seed").get<std::uint64_t>();
        for (const auto& l : json_codec::require(doc, "frames")) {
            auto kind = frame_kind_from_name(l.at(1).get<std::string>());
            if (!kind)
                throw SchemaMismatch("manifest: unknown frame kind " + l.at(1).dump());
            m.labels.push_back({l.at(0).get<std::size_t>(), *kind});
        }
        for (const auto& r : json_codec::require(doc, "records"))
            m.records.push_back(json_codec::record_from_json(r));
        m.ggio_map = json_codec::require(doc, "ggio_map").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("manifest: ") + e.what());
    }
    return m;
}

} // namespace mmsguard
