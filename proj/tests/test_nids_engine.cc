#include "mmsguard/nids_engine.h"
#include "mmsguard/traffic_synth.h"
#include "support.h"

#include <doctest.h>

#include <json.hpp>

using namespace mmsguard;

namespace {

// 978 poll frames, 2 directory frames and 10 bean writes with responses.
ScenarioConfig thousand_frames()
{
    ScenarioConfig c;
    c.duration = 489;
    c.poll_period = 1;
    c.jitter = 0;
    c.associate = false;
    c.seed = 77;
    c.endpoints.scada_ip = testbed::kScadaIp;
    c.endpoints.plc_ips = {testbed::kSmartHomePlc};
    c.endpoints.attacker_ips = {testbed::kBeanAttacker};
    c.read_plan.push_back({testbed::kSmartHomePlc, {testbed::kWagoDomain, "LLN0$ST$Mod$stVal"}, 0});
    c.dataset_decl = {testbed::kSmartHomePlc, testbed::kWagoDomain, {{"CircuitBreaker", {"GGIO12"}}}};
    c.attack_plan.push_back(
        {Fingerprint::Bean, testbed::kBeanAttacker, testbed::kSmartHomePlc, testbed::kWagoDomain, testbed::kBreakerItem, 10, 100, 1});
    return c;
}

std::vector<NidsRule> fingerprint_rules()
{
    return compile(builtin_signatures());
}

} // namespace

TEST_CASE("drop rules remove exactly the attack frames")
{
    auto syn = synthesize(thousand_frames());
    REQUIRE(syn.frames.size() == 1000);
    Baseline b;
    b.ggio_map = syn.manifest.ggio_map;
    auto rules = fingerprint_rules();
    auto out = filter(syn.frames, rules, &b);
    CHECK(out.passed.size() == 990);
    REQUIRE(out.dropped.size() == 10);
    std::vector<std::size_t> dropped;
    for (const auto& d : out.dropped) {
        dropped.push_back(d.frame_index);
        CHECK(d.sid == 1000000);
        CHECK(d.frame == syn.frames[d.frame_index]);
        REQUIRE(d.path);
        CHECK(d.path->component == "CircuitBreaker");
        CHECK(d.path->signature_id == "sid:1000000");
        CHECK(d.path->origin_ip == testbed::kBeanAttacker);
    }
    CHECK(dropped == syn.manifest.attack_frames());
    CHECK(out.alerts.empty());
    CHECK(out.stats.frames == 1000);
    CHECK(out.stats.records == 489 + 1 + 10);

    for (std::size_t i = 0; i < out.passed.size(); ++i)
        CHECK(out.passed[i] == syn.frames[out.passed_indices[i]]);
    CHECK(std::is_sorted(out.passed_indices.begin(), out.passed_indices.end()));
}

TEST_CASE("filtered output contains no attack records")
{
    auto syn = synthesize(preset("mixed"));
    auto rules = fingerprint_rules();
    auto out = filter(syn.frames, rules);
    CHECK(out.dropped.size() == syn.manifest.attack_frames().size());
    auto again = filter(out.passed, rules);
    CHECK(again.dropped.empty());
    CHECK(again.passed.size() == out.passed.size());
}

TEST_CASE("alert rules log without dropping")
{
    auto syn = synthesize(thousand_frames());
    NidsRule watch;
    watch.sid = 1000005;
    watch.action = RuleAction::Alert;
    watch.match.service = Service::Read;
    watch.match.item = "LLN0$ST$Mod$stVal";
    watch.msg = "poll";
    auto out = filter(syn.frames, std::vector{watch});
    CHECK(out.dropped.empty());
    REQUIRE(out.alerts.size() == 489);
    for (std::size_t i = 1; i < out.alerts.size(); ++i)
        CHECK(out.alerts[i - 1].ts <= out.alerts[i].ts);

    std::string log = alert_log_jsonl(out);
    auto first = nlohmann::json::parse(log.substr(0, log.find('\n')));
    CHECK(first["sid"] == 1000005);
    CHECK(first["msg"] == "poll");
    CHECK(first["src"] == "172.18.5.60");
    CHECK(first["dst"] == "172.16.3.41");
    CHECK(log.substr(0, 7) == "{\"ts\":\"");
}

TEST_CASE("the smallest matching sid decides")
{
    auto syn = synthesize(thousand_frames());
    NidsRule alert_all;
    alert_all.sid = 10;
    alert_all.action = RuleAction::Alert;
    alert_all.match.service = Service::Write;
    alert_all.msg = "any write";
    auto rules = fingerprint_rules();
    rules.push_back(alert_all);
    auto out = filter(syn.frames, rules);
    CHECK(out.dropped.empty());
    CHECK(out.alerts.size() == 10);
}

TEST_CASE("undecodable PDUs pass by default and drop when failing closed")
{
    Bytes broken = oracle::tlv(0xa0, oracle::cat({oracle::tlv(0x02, {0x01}), {0xa5, 0x7f}}));
    std::vector<RawFrame> frames{oracle::tcp_frame(0x0a000001, 40000, 0x0a000002, 102, 1, oracle::wrap(broken))};
    auto rules = fingerprint_rules();
    auto open = filter(frames, rules);
    CHECK(open.passed.size() == 1);
    CHECK(open.stats.undecodable_passed == 1);
    auto closed = filter(frames, rules, nullptr, FilterOptions{true});
    CHECK(closed.passed.empty());
    REQUIRE(closed.dropped.size() == 1);
    CHECK(closed.dropped[0].sid == 0);
    CHECK_FALSE(closed.dropped[0].path);
}

TEST_CASE("filtered capture is written as pcap")
{
    auto syn = synthesize(thousand_frames());
    auto out = filter(syn.frames, fingerprint_rules());
    oracle::TempDir dir;
    write_filtered(out, dir / "f.pcap");
    CHECK(read_pcap(dir / "f.pcap") == out.passed);
}
