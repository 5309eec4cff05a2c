#include "mmsguard/detector.h"
#include "mmsguard/traffic_synth.h"
#include "gen.h"

#include <doctest.h>

using namespace mmsguard;

namespace {

ExtractedRecord write_rec(std::string item, TimeAccuracy acc, std::optional<Bytes> ident)
{
    ExtractedRecord r;
    r.ts = {1700000000, 5};
    r.frame_index = 9;
    r.src_ip = testbed::kBeanAttacker;
    r.dst_ip = testbed::kSmartHomePlc;
    r.service = Service::Write;
    r.domain_id = testbed::kWagoDomain;
    r.item_id = std::move(item);
    r.time_acc = acc;
    r.or_ident = std::move(ident);
    r.or_cat = 3;
    return r;
}

} // namespace

TEST_CASE("attack path carries the tuple and the mapped component")
{
    auto r = write_rec(testbed::kBreakerItem, {0x0a, 0x0a}, Bytes(64, 0));
    auto p = make_attack_path(r, {{"GGIO12", "CircuitBreaker"}}, "sig", Severity::Blocking);
    CHECK(p.origin_ip == testbed::kBeanAttacker);
    CHECK(p.target_ip == testbed::kSmartHomePlc);
    CHECK(p.operation == Service::Write);
    CHECK(p.domain_id == testbed::kWagoDomain);
    CHECK(p.item_id == testbed::kBreakerItem);
    CHECK(p.component == "CircuitBreaker");
    CHECK(p.frame_index == 9);
    CHECK(p.ts == r.ts);
    CHECK_FALSE(make_attack_path(r, {}, "sig", Severity::Blocking).component);
}

TEST_CASE("signatures take precedence over the whitelist and the smallest id wins")
{
    auto r = write_rec(testbed::kBreakerItem, {0x0a, 0x0a}, Bytes(64, 0));
    Baseline b;
    b.write_whitelist.insert(write_key(r));
    auto sigs = builtin_signatures();
    AttackSignature early = sigs[0];
    early.id = "a-first";
    early.severity = Severity::Monitor;
    sigs.push_back(early);
    auto d = detect(std::vector{r}, b, sigs);
    REQUIRE(d.paths.size() == 1);
    CHECK(d.paths[0].signature_id == "a-first");
    CHECK(d.paths[0].severity == Severity::Monitor);
    CHECK(d.blocking_count() == 0);
    CHECK(d.stats.matched == 1);
    CHECK(d.stats.whitelisted == 0);
}

TEST_CASE("unmatched records are whitelisted, novel, or ignored")
{
    Baseline b;
    b.read_whitelist.insert({"D", "known"});
    ExtractedRecord known, unknown, other, w;
    known.service = unknown.service = Service::Read;
    known.domain_id = unknown.domain_id = "D";
    known.item_id = "known";
    unknown.item_id = "unknown";
    other.service = Service::GetNamedVariableListAttributes;
    w = write_rec("GGIO1$CO$SPCSO$Oper", {0x0f, 0x00}, Bytes(64, 0));
    auto d = detect(std::vector{known, unknown, other, w}, b, builtin_signatures());
    CHECK(d.paths.empty());
    CHECK(d.stats == DetectionStats{4, 0, 1, 2, 1});
    REQUIRE(d.novel_candidates.size() == 2);
    CHECK(d.novel_candidates[0].reason == "read pair unknown");
    CHECK(d.novel_candidates[1].reason == "write tuple unknown");

    auto promoted = promote_novel(d, b);
    REQUIRE(promoted.size() == 2);
    for (const auto& s : promoted)
        CHECK(s.origin == SignatureOrigin::FlaggedM2);
    CHECK(promoted[0].id == "m2-read@D/unknown");
    CHECK(promoted[1].id == "m2-write-acc0f00-zero64");
}

TEST_CASE("every attack write in the synthetic presets is flagged with a full path")
{
    auto benign = synthesize(preset("scenario1_scaled"));
    auto bx = extract(benign.frames);
    auto g = build_ggio_map(decode_capture(benign.frames).pdus);
    Baseline b = learn(bx.records, g.map);
    auto sigs = builtin_signatures();

    for (const char* name : {"bean_attack", "script_attack", "mixed"}) {
        CAPTURE(name);
        auto syn = synthesize(preset(name));
        auto d = detect(extract(syn.frames).records, b, sigs);
        std::vector<std::size_t> flagged;
        for (const auto& p : d.paths) {
            if (p.severity != Severity::Blocking)
                continue;
            flagged.push_back(p.frame_index);
            CHECK(p.component == "CircuitBreaker");
            CHECK(p.item_id == testbed::kBreakerItem);
            CHECK(p.target_ip == testbed::kSmartHomePlc);
        }
        CHECK(flagged == syn.manifest.attack_frames());
    }
    CHECK(detect(bx.records, b, sigs).paths.empty());
}

TEST_CASE("reports render in all formats and JSON round trips")
{
    auto r = write_rec(testbed::kBreakerItem, {0x0a, 0x0a}, Bytes(64, 0));
    Baseline b;
    b.ggio_map = {{"GGIO12", "CircuitBreaker"}};
    ExtractedRecord novel;
    novel.service = Service::Read;
    novel.domain_id = "D";
    novel.item_id = "I";
    auto d = detect(std::vector{r, novel}, b, builtin_signatures());

    std::string text = render_report(d, ReportFormat::Text);
    CHECK(text.find("172.16.4.201 -> 172.16.3.41") != std::string::npos);
    CHECK(text.find("(CircuitBreaker)") != std::string::npos);
    CHECK(text.find("\x1b[") == std::string::npos);
    CHECK(render_report(d, ReportFormat::Text, true).find("\x1b[") != std::string::npos);

    std::string csv = render_report(d, ReportFormat::Csv);
    CHECK(csv.find("CircuitBreaker") != std::string::npos);

    CHECK(detection_from_json(render_report(d, ReportFormat::Json)) == d);
}

TEST_CASE("detect agrees with a direct scan for random records")
{
    gen::Source src(21);
    auto sigs = builtin_signatures();
    for (int round = 0; round < 30; ++round) {
        std::vector<ExtractedRecord> benign, probe;
        for (int i = 0; i < 80; ++i)
            benign.push_back(src.record(5));
        for (int i = 0; i < 80; ++i)
            probe.push_back(src.record(7));
        Baseline b = learn(benign);
        auto d = detect(probe, b, sigs);
        std::size_t expected_matches = 0;
        for (const auto& r : probe)
            expected_matches += (matches(sigs[0], r) || matches(sigs[1], r)) ? 1 : 0;
        CHECK(d.stats.matched == expected_matches);
        CHECK(d.paths.size() == expected_matches);
        CHECK(d.stats.scanned == probe.size());
        CHECK(d.stats.matched + d.stats.whitelisted + d.stats.novel + d.stats.ignored == probe.size());
    }
}
