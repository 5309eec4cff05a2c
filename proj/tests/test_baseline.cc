#include "mmsguard/baseline.h"
#include "mmsguard/error.h"
#include "mmsguard/field_extract.h"
#include "mmsguard/traffic_synth.h"
#include "gen.h"
#include "support.h"

#include <doctest.h>

using namespace mmsguard;

namespace {

ExtractedRecord write_rec(std::string item, std::optional<TimeAccuracy> acc, std::optional<Bytes> ident,
                          std::string dom = "WAGO61850ServerLogicalDevice")
{
    ExtractedRecord r;
    r.service = Service::Write;
    r.domain_id = std::move(dom);
    r.item_id = std::move(item);
    r.time_acc = acc;
    r.or_ident = std::move(ident);
    if (acc)
        r.or_cat = 3;
    return r;
}

ExtractedRecord read_rec(std::string dom, std::string item)
{
    ExtractedRecord r;
    r.service = Service::Read;
    r.domain_id = std::move(dom);
    r.item_id = std::move(item);
    return r;
}

// Set difference computed directly from the record lists.
template <class Key, class F>
std::set<Key> naive_diff(const std::vector<ExtractedRecord>& benign, const std::vector<ExtractedRecord>& attack,
                         Service svc, F key_of)
{
    std::set<Key> out;
    for (const auto& a : attack) {
        if (a.service != svc)
            continue;
        bool seen = false;
        for (const auto& b : benign)
            seen = seen || (b.service == svc && key_of(b) == key_of(a));
        if (!seen)
            out.insert(key_of(a));
    }
    return out;
}

} // namespace

TEST_CASE("GGIO node names")
{
    CHECK(ggio_node_of("GGIO12$CO$SPCSO$Oper") == "GGIO12");
    CHECK(ggio_node_of("BI6GGIO1$ST$Health") == "BI6GGIO1");
    CHECK(ggio_node_of("GGIO3") == "GGIO3");
    CHECK_FALSE(ggio_node_of("LLN0$ST$Mod"));
    CHECK_FALSE(ggio_node_of("XCBR1$CO$Pos$Oper$GGIO"));
}

TEST_CASE("learn refuses an empty record set")
{
    CHECK_THROWS_AS(learn(std::vector<ExtractedRecord>{}), EmptyBenign);
}

TEST_CASE("diff matches a naive set difference")
{
    gen::Source src(11);
    for (int round = 0; round < 50; ++round) {
        std::vector<ExtractedRecord> benign, attack;
        for (int i = 0; i < 60; ++i)
            benign.push_back(src.record(6));
        for (int i = 0; i < 60; ++i)
            attack.push_back(src.record(8));
        auto d = diff(learn(benign), attack);
        CHECK(d.potential_read == naive_diff<ReadKey>(benign, attack, Service::Read, read_key));
        CHECK(d.potential_write == naive_diff<WriteKey>(benign, attack, Service::Write, write_key));
    }
}

TEST_CASE("diff of a baseline against its own records is empty")
{
    gen::Source src(12);
    for (int round = 0; round < 100; ++round) {
        std::vector<ExtractedRecord> rs;
        std::size_t n = 1 + src.below(200);
        for (std::size_t i = 0; i < n; ++i)
            rs.push_back(src.record(10));
        CHECK(diff(learn(rs), rs) == DiffResult{});
    }
}

TEST_CASE("whitelists only grow when records are added")
{
    gen::Source src(13);
    for (int round = 0; round < 50; ++round) {
        std::vector<ExtractedRecord> rs;
        for (int i = 0; i < 50; ++i)
            rs.push_back(src.record(10));
        Baseline small = learn(rs);
        for (int i = 0; i < 50; ++i)
            rs.push_back(src.record(12));
        Baseline big = learn(rs);
        CHECK(std::includes(big.read_whitelist.begin(), big.read_whitelist.end(), small.read_whitelist.begin(),
                            small.read_whitelist.end()));
        CHECK(std::includes(big.write_whitelist.begin(), big.write_whitelist.end(), small.write_whitelist.begin(),
                            small.write_whitelist.end()));
    }
}

TEST_CASE("whitelist growth sums to the number of distinct keys")
{
    gen::Source src(14);
    std::vector<ExtractedRecord> rs;
    for (int i = 0; i < 2500; ++i)
        rs.push_back(src.record(15));
    auto growth = whitelist_growth(rs, 1000);
    REQUIRE(growth.size() == 3);
    Baseline b = learn(rs);
    CHECK(growth[0] + growth[1] + growth[2] == b.read_whitelist.size() + b.write_whitelist.size());
    CHECK(whitelist_growth(rs, 0).empty());
}

TEST_CASE("tool fingerprints sign as two generalized blocking signatures")
{
    Bytes zeros(64, 0x00);
    std::vector<ExtractedRecord> benign{
        write_rec("GGIO12$CO$SPCSO$Oper", TimeAccuracy{0x0f, 0x10}, zeros),
        read_rec("WAGO61850ServerLogicalDevice", "LLN0$ST$Mod"),
    };
    benign[0].or_cat = 2;
    std::vector<ExtractedRecord> attack{
        write_rec("GGIO12$CO$SPCSO$Oper", TimeAccuracy{0x0a, 0x0a}, zeros),
        write_rec("GGIO12$CO$SPCSO$Oper", TimeAccuracy{0x0a, 0x00}, std::nullopt),
        read_rec("SIED1CTRL", "LPHD1$ST$PhyHealth"),
    };
    GgioMap ggio{{"GGIO12", "CircuitBreaker"}};
    auto d = diff(learn(benign, ggio), attack);
    auto signed_ = validate_and_sign(d.potential_write, d.potential_read, ggio, benign);
    CHECK(signed_.discarded.empty());
    REQUIRE(signed_.signatures.size() == 3);

    const auto& script = signed_.signatures[1];
    CHECK(script.id == "m1-write-acc0a00-absent");
    CHECK(script.severity == Severity::Blocking);
    CHECK(script.predicate.service == Service::Write);
    CHECK(script.predicate.time_acc == TimeAccuracy{0x0a, 0x00});
    CHECK(script.predicate.or_ident_form == OrIdentForm::Absent);
    CHECK_FALSE(script.predicate.domain);
    CHECK_FALSE(script.predicate.item);

    const auto& bean = signed_.signatures[2];
    CHECK(bean.id == "m1-write-acc0a0a-zero64");
    CHECK(bean.predicate.time_acc == TimeAccuracy{0x0a, 0x0a});
    CHECK(bean.predicate.or_ident_form == OrIdentForm::AllZero64);
    CHECK_FALSE(bean.predicate.item);

    const auto& recon = signed_.signatures[0];
    CHECK(recon.id == "m1-read@SIED1CTRL/LPHD1$ST$PhyHealth");
    CHECK(recon.severity == Severity::Monitor);

    CHECK(builtin_signatures()[0].predicate == bean.predicate);
    CHECK(builtin_signatures()[1].predicate == script.predicate);
}

TEST_CASE("writes that touch no component are discarded")
{
    std::set<WriteKey> keys{{"D", "LLN0$SP$Beh$setVal", TimeAccuracy{0x0a, 0x0a}, "EMPTY"}};
    auto r = validate_and_sign(keys, {}, {});
    CHECK(r.signatures.empty());
    REQUIRE(r.discarded.size() == 1);
    CHECK(r.discarded[0].key == *keys.begin());
}

TEST_CASE("a generalized signature that would hit benign traffic is narrowed")
{
    Bytes zeros(64, 0x00);
    auto benign = write_rec("GGIO3$CO$SPCSO$Oper", TimeAccuracy{0x0a, 0x0a}, zeros);
    std::set<WriteKey> keys{write_key(write_rec("GGIO12$CO$SPCSO$Oper", TimeAccuracy{0x0a, 0x0a}, zeros))};
    auto r = validate_and_sign(keys, {}, {{"GGIO12", "CircuitBreaker"}}, std::vector{benign});
    REQUIRE(r.signatures.size() == 1);
    const auto& s = r.signatures[0];
    CHECK(s.predicate.item == "GGIO12$CO$SPCSO$Oper");
    CHECK(s.id == "m1-write-acc0a0a-zero64@WAGO61850ServerLogicalDevice/GGIO12$CO$SPCSO$Oper");
    CHECK_FALSE(matches(s, benign));
}

TEST_CASE("non-Oper writes stay bound to their object")
{
    std::set<WriteKey> keys{{"D", "GGIO4$CO$SPCSO$ctlVal", std::nullopt, "ABSENT"}};
    auto r = validate_and_sign(keys, {}, {});
    REQUIRE(r.signatures.size() == 1);
    CHECK(r.signatures[0].predicate.item == "GGIO4$CO$SPCSO$ctlVal");
    CHECK_FALSE(r.signatures[0].predicate.time_acc);
}

TEST_CASE("predicate matching distinguishes orIdent forms")
{
    FieldPredicate p;
    p.time_acc = TimeAccuracy{0x0a, 0x0a};
    p.or_ident_form = OrIdentForm::AllZero64;
    CHECK(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x0a}, Bytes(64, 0))));
    CHECK_FALSE(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x0a}, Bytes(63, 0))));
    CHECK_FALSE(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x0a}, std::nullopt)));
    CHECK_FALSE(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x00}, Bytes(64, 0))));
    p.or_ident_form = OrIdentForm::Absent;
    CHECK(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x0a}, std::nullopt)));
    CHECK_FALSE(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x0a}, Bytes{})));
    p.or_ident_form = OrIdentForm::Exact;
    p.or_ident = {1, 2};
    CHECK(matches(p, write_rec("X", TimeAccuracy{0x0a, 0x0a}, Bytes{1, 2})));
    p.item = "GGIO";
    p.item_match = ItemMatch::Prefix;
    CHECK(matches(p, write_rec("GGIO7", TimeAccuracy{0x0a, 0x0a}, Bytes{1, 2})));
    p.item_match = ItemMatch::Exact;
    CHECK_FALSE(matches(p, write_rec("GGIO7", TimeAccuracy{0x0a, 0x0a}, Bytes{1, 2})));
    CHECK_FALSE(matches(p, read_rec("D", "GGIO")));
}

TEST_CASE("dataset directory exchanges build the GGIO map")
{
    auto syn = synthesize(preset("mixed"));
    auto dec = decode_capture(syn.frames);
    auto g = build_ggio_map(dec.pdus);
    CHECK(g.map == syn.manifest.ggio_map);
    CHECK(g.map.at("GGIO12") == "CircuitBreaker");
    CHECK(g.directory_requests == 3);
    CHECK(g.unmatched_responses == 0);
}

TEST_CASE("baseline and signatures survive JSON round trips")
{
    gen::Source src(15);
    std::vector<ExtractedRecord> rs;
    for (int i = 0; i < 300; ++i)
        rs.push_back(src.record(10));
    Baseline b = learn(rs, {{"GGIO12", "CircuitBreaker"}}, {"a.pcap", "b.pcap"});
    CHECK(baseline_from_json(baseline_to_json(b)) == b);

    auto sigs = builtin_signatures();
    auto d = diff(learn(std::vector<ExtractedRecord>(rs.begin(), rs.begin() + 50)), rs);
    auto more = validate_and_sign(d.potential_write, d.potential_read, b.ggio_map).signatures;
    sigs.insert(sigs.end(), more.begin(), more.end());
    CHECK(signatures_from_json(signatures_to_json(sigs)) == sigs);

    oracle::TempDir dir;
    save_baseline(dir / "b.json", b);
    CHECK(load_baseline(dir / "b.json") == b);
    save_signatures(dir / "s.json", sigs);
    CHECK(load_signatures(dir / "s.json") == sigs);
}

TEST_CASE("baseline JSON with another version is rejected")
{
    Baseline b = learn(std::vector{read_rec("D", "I")});
    std::string text = baseline_to_json(b);
    auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 2");
    CHECK_THROWS_AS(baseline_from_json(text), SchemaMismatch);
    CHECK_THROWS_AS(baseline_from_json("[]"), SchemaMismatch);
}
