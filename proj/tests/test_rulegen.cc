#include "mmsguard/error.h"
#include "mmsguard/rulegen.h"
#include "gen.h"

#include <doctest.h>

using namespace mmsguard;

namespace {

NidsRule random_rule(gen::Source& src, std::uint32_t sid)
{
    NidsRule r;
    r.sid = sid;
    r.action = src.coin() ? RuleAction::Drop : RuleAction::Alert;
    r.rev = int(1 + src.below(5));
    r.match.service = Service(std::uint32_t(src.below(40)));
    if (src.coin())
        r.match.time_acc = TimeAccuracy{src.byte(), src.byte()};
    r.match.or_ident_form = OrIdentForm(src.below(4));
    if (r.match.or_ident_form == OrIdentForm::Exact)
        r.match.or_ident = src.bytes(20);
    if (src.coin())
        r.match.domain = src.identifier() + "\"\\";
    if (src.coin()) {
        r.match.item = src.identifier(40);
        r.match.item_match = src.coin() ? ItemMatch::Prefix : ItemMatch::Exact;
    }
    r.msg = src.identifier(60) + (src.coin() ? "\nsecond line \"q\"" : "");
    return r;
}

std::string parse_error_of(std::string_view text)
{
    try {
        parse_dsl(text);
    } catch (const ParseError& e) {
        return std::to_string(e.line()) + ":" + std::to_string(e.token());
    }
    return "ok";
}

} // namespace

TEST_CASE("compile orders by id, numbers sids, and maps severity to action")
{
    auto sigs = builtin_signatures();
    AttackSignature recon;
    recon.id = "m1-read@D/I";
    recon.severity = Severity::Monitor;
    recon.predicate.service = Service::Read;
    recon.predicate.domain = "D";
    recon.predicate.item = "I";
    recon.description = "reconnaissance";
    sigs.push_back(recon);

    auto rules = compile(sigs, 2000000);
    REQUIRE(rules.size() == 3);
    CHECK(rules[0].sid == 2000000);
    CHECK(rules[0].action == RuleAction::Drop);
    CHECK(rules[0].msg.ends_with("[BUILTIN builtin-iec61850bean]"));
    CHECK(rules[1].msg.ends_with("[BUILTIN builtin-libiec61850-script]"));
    CHECK(rules[2].sid == 2000002);
    CHECK(rules[2].action == RuleAction::Alert);
    CHECK(rules[2].match == recon.predicate);
    CHECK(compile(std::vector<AttackSignature>{}).empty());
}

TEST_CASE("compile rejects duplicate ids and low sid bases")
{
    auto sigs = builtin_signatures();
    sigs.push_back(sigs[0]);
    CHECK_THROWS_AS(compile(sigs), DuplicateSignatureId);
    CHECK_THROWS_AS(compile(builtin_signatures(), 999999), std::invalid_argument);
}

TEST_CASE("fingerprint rules emit in the documented line format")
{
    auto rules = compile(builtin_signatures());
    std::string text = emit_dsl(rules);
    CHECK(text.find("RULE 1000000 drop service=5 acc=0x0a,0x0a orident=zero64 rev=1 msg=\"") != std::string::npos);
    CHECK(text.find("RULE 1000001 drop service=5 acc=0x0a,0x00 orident=absent rev=1 msg=\"") != std::string::npos);
    CHECK(parse_dsl(text) == rules);
}

TEST_CASE("parse(emit(rules)) is the identity on random rule sets")
{
    gen::Source src(31);
    for (int round = 0; round < 500; ++round) {
        std::vector<NidsRule> rules;
        std::size_t n = src.below(8);
        for (std::size_t i = 0; i < n; ++i)
            rules.push_back(random_rule(src, std::uint32_t(kMinSidBase + i * 7)));
        CHECK(parse_dsl(emit_dsl(rules)) == rules);
    }
}

TEST_CASE("comments, blank lines and defaults")
{
    auto rules = parse_dsl("# header\n\n   \nRULE 5 alert service=4 msg=\"m\"\n");
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].sid == 5);
    CHECK(rules[0].rev == 1);
    CHECK(rules[0].match.or_ident_form == OrIdentForm::Any);
    CHECK_FALSE(rules[0].match.time_acc);
}

TEST_CASE("parse errors name the line and token")
{
    CHECK(parse_error_of("RULE 1 drop service=5 msg=\"x\"") == "ok");
    CHECK(parse_error_of("\nrule 1 drop service=5 msg=\"x\"") == "2:1");
    CHECK(parse_error_of("RULE x drop service=5 msg=\"x\"") == "1:2");
    CHECK(parse_error_of("RULE 1 block service=5 msg=\"x\"") == "1:3");
    CHECK(parse_error_of("RULE 1 drop service=5 service=4 msg=\"x\"") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5 colour=red msg=\"x\"") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5 domain=D msg=\"x\"") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=\"5\" msg=\"x\"") == "1:4");
    CHECK(parse_error_of("RULE 1 drop service=5 acc=0x0a msg=\"x\"") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5 orident=hex:0 msg=\"x\"") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5 item=\"a\" item_prefix=\"b\" msg=\"x\"") == "1:6");
    CHECK(parse_error_of("RULE 1 drop msg=\"x\"") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5 msg=\"x") == "1:5");
    CHECK(parse_error_of("RULE 1 drop service=5 msg=\"x\"\nRULE 1 alert service=4 msg=\"y\"") == "2:2");
    CHECK(parse_error_of("RULE 1 drop service=5 msg=\"x\" stray") == "1:6");
}

TEST_CASE("approximate export")
{
    auto rules = compile(builtin_signatures());
    std::string text = export_suricata_like(rules);
    CHECK(text.starts_with("# Approximate export"));
    CHECK(text.find("drop tcp any any -> any 102 (msg:\"") != std::string::npos);
    CHECK(text.find("content:\"|a5|\"; content:\"|91 08|\"; content:\"|0a|\"; distance:7; within:1; content:\"|89 "
                    "40 00") != std::string::npos);
    CHECK(text.find("content:\"|a2 03 85 01|\"; distance:0;") != std::string::npos);
    CHECK(text.find("sid:1000001; rev:1;)") != std::string::npos);
}
