#include "mmsguard/file_util.h"
#include "mmsguard/pcap_io.h"
#include "mmsguard/rulegen.h"
#include "mmsguard/traffic_synth.h"
#include "support.h"

#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <sys/wait.h>

using namespace mmsguard;

namespace {

struct Run
{
    int code = -1;
    std::string output; // stdout and stderr interleaved
};

Run run(const std::string& args)
{
    std::string cmd = std::string("NO_COLOR=1 '") + MMSGUARD_CLI + "' " + args + " 2>&1";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
        r.output.append(buf.data(), n);
    int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const std::filesystem::path& p)
{
    return "'" + p.string() + "'";
}

std::size_t count_lines_starting(const std::string& text, const std::string& prefix)
{
    std::size_t n = 0, pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        if (text.compare(pos, prefix.size(), prefix) == 0)
            ++n;
        pos = end + 1;
    }
    return n;
}

// Shared fixture: one benign and one attack capture.
struct Captures
{
    oracle::TempDir dir;
    std::filesystem::path benign = dir / "benign.pcap";
    std::filesystem::path attack = dir / "mixed.pcap";

    Captures()
    {
        REQUIRE(run("synth --preset scenario1_scaled --out " + q(benign)).code == 0);
        REQUIRE(run("synth --preset mixed --out " + q(attack) + " --manifest " + q(dir / "mixed.manifest.json")).code ==
                0);
    }
};

} // namespace

TEST_CASE("usage errors exit 64 with usage text")
{
    auto none = run("");
    CHECK(none.code == 64);
    CHECK(none.output.find("Usage") != std::string::npos);

    auto missing = run("detect --baseline /nonexistent/b.json --in /nonexistent/x.pcap");
    CHECK(missing.code == 64);
    CHECK(missing.output.find("Usage") != std::string::npos);

    CHECK(run("learn --out x.json").code == 64);
    CHECK(run("frobnicate").code == 64);
    CHECK(run("synth --preset nope --out x.pcap").code == 64);
    CHECK(run("--help").code == 0);
}

TEST_CASE("pipeline over the mixed preset yields exactly two drop rules")
{
    Captures c;
    auto out = c.dir / "out";
    auto r = run("pipeline --benign " + q(c.benign) + " --attack " + q(c.attack) + " --out " + q(out));
    REQUIRE(r.code == 0);
    for (const char* f : {"baseline.json", "signatures.json", "rules.rules", "report.txt"})
        CHECK(std::filesystem::exists(out / f));

    std::string rules = read_text_file(out / "rules.rules");
    auto parsed = parse_dsl(rules);
    std::size_t drops = 0;
    for (const auto& rule : parsed)
        drops += rule.action == RuleAction::Drop;
    CHECK(drops == 2);
    CHECK(count_lines_starting(rules, "RULE") == parsed.size());

    SUBCASE("reruns are byte-identical")
    {
        auto again = c.dir / "again";
        REQUIRE(run("pipeline --benign " + q(c.benign) + " --attack " + q(c.attack) + " --out " + q(again)).code == 0);
        for (const char* f : {"baseline.json", "signatures.json", "rules.rules", "report.txt"}) {
            CAPTURE(f);
            CHECK(read_text_file(out / f) == read_text_file(again / f));
        }
    }

    SUBCASE("filter drops the labelled attack frames")
    {
        auto filtered = c.dir / "filtered.pcap";
        auto alerts = c.dir / "alerts.jsonl";
        auto fr = run("filter --rules " + q(out / "rules.rules") + " --in " + q(c.attack) + " --out " + q(filtered) +
                      " --alerts " + q(alerts) + " --baseline " + q(out / "baseline.json"));
        REQUIRE(fr.code == 0);
        auto manifest = manifest_from_json(read_text_file(c.dir / "mixed.manifest.json"));
        CHECK(read_pcap(filtered).size() + manifest.attack_frames().size() == read_pcap(c.attack).size());

        auto det = run("detect --baseline " + q(out / "baseline.json") + " --signatures " +
                       q(out / "signatures.json") + " --in " + q(filtered) + " --json");
        CHECK(det.code == 0);
    }
}

TEST_CASE("detect exit codes and report formats")
{
    Captures c;
    auto baseline = c.dir / "baseline.json";
    REQUIRE(run("learn --in " + q(c.benign) + " --out " + q(baseline)).code == 0);

    auto benign = run("detect --baseline " + q(baseline) + " --builtin-signatures --in " + q(c.benign) + " --json");
    CHECK(benign.code == 0);
    auto doc = nlohmann::json::parse(benign.output);
    CHECK(doc["paths"].empty());

    auto attack = run("detect --baseline " + q(baseline) + " --builtin-signatures --in " + q(c.attack));
    CHECK(attack.code == 2);
    CHECK(attack.output.find("\x1b[") == std::string::npos);
    CHECK(attack.output.find("CircuitBreaker") != std::string::npos);

    auto csv = c.dir / "paths.csv";
    CHECK(run("detect --baseline " + q(baseline) + " --builtin-signatures --in " + q(c.attack) +
              " --format csv --out " + q(csv))
              .code == 2);
    CHECK(count_lines_starting(read_text_file(csv), "1714") == 10);

    auto promoted = c.dir / "m2.json";
    run("detect --baseline " + q(baseline) + " --in " + q(c.attack) + " --promote-novel " + q(promoted));
    CHECK(read_text_file(promoted).find("FLAGGED_M2") != std::string::npos);
}

TEST_CASE("rulegen, report and synth options")
{
    oracle::TempDir dir;
    auto rules = dir / "r.rules";
    auto suri = dir / "r.suricata";
    REQUIRE(run("rulegen --builtin-signatures --out " + q(rules) + " --sid-base 3000000 --suricata " + q(suri)).code ==
            0);
    auto parsed = parse_dsl(read_text_file(rules));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].sid == 3000000);
    CHECK(read_text_file(suri).find("sid:3000001;") != std::string::npos);
    CHECK(run("rulegen --builtin-signatures --out " + q(rules) + " --sid-base 5").code == 64);

    auto pcap = dir / "s.pcap";
    auto cfg = dir / "s.json";
    REQUIRE(run("synth --preset script_attack --seed 9 --out " + q(pcap) + " --dump-config " + q(cfg)).code == 0);
    CHECK(config_from_json(read_text_file(cfg)).seed == 9);
    auto pcap2 = dir / "s2.pcap";
    REQUIRE(run("synth --config " + q(cfg) + " --out " + q(pcap2)).code == 0);
    CHECK(read_pcap(pcap) == read_pcap(pcap2));

    auto rep = run("report --in " + q(pcap) + " --json --csv " + q(dir / "rec.csv"));
    REQUIRE(rep.code == 0);
    auto doc = nlohmann::json::parse(rep.output);
    CHECK(doc["decode_errors"] == 0);
    CHECK(doc["ggio_map"]["GGIO12"] == "CircuitBreaker");
    CHECK(read_text_file(dir / "rec.csv").starts_with("ts,src,dst,service"));
}

TEST_CASE("runtime failures exit 1")
{
    oracle::TempDir dir;
    write_file_atomic(dir / "bad.json", std::string("{\"version\": 99}"));
    write_file_atomic(dir / "x.pcap", std::string("not a pcap at all, definitely"));
    CHECK(run("detect --baseline " + q(dir / "bad.json") + " --in " + q(dir / "x.pcap")).code == 1);
    auto r = run("report --in " + q(dir / "x.pcap"));
    CHECK(r.code == 1);
    CHECK(r.output.find("mmsguard:") != std::string::npos);
}
