// mmsguard: learn MMS whitelists, derive attack signatures, detect, and filter.
//
// Exit codes: 0 success, 1 error, 2 detect found BLOCKING paths, 64 usage error.

#include "mmsguard/detector.h"
#include "mmsguard/error.h"
#include "mmsguard/field_extract.h"
#include "mmsguard/file_util.h"
#include "mmsguard/nids_engine.h"
#include "mmsguard/rulegen.h"
#include "mmsguard/traffic_synth.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace mmsguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBlocking = 2;
constexpr int kExitUsage = 64;

bool use_color()
{
    return std::getenv("NO_COLOR") == nullptr && isatty(fileno(stdout));
}

void emit(const std::string& out_path, const std::string& text)
{
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        write_file_atomic(out_path, text);
}

struct Learned
{
    Baseline baseline;
    std::vector<ExtractedRecord> records;
    std::vector<ExtractionReport> reports;
};

Learned learn_from(const std::vector<std::string>& paths)
{
    Learned out;
    GgioMap ggio;
    std::vector<std::string> sources;
    for (const auto& p : paths) {
        CaptureDecode decoded = decode_capture(read_pcap(p));
        for (const auto& [node, ds] : build_ggio_map(decoded.pdus).map)
            ggio[node] = ds;
        Extraction ex = extract(decoded);
        out.records.insert(out.records.end(), ex.records.begin(), ex.records.end());
        out.reports.push_back(ex.report);
        sources.push_back(fs::path(p).filename().string());
    }
    out.baseline = learn(out.records, std::move(ggio), std::move(sources));
    return out;
}

std::string summarize(const std::string& name, const ExtractionReport& r)
{
    std::ostringstream out;
    out << name << ": frames=" << r.total_frames << " tcp=" << r.tcp_frames << " mms_pdus=" << r.mms_pdus
        << " records=" << r.records << " responses=" << r.responses << " initiate_requests=" << r.initiate_requests
        << " decode_errors=" << r.decode_errors << " not_mms=" << r.not_mms << " resyncs=" << r.resyncs
        << " gaps=" << r.gaps << "\n";
    for (const auto& [svc, n] : r.requests)
        out << "  service " << service_tag(svc) << " (" << service_name(svc) << "): " << n << "\n";
    return out.str();
}

std::string key_text(const WriteKey& k)
{
    std::string acc = k.time_acc ? hex_byte(k.time_acc->oper_tm) + "," + hex_byte(k.time_acc->t) : "-";
    return k.domain_id + "/" + k.item_id + " acc=" + acc + " orident=" + k.or_ident;
}

std::string diff_text(const DiffResult& d)
{
    std::ostringstream out;
    out << "# potential_read=" << d.potential_read.size() << " potential_write=" << d.potential_write.size() << "\n";
    for (const auto& k : d.potential_read)
        out << "read " << k.domain_id << "/" << k.item_id << "\n";
    for (const auto& k : d.potential_write)
        out << "write " << key_text(k) << "\n";
    return out.str();
}

std::string sign_text(const SignResult& s)
{
    std::ostringstream out;
    for (const auto& sig : s.signatures)
        out << "signature " << sig.id << " " << severity_name(sig.severity) << "\n";
    for (const auto& d : s.discarded)
        out << "discarded " << key_text(d.key) << ": " << d.reason << "\n";
    return out.str();
}

std::vector<AttackSignature> gather_signatures(const std::vector<std::string>& files, bool builtin)
{
    std::vector<AttackSignature> sigs;
    for (const auto& f : files) {
        auto loaded = load_signatures(f);
        sigs.insert(sigs.end(), loaded.begin(), loaded.end());
    }
    if (builtin) {
        auto b = builtin_signatures();
        sigs.insert(sigs.end(), b.begin(), b.end());
    }
    return sigs;
}

ReportFormat parse_format(const std::string& name, bool json)
{
    if (json || name == "json")
        return ReportFormat::Json;
    return name == "csv" ? ReportFormat::Csv : ReportFormat::Text;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mmsguard: IEC 61850 MMS whitelist learning, attack signatures and NIDS rules.\n"
                 "Exit codes: 0 success, 1 error, 2 detect found BLOCKING paths, 64 usage error."};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // learn
    auto* learn_cmd = app.add_subcommand("learn", "Learn read/write whitelists from benign captures");
    std::vector<std::string> learn_in;
    std::string learn_out;
    std::size_t growth_window = 0;
    learn_cmd->add_option("--in", learn_in, "Benign pcap (repeatable)")->required()->check(CLI::ExistingFile);
    learn_cmd->add_option("--out", learn_out, "Baseline JSON")->required();
    learn_cmd->add_option("--growth", growth_window, "Print new whitelist keys per window of records");

    // diff
    auto* diff_cmd = app.add_subcommand("diff", "List attack read/write keys absent from a baseline");
    std::string diff_baseline, diff_attack, diff_out;
    diff_cmd->add_option("--baseline", diff_baseline)->required()->check(CLI::ExistingFile);
    diff_cmd->add_option("--attack", diff_attack, "Attack pcap")->required()->check(CLI::ExistingFile);
    diff_cmd->add_option("--out", diff_out, "Output file (default stdout)");

    // sign
    auto* sign_cmd = app.add_subcommand("sign", "Derive attack signatures from an attack capture");
    std::string sign_baseline, sign_attack, sign_out;
    std::vector<std::string> sign_benign;
    sign_cmd->add_option("--baseline", sign_baseline)->required()->check(CLI::ExistingFile);
    sign_cmd->add_option("--attack", sign_attack)->required()->check(CLI::ExistingFile);
    sign_cmd->add_option("--benign", sign_benign, "Benign pcap for the zero-false-positive check (repeatable)")
        ->check(CLI::ExistingFile);
    sign_cmd->add_option("--out", sign_out, "Signatures JSON")->required();

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Apply baseline and signatures to a capture");
    std::string det_baseline, det_in, det_out, det_format = "text", det_promote;
    std::vector<std::string> det_sigs;
    bool det_builtin = false, det_json = false;
    detect_cmd->add_option("--baseline", det_baseline)->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--signatures", det_sigs, "Signatures JSON (repeatable)")->check(CLI::ExistingFile);
    detect_cmd->add_flag("--builtin-signatures", det_builtin, "Add the two published tool fingerprints");
    detect_cmd->add_option("--in", det_in, "Capture to analyze")->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--format", det_format)->check(CLI::IsMember({"text", "csv", "json"}));
    detect_cmd->add_flag("--json", det_json, "Same as --format json");
    detect_cmd->add_option("--out", det_out, "Report file (default stdout)");
    detect_cmd->add_option("--promote-novel", det_promote, "Write novel candidates as FLAGGED_M2 signatures");

    // rulegen
    auto* rulegen_cmd = app.add_subcommand("rulegen", "Compile signatures into a rule file");
    std::vector<std::string> rg_sigs;
    std::string rg_out, rg_suri;
    std::uint32_t rg_sid_base = kMinSidBase;
    bool rg_builtin = false;
    rulegen_cmd->add_option("--signatures", rg_sigs)->check(CLI::ExistingFile);
    rulegen_cmd->add_flag("--builtin-signatures", rg_builtin);
    rulegen_cmd->add_option("--out", rg_out, "Rule DSL file")->required();
    rulegen_cmd->add_option("--sid-base", rg_sid_base)->check(CLI::Range(kMinSidBase, 0xffffffffu));
    rulegen_cmd->add_option("--suricata", rg_suri, "Also write the approximate byte-pattern export");

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "Replay a capture through a rule file");
    std::string fl_rules, fl_in, fl_out, fl_baseline, fl_alerts;
    bool fl_fail_closed = false;
    filter_cmd->add_option("--rules", fl_rules)->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--in", fl_in)->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--out", fl_out, "Pcap of passed frames")->required();
    filter_cmd->add_option("--baseline", fl_baseline, "Annotates drops with components")->check(CLI::ExistingFile);
    filter_cmd->add_option("--alerts", fl_alerts, "Alert log, JSON lines");
    filter_cmd->add_flag("--fail-closed", fl_fail_closed, "Drop frames whose MMS PDU fails to decode");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labelled synthetic capture");
    std::string sy_preset, sy_config, sy_out, sy_manifest, sy_dump;
    std::optional<std::uint64_t> sy_seed;
    auto* preset_opt = synth_cmd->add_option("--preset", sy_preset)->check(CLI::IsMember(preset_names()));
    synth_cmd->add_option("--config", sy_config, "Scenario config JSON")->check(CLI::ExistingFile)->excludes(preset_opt);
    synth_cmd->add_option("--out", sy_out, "Output pcap")->required();
    synth_cmd->add_option("--manifest", sy_manifest, "Ground-truth manifest JSON");
    synth_cmd->add_option("--seed", sy_seed, "Override the scenario seed");
    synth_cmd->add_option("--dump-config", sy_dump, "Write the effective scenario config");

    // report
    auto* report_cmd = app.add_subcommand("report", "Summarize MMS traffic in a capture");
    std::string rp_in, rp_csv, rp_out;
    bool rp_json = false;
    report_cmd->add_option("--in", rp_in)->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--csv", rp_csv, "Write extracted records as CSV");
    report_cmd->add_option("--out", rp_out, "Summary file (default stdout)");
    report_cmd->add_flag("--json", rp_json);

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "learn, diff, sign and rulegen in one run");
    std::string pp_benign, pp_attack, pp_out;
    pipe_cmd->add_option("--benign", pp_benign)->required()->check(CLI::ExistingFile);
    pipe_cmd->add_option("--attack", pp_attack)->required()->check(CLI::ExistingFile);
    pipe_cmd->add_option("--out", pp_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*learn_cmd) {
            Learned l = learn_from(learn_in);
            save_baseline(learn_out, l.baseline);
            for (std::size_t i = 0; i < learn_in.size(); ++i)
                std::cerr << summarize(learn_in[i], l.reports[i]);
            std::cerr << "read_whitelist=" << l.baseline.read_whitelist.size()
                      << " write_whitelist=" << l.baseline.write_whitelist.size()
                      << " ggio_map=" << l.baseline.ggio_map.size() << "\n";
            if (growth_window > 0) {
                std::cout << "# new whitelist keys per " << growth_window << " records\n";
                for (auto n : whitelist_growth(l.records, growth_window))
                    std::cout << n << "\n";
            }
            return kExitOk;
        }
        if (*diff_cmd) {
            Baseline b = load_baseline(diff_baseline);
            emit(diff_out, diff_text(diff(b, extract(read_pcap(diff_attack)).records)));
            return kExitOk;
        }
        if (*sign_cmd) {
            Baseline b = load_baseline(sign_baseline);
            auto attack = extract(read_pcap(sign_attack)).records;
            std::vector<ExtractedRecord> benign;
            for (const auto& p : sign_benign) {
                auto r = extract(read_pcap(p)).records;
                benign.insert(benign.end(), r.begin(), r.end());
            }
            DiffResult d = diff(b, attack);
            SignResult s = validate_and_sign(d.potential_write, d.potential_read, b.ggio_map, benign);
            save_signatures(sign_out, s.signatures);
            std::cerr << sign_text(s);
            return kExitOk;
        }
        if (*detect_cmd) {
            Baseline b = load_baseline(det_baseline);
            auto sigs = gather_signatures(det_sigs, det_builtin);
            Detection d = detect(extract(read_pcap(det_in)).records, b, sigs);
            ReportFormat fmt = parse_format(det_format, det_json);
            bool to_terminal = det_out.empty() || det_out == "-";
            emit(det_out, render_report(d, fmt, to_terminal && fmt == ReportFormat::Text && use_color()));
            if (!det_promote.empty())
                save_signatures(det_promote, promote_novel(d, b));
            return d.blocking_count() > 0 ? kExitBlocking : kExitOk;
        }
        if (*rulegen_cmd) {
            auto sigs = gather_signatures(rg_sigs, rg_builtin);
            auto rules = compile(sigs, rg_sid_base);
            write_file_atomic(rg_out, emit_dsl(rules));
            if (!rg_suri.empty())
                write_file_atomic(rg_suri, export_suricata_like(rules));
            std::cerr << "rules=" << rules.size() << "\n";
            return kExitOk;
        }
        if (*filter_cmd) {
            auto rules = parse_dsl(read_text_file(fl_rules));
            std::optional<Baseline> b;
            if (!fl_baseline.empty())
                b = load_baseline(fl_baseline);
            auto outcome = filter(read_pcap(fl_in), rules, b ? &*b : nullptr, FilterOptions{fl_fail_closed});
            write_filtered(outcome, fl_out);
            if (!fl_alerts.empty())
                write_file_atomic(fl_alerts, alert_log_jsonl(outcome));
            std::cerr << "frames=" << outcome.stats.frames << " passed=" << outcome.passed.size()
                      << " dropped=" << outcome.dropped.size() << " alerts=" << outcome.alerts.size()
                      << " decode_errors=" << outcome.stats.decode_errors << "\n";
            return kExitOk;
        }
        if (*synth_cmd) {
            if (sy_preset.empty() && sy_config.empty())
                throw CLI::RequiredError("--preset or --config");
            ScenarioConfig c = sy_config.empty() ? preset(sy_preset) : config_from_json(read_text_file(sy_config));
            if (sy_seed)
                c.seed = *sy_seed;
            Synthesis s = synthesize(c);
            write_pcap(sy_out, s.frames);
            if (!sy_manifest.empty())
                write_file_atomic(sy_manifest, manifest_to_json(s.manifest));
            if (!sy_dump.empty())
                write_file_atomic(sy_dump, config_to_json(c));
            std::cerr << "frames=" << s.frames.size() << " attack_frames=" << s.manifest.attack_frames().size()
                      << "\n";
            return kExitOk;
        }
        if (*report_cmd) {
            CaptureDecode decoded = decode_capture(read_pcap(rp_in));
            Extraction ex = extract(decoded);
            if (!rp_csv.empty()) {
                std::ostringstream csv;
                write_records_csv(csv, ex.records);
                write_file_atomic(rp_csv, csv.str());
            }
            std::string text;
            if (rp_json) {
                nlohmann::ordered_json j;
                const auto& r = ex.report;
                j["total_frames"] = r.total_frames;
                j["tcp_frames"] = r.tcp_frames;
                j["mms_pdus"] = r.mms_pdus;
                j["records"] = r.records;
                j["responses"] = r.responses;
                j["initiate_requests"] = r.initiate_requests;
                j["initiate_responses"] = r.initiate_responses;
                j["decode_errors"] = r.decode_errors;
                j["not_mms"] = r.not_mms;
                j["resyncs"] = r.resyncs;
                j["gaps"] = r.gaps;
                nlohmann::ordered_json per = nlohmann::ordered_json::object();
                for (const auto& [svc, n] : r.requests)
                    per[std::to_string(service_tag(svc))] = n;
                j["requests"] = per;
                j["ggio_map"] = build_ggio_map(decoded.pdus).map;
                text = j.dump(2) + "\n";
            } else {
                text = summarize(rp_in, ex.report);
                for (const auto& [node, ds] : build_ggio_map(decoded.pdus).map)
                    text += "  ggio " + node + " -> " + ds + "\n";
            }
            emit(rp_out, text);
            return kExitOk;
        }
        if (*pipe_cmd) {
            fs::create_directories(pp_out);
            fs::path dir(pp_out);
            Learned l = learn_from({pp_benign});
            auto attack = extract(read_pcap(pp_attack));
            DiffResult d = diff(l.baseline, attack.records);
            SignResult s = validate_and_sign(d.potential_write, d.potential_read, l.baseline.ggio_map, l.records);
            auto rules = compile(s.signatures);
            Detection det = detect(attack.records, l.baseline, s.signatures);

            std::string report = summarize(fs::path(pp_benign).filename().string(), l.reports.front()) +
                                 summarize(fs::path(pp_attack).filename().string(), attack.report) + diff_text(d) +
                                 sign_text(s) + render_report(det, ReportFormat::Text);
            save_baseline(dir / "baseline.json", l.baseline);
            save_signatures(dir / "signatures.json", s.signatures);
            write_file_atomic(dir / "rules.rules", emit_dsl(rules));
            write_file_atomic(dir / "report.txt", report);
            std::cerr << "signatures=" << s.signatures.size() << " rules=" << rules.size()
                      << " blocking_paths=" << det.blocking_count() << "\n";
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "mmsguard: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "mmsguard: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
