#include "mmsguard/rulegen.h"
#include "mmsguard/error.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mmsguard {

std::vector<NidsRule> compile(std::span<const AttackSignature> signatures, std::uint32_t sid_base)
{
    if (sid_base < kMinSidBase)
        throw std::invalid_argument("sid_base must be at least " + std::to_string(kMinSidBase));

    std::vector<const AttackSignature*> ordered;
    for (const auto& s : signatures)
        ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const AttackSignature* a, const AttackSignature* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < ordered.size(); ++i)
        if (ordered[i]->id == ordered[i - 1]->id)
            throw DuplicateSignatureId("duplicate signature id " + ordered[i]->id);

    std::vector<NidsRule> rules;
    std::uint32_t sid = sid_base;
    for (const auto* s : ordered) {
        NidsRule r;
        r.sid = sid++;
        r.action = s->severity == Severity::Blocking ? RuleAction::Drop : RuleAction::Alert;
        r.match = s->predicate;
        r.msg = s->description + " [" + origin_name(s->origin) + " " + s->id + "]";
        rules.push_back(std::move(r));
    }
    return rules;
}

namespace {

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

struct Token
{
    std::string text; // quotes removed and escapes resolved in the value part
    std::string key;
    std::string value;
    bool quoted = false;
    std::size_t column = 0; // 1-based
};

std::vector<Token> tokenize(std::string_view line, std::size_t line_no)
{
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        if (i >= line.size())
            break;
        Token tok;
        tok.column = i + 1;
        bool in_key = true;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            char c = line[i];
            if (in_key && c == '=') {
                in_key = false;
                tok.key = tok.text;
                tok.text += c;
                ++i;
                if (i < line.size() && line[i] == '"') {
                    tok.quoted = true;
                    ++i;
                    bool closed = false;
                    while (i < line.size()) {
                        char q = line[i++];
                        if (q == '\\') {
                            if (i >= line.size())
                                break;
                            char e = line[i++];
                            tok.value += e == 'n' ? '\n' : e;
                        } else if (q == '"') {
                            closed = true;
                            break;
                        } else {
                            tok.value += q;
                        }
                    }
                    if (!closed)
                        throw ParseError(line_no, tok.column, tokens.size() + 1, "unterminated string");
                    if (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                        throw ParseError(line_no, i + 1, tokens.size() + 1, "text after closing quote");
                    break;
                }
                continue;
            }
            tok.text += c;
            if (!in_key)
                tok.value += c;
            ++i;
        }
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

template <typename T>
bool parse_uint(std::string_view s, T& out)
{
    if (s.empty())
        return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

std::string orident_text(const FieldPredicate& p)
{
    switch (p.or_ident_form) {
    case OrIdentForm::Absent: return "absent";
    case OrIdentForm::AllZero64: return "zero64";
    case OrIdentForm::Exact: return "hex:" + to_hex(p.or_ident);
    case OrIdentForm::Any: return "any";
    }
    return "any";
}

} // namespace

std::string emit_dsl(std::span<const NidsRule> rules)
{
    std::ostringstream out;
    for (const auto& r : rules) {
        const FieldPredicate& m = r.match;
        out << "RULE " << r.sid << ' ' << (r.action == RuleAction::Drop ? "drop" : "alert")
            << " service=" << service_tag(m.service);
        if (m.time_acc)
            out << " acc=" << hex_byte(m.time_acc->oper_tm) << ',' << hex_byte(m.time_acc->t);
        out << " orident=" << orident_text(m);
        if (m.domain)
            out << " domain=" << quote(*m.domain);
        if (m.item)
            out << (m.item_match == ItemMatch::Exact ? " item=" : " item_prefix=") << quote(*m.item);
        out << " rev=" << r.rev << " msg=" << quote(r.msg) << '\n';
    }
    return out.str();
}

std::vector<NidsRule> parse_dsl(std::string_view text)
{
    std::vector<NidsRule> rules;
    std::map<std::uint32_t, std::size_t> sid_lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#')
            continue;

        auto tokens = tokenize(line, line_no);
        auto err = [&](std::size_t idx, const std::string& why) -> ParseError {
            std::size_t col = idx < tokens.size() ? tokens[idx].column : line.size() + 1;
            return ParseError(line_no, col, idx + 1, why);
        };

        if (tokens[0].text != "RULE")
            throw err(0, "expected RULE, found \"" + tokens[0].text + "\"");
        NidsRule rule;
        if (tokens.size() < 2 || !parse_uint(tokens[1].text, rule.sid))
            throw err(1, "expected numeric sid");
        if (tokens.size() < 3 || (tokens[2].text != "drop" && tokens[2].text != "alert"))
            throw err(2, "expected drop or alert");
        rule.action = tokens[2].text == "drop" ? RuleAction::Drop : RuleAction::Alert;

        std::map<std::string, std::size_t> seen;
        for (std::size_t i = 3; i < tokens.size(); ++i) {
            const Token& t = tokens[i];
            if (t.key.empty())
                throw err(i, "expected key=value, found \"" + t.text + "\"");
            if (!seen.emplace(t.key, i).second)
                throw err(i, "duplicate key " + t.key);
            const std::string& v = t.value;
            bool needs_quote = t.key == "domain" || t.key == "item" || t.key == "item_prefix" || t.key == "msg";
            if (needs_quote != t.quoted)
                throw err(i, needs_quote ? t.key + " takes a quoted string" : t.key + " takes a bare value");

            if (t.key == "service") {
                std::uint32_t tag;
                if (!parse_uint(v, tag))
                    throw err(i, "service must be an integer tag");
                rule.match.service = static_cast<Service>(tag);
            } else if (t.key == "acc") {
                auto comma = v.find(',');
                auto a = comma == std::string::npos ? std::nullopt : parse_hex_byte(v.substr(0, comma));
                auto b = comma == std::string::npos ? std::nullopt : parse_hex_byte(v.substr(comma + 1));
                if (!a || !b)
                    throw err(i, "acc must be 0xhh,0xhh");
                rule.match.time_acc = TimeAccuracy{*a, *b};
            } else if (t.key == "orident") {
                if (v == "absent")
                    rule.match.or_ident_form = OrIdentForm::Absent;
                else if (v == "zero64")
                    rule.match.or_ident_form = OrIdentForm::AllZero64;
                else if (v == "any")
                    rule.match.or_ident_form = OrIdentForm::Any;
                else if (v.starts_with("hex:")) {
                    auto bytes = from_hex(std::string_view(v).substr(4));
                    if (!bytes)
                        throw err(i, "orident hex is malformed");
                    rule.match.or_ident_form = OrIdentForm::Exact;
                    rule.match.or_ident = *bytes;
                } else {
                    throw err(i, "orident must be absent, zero64, any or hex:..");
                }
            } else if (t.key == "domain") {
                rule.match.domain = v;
            } else if (t.key == "item" || t.key == "item_prefix") {
                if (rule.match.item)
                    throw err(i, "item and item_prefix are exclusive");
                rule.match.item = v;
                rule.match.item_match = t.key == "item" ? ItemMatch::Exact : ItemMatch::Prefix;
            } else if (t.key == "rev") {
                unsigned rev;
                if (!parse_uint(v, rev) || rev > 1000000)
                    throw err(i, "rev must be a small integer");
                rule.rev = int(rev);
            } else if (t.key == "msg") {
                rule.msg = v;
            } else {
                throw err(i, "unknown key " + t.key);
            }
        }
        if (!seen.contains("service"))
            throw err(tokens.size(), "missing service=");
        if (!seen.contains("msg"))
            throw err(tokens.size(), "missing msg=");
        if (auto [it, fresh] = sid_lines.emplace(rule.sid, line_no); !fresh)
            throw err(1, "sid " + std::to_string(rule.sid) + " already used on line " + std::to_string(it->second));
        rules.push_back(std::move(rule));
    }
    return rules;
}

namespace {

std::string content_hex(const Bytes& b)
{
    std::string out = "|";
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (i)
            out += ' ';
        out += to_hex(ByteView(&b[i], 1));
    }
    return out + "|";
}

std::string suricata_text(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == ';' || c == '"' || c == '\\')
            out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

} // namespace

std::string export_suricata_like(std::span<const NidsRule> rules)
{
    std::ostringstream out;
    out << "# Approximate export: MMS fields are matched as BER byte patterns with relative offsets.\n"
           "# Without full TCP reassembly and MMS decoding these rules can miss or over-match;\n"
           "# the native .rules file is authoritative.\n";
    for (const auto& r : rules) {
        const FieldPredicate& m = r.match;
        out << (r.action == RuleAction::Drop ? "drop" : "alert") << " tcp any any -> any " << NidsRule::kDstPort
            << " (msg:\"" << suricata_text(r.msg) << "\"; flow:to_server; ";
        std::uint32_t tag = service_tag(m.service);
        if (tag < 0x1f)
            out << "content:\"" << content_hex(Bytes{std::uint8_t(0xa0 | tag)}) << "\"; ";
        if (m.domain)
            out << "content:\"" << suricata_text(*m.domain) << "\"; ";
        if (m.item)
            out << "content:\"" << suricata_text(*m.item) << "\"; ";
        if (m.time_acc) {
            // operTm: UtcTime TLV 91 08, quality is its 8th content byte.
            out << "content:\"|91 08|\"; content:\"" << content_hex(Bytes{m.time_acc->oper_tm})
                << "\"; distance:7; within:1; ";
        }
        switch (m.or_ident_form) {
        case OrIdentForm::Absent:
            // origin structure holding only a one-byte orCat
            out << "content:\"|a2 03 85 01|\"; " << (m.time_acc ? "distance:0; " : "");
            break;
        case OrIdentForm::AllZero64:
            out << "content:\"" << content_hex(Bytes(66, 0x00)).replace(1, 5, "89 40") << "\"; "
                << (m.time_acc ? "distance:0; " : "");
            break;
        case OrIdentForm::Exact: {
            Bytes pat{0x89};
            if (m.or_ident.size() < 0x80) {
                pat.push_back(std::uint8_t(m.or_ident.size()));
                pat.insert(pat.end(), m.or_ident.begin(), m.or_ident.end());
                out << "content:\"" << content_hex(pat) << "\"; " << (m.time_acc ? "distance:0; " : "");
            }
            break;
        }
        case OrIdentForm::Any: break;
        }
        if (m.time_acc) {
            // T follows ctlNum.
            out << "content:\"|91 08|\"; distance:0; content:\"" << content_hex(Bytes{m.time_acc->t})
                << "\"; distance:7; within:1; ";
        }
        out << "sid:" << r.sid << "; rev:" << r.rev << ";)\n";
    }
    return out.str();
}

} // namespace mmsguard
