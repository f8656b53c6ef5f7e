#include "dune/kb.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace dune {
namespace {

enum class Tok { ident, bad_word, integer, string, lbrace, rbrace, lbrack, rbrack, comma, bad, eof };

struct Token {
    Tok kind = Tok::eof;
    std::string text;
    int line = 1;
    int column = 1;
    long long value = 0;
    bool overflow = false;
    bool unterminated = false;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::eof: return "end of input";
        case Tok::string: return "string";
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blank();
            Token t;
            t.line = line_;
            t.column = column_;
            if (pos_ >= text_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = text_[pos_];
            if (is_word_start(c)) {
                auto start = pos_;
                while (pos_ < text_.size() && is_word_char(text_[pos_])) advance();
                t.text = std::string(text_.substr(start, pos_ - start));
                t.kind = is_identifier(t.text) ? Tok::ident : Tok::bad_word;
            } else if (is_digit(c) || (c == '-' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
                auto start = pos_;
                advance();
                while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
                t.text = std::string(text_.substr(start, pos_ - start));
                t.kind = Tok::integer;
                auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
                t.overflow = ec != std::errc{};
            } else if (c == '"') {
                lex_string(t);
            } else {
                t.text = std::string(1, c);
                switch (c) {
                    case '{': t.kind = Tok::lbrace; break;
                    case '}': t.kind = Tok::rbrace; break;
                    case '[': t.kind = Tok::lbrack; break;
                    case ']': t.kind = Tok::rbrack; break;
                    case ',': t.kind = Tok::comma; break;
                    default: t.kind = Tok::bad; break;
                }
                advance();
                // Keep a multi-byte UTF-8 sequence in one token.
                while (t.kind == Tok::bad && pos_ < text_.size() &&
                       (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) {
                    t.text += text_[pos_];
                    advance();
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_word_start(char c) { return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
    static bool is_word_char(char c) { return is_word_start(c) || is_digit(c); }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else {
                return;
            }
        }
    }

    void lex_string(Token& t) {
        t.kind = Tok::string;
        advance();
        for (;;) {
            if (pos_ >= text_.size() || text_[pos_] == '\n') {
                t.unterminated = true;
                return;
            }
            char c = text_[pos_];
            if (c == '"') {
                advance();
                return;
            }
            if (c == '\\' && pos_ + 1 < text_.size()) {
                char e = text_[pos_ + 1];
                advance();
                advance();
                t.text += e == 'n' ? '\n' : e;
                continue;
            }
            t.text += c;
            advance();
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

bool is_clause_keyword(std::string_view word) {
    static const std::set<std::string_view> keywords{"accept", "reject", "death", "behavior", "output", "leaf", "group"};
    return keywords.contains(word);
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ParseResult run() {
        KnowledgeBase kb;
        while (peek().kind != Tok::eof) {
            if (peek().kind == Tok::ident && peek().text == "demon") {
                parse_demon(kb);
            } else {
                const auto& t = next();
                if (t.kind == Tok::ident || t.kind == Tok::bad_word) {
                    error(t, "unknown-keyword", "unknown keyword " + describe(t) + ", expected 'demon'");
                } else {
                    unexpected(t, "'demon'");
                }
                while (peek().kind != Tok::eof && !(peek().kind == Tok::ident && peek().text == "demon")) next();
            }
        }
        ParseResult result;
        result.diagnostics = std::move(diagnostics_);
        if (!has_errors(result.diagnostics)) result.kb = std::move(kb);
        return result;
    }

private:
    struct ClauseFailed {};

    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() {
        const Token& t = tokens_[pos_];
        if (t.kind != Tok::eof) ++pos_;
        return t;
    }

    void error(const Token& at, std::string code, std::string message) {
        diagnostics_.push_back({Severity::error, at.line, at.column, std::move(code), std::move(message)});
    }

    void unexpected(const Token& t, std::string_view expected) {
        if (t.kind == Tok::bad) {
            error(t, "unexpected-character", "unexpected character " + describe(t));
        } else if (t.kind == Tok::bad_word) {
            error(t, "invalid-identifier", "invalid identifier " + describe(t) + " (lowercase letters, digits and '_' only)");
        } else if (t.kind == Tok::string && t.unterminated) {
            error(t, "unterminated-string", "unterminated string");
        } else {
            error(t, "syntax", "expected " + std::string(expected) + ", found " + describe(t));
        }
    }

    const Token& expect(Tok kind, std::string_view what) {
        const Token& t = peek();
        if (t.kind != kind || (kind == Tok::string && t.unterminated)) {
            unexpected(t, what);
            throw ClauseFailed{};
        }
        return next();
    }

    int expect_int(std::string_view what, int lo, int hi, std::string_view code, std::string_view label) {
        const Token& t = expect(Tok::integer, what);
        if (t.overflow || t.value < lo || t.value > hi) {
            error(t, std::string(code),
                  std::string(label) + " " + t.text + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return std::clamp<long long>(t.value, lo, hi);
        }
        return static_cast<int>(t.value);
    }

    // Skips to the next clause keyword or closing brace of the demon body.
    void sync(int depth) {
        for (;;) {
            const Token& t = peek();
            if (t.kind == Tok::eof) return;
            if (depth == 0) {
                if (t.kind == Tok::rbrace) return;
                if (t.kind == Tok::ident && (is_clause_keyword(t.text) || t.text == "demon")) return;
            }
            if (t.kind == Tok::lbrace) ++depth;
            if (t.kind == Tok::rbrace) --depth;
            next();
        }
    }

    void parse_demon(KnowledgeBase& kb) {
        next();  // demon
        DemonDef def;
        const Token* name = nullptr;
        try {
            name = &expect(Tok::ident, "demon name");
            def.name = name->text;
            if (kb.find(def.name) || kb.locations.contains(def.name)) {
                error(*name, "duplicate-demon", "duplicate demon name '" + def.name + "'");
            }
            expect(Tok::lbrace, "'{'");
        } catch (const ClauseFailed&) {
            while (peek().kind != Tok::eof && !(peek().kind == Tok::ident && peek().text == "demon")) next();
            return;
        }
        const Token& open = tokens_[pos_ - 1];

        std::set<std::string> seen_clauses;
        std::set<FeatureId> seen_leaves;
        std::set<std::string> seen_groups;
        bool explicit_output = false;

        for (;;) {
            const Token& t = peek();
            if (t.kind == Tok::rbrace) {
                next();
                break;
            }
            if (t.kind == Tok::eof || (t.kind == Tok::ident && t.text == "demon")) {
                error(open, "unterminated-demon", "demon '" + def.name + "' is missing its closing '}'");
                break;
            }
            const Token& kw = next();
            int depth = 0;
            try {
                if (kw.kind != Tok::ident) {
                    unexpected(kw, "a clause keyword");
                    throw ClauseFailed{};
                }
                if (!is_clause_keyword(kw.text)) {
                    error(kw, "unknown-keyword", "unknown keyword '" + kw.text + "'");
                    throw ClauseFailed{};
                }
                if (kw.text != "leaf" && kw.text != "group" && !seen_clauses.insert(kw.text).second) {
                    error(kw, "duplicate-clause", "'" + kw.text + "' given more than once");
                }
                if (kw.text == "accept" || kw.text == "reject" || kw.text == "death") {
                    int v = expect_int("an integer threshold", kMinConfidence, kMaxConfidence, "threshold-range", "threshold");
                    (kw.text == "accept" ? def.thresholds.accept
                                         : kw.text == "reject" ? def.thresholds.reject : def.thresholds.death) = v;
                } else if (kw.text == "behavior") {
                    def.behavior = expect(Tok::ident, "a behavior identifier").text;
                } else if (kw.text == "output") {
                    def.output_text = expect(Tok::string, "a quoted output string").text;
                    explicit_output = true;
                } else if (kw.text == "leaf") {
                    const Token& f = expect(Tok::ident, "a feature identifier");
                    int w = expect_int("an integer weight", kMinConfidence, kMaxConfidence, "weight-range", "leaf weight");
                    FeatureId feature(f.text);
                    if (!seen_leaves.insert(feature).second) {
                        error(f, "duplicate-leaf", "duplicate leaf '" + f.text + "' in demon '" + def.name + "'");
                    } else {
                        def.leaves.emplace_back(std::move(feature), w);
                    }
                } else {
                    def.groups.push_back(parse_group(def, seen_groups, depth));
                }
            } catch (const ClauseFailed&) {
                sync(depth);
            }
        }

        if (!explicit_output) def.output_text = def.name;
        kb.locations.emplace(def.name, SourceLoc{name->line, name->column});
        kb.demons.push_back(std::move(def));
    }

    CriterionGroup parse_group(const DemonDef& def, std::set<std::string>& seen_groups, int& depth) {
        CriterionGroup group;
        const Token& name = expect(Tok::ident, "a group name");
        group.name = name.text;
        if (!seen_groups.insert(group.name).second) {
            error(name, "duplicate-group", "duplicate group '" + group.name + "' in demon '" + def.name + "'");
        }
        expect(Tok::lbrace, "'{'");
        depth = 1;

        const Token& members = expect(Tok::ident, "'members'");
        if (members.text != "members") {
            error(members, "unknown-keyword", "unknown keyword '" + members.text + "', expected 'members'");
            throw ClauseFailed{};
        }
        expect(Tok::lbrack, "'['");
        for (;;) {
            const Token& m = expect(Tok::ident, "a feature identifier");
            FeatureId feature(m.text);
            if (group.contains(feature)) {
                error(m, "duplicate-member", "feature '" + m.text + "' repeated in group '" + group.name + "'");
            } else {
                group.members.push_back(std::move(feature));
            }
            if (peek().kind == Tok::comma) {
                next();
                continue;
            }
            expect(Tok::rbrack, "',' or ']'");
            break;
        }

        if (peek().kind == Tok::ident && peek().text == "bonus") {
            next();
            expect(Tok::lbrack, "'['");
            std::size_t count = 0;
            for (;;) {
                const Token& at = peek();
                int b = expect_int("an integer bonus", 0, kMaxConfidence, "bonus-range", "bonus");
                ++count;
                if (count == group.members.size() + 1) {
                    error(at, "bonus-too-long",
                          "bonus list longer than the " + std::to_string(group.members.size()) + " members of group '" +
                              group.name + "'");
                }
                if (!group.schedule.cumulative.empty() && b < group.schedule.cumulative.back()) {
                    error(at, "bonus-not-nondecreasing", "bonus not nondecreasing");
                }
                group.schedule.cumulative.push_back(b);
                if (peek().kind == Tok::comma) {
                    next();
                    continue;
                }
                expect(Tok::rbrack, "',' or ']'");
                break;
            }
        } else if (peek().kind == Tok::ident) {
            const Token& t = next();
            error(t, "unknown-keyword", "unknown keyword '" + t.text + "', expected 'bonus' or '}'");
            throw ClauseFailed{};
        }
        expect(Tok::rbrace, "'}'");
        depth = 0;
        return group;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<Diagnostic> diagnostics_;
};

std::string quote(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out + '"';
}

}  // namespace

ParseResult parse_kb(const KbSource& src) {
    return Parser(Lexer(src.text).run()).run();
}

std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb, const BehaviorRegistry& behaviors) {
    std::vector<Diagnostic> out;
    std::set<std::string> names;
    for (const auto& def : kb.demons) {
        SourceLoc loc;
        if (auto it = kb.locations.find(def.name); it != kb.locations.end()) loc = it->second;
        auto report = [&](Severity severity, std::string code, std::string message) {
            out.push_back({severity, loc.line, loc.column, std::move(code), std::move(message)});
        };
        const auto& who = def.name;

        if (!is_identifier(def.name)) report(Severity::error, "invalid-identifier", "invalid demon name '" + who + "'");
        if (!names.insert(def.name).second) report(Severity::error, "duplicate-demon", "duplicate demon name '" + who + "'");

        std::set<FeatureId> leaves;
        for (const auto& [feature, weight] : def.leaves) {
            if (!leaves.insert(feature).second) {
                report(Severity::error, "duplicate-leaf", "duplicate leaf '" + feature.str() + "' in demon '" + who + "'");
            }
            if (weight < kMinConfidence || weight > kMaxConfidence) {
                report(Severity::error, "weight-range", "leaf '" + feature.str() + "' of demon '" + who + "' out of range");
            }
        }
        std::set<std::string> groups;
        for (const auto& g : def.groups) {
            const auto where = "group '" + g.name + "' of demon '" + who + "'";
            if (!groups.insert(g.name).second) report(Severity::error, "duplicate-group", "duplicate " + where);
            if (g.members.empty()) report(Severity::error, "empty-group", where + " has no members");
            std::set<FeatureId> members(g.members.begin(), g.members.end());
            if (members.size() != g.members.size()) report(Severity::error, "duplicate-member", where + " repeats a member");
            const auto& b = g.schedule.cumulative;
            if (b.size() > g.members.size()) report(Severity::error, "bonus-too-long", "bonus list of " + where + " is too long");
            if (!g.schedule.nondecreasing()) report(Severity::error, "bonus-not-nondecreasing", "bonus not nondecreasing in " + where);
            if (std::any_of(b.begin(), b.end(), [](int v) { return v < 0 || v > kMaxConfidence; })) {
                report(Severity::error, "bonus-range", "bonus of " + where + " out of range [0, 100]");
            }
            if (!b.empty() && g.full_bonus() == 0) {
                report(Severity::warning, "zero-bonus-group", where + " carries a bonus schedule that never awards anything");
            }
        }

        const auto& t = def.thresholds;
        if (!t.well_ordered()) {
            report(Severity::error, "threshold-order",
                   "thresholds of demon '" + who + "' violate -100 <= death (" + std::to_string(t.death) + ") <= reject (" +
                       std::to_string(t.reject) + ") < accept (" + std::to_string(t.accept) + ") <= 100");
        }
        if (!behaviors.contains(def.behavior)) {
            report(Severity::error, "unknown-behavior", "demon '" + who + "' uses unregistered behavior '" + def.behavior + "'");
        }
        if (int max = def.max_attainable(); max < t.accept) {
            report(Severity::warning, "unreachable-accept",
                   "demon '" + who + "' can never reach accept (max " + std::to_string(max) + " < " + std::to_string(t.accept) + ")");
        }
    }
    return out;
}

std::string serialize_kb(const KnowledgeBase& kb) {
    std::ostringstream out;
    bool first = true;
    for (const auto& def : kb.demons) {
        if (!first) out << '\n';
        first = false;
        out << "demon " << def.name << " {\n";
        out << "  accept " << def.thresholds.accept << '\n';
        out << "  reject " << def.thresholds.reject << '\n';
        out << "  death " << def.thresholds.death << '\n';
        if (def.behavior != kStandardBehavior) out << "  behavior " << def.behavior << '\n';
        if (def.output_text != def.name) out << "  output " << quote(def.output_text) << '\n';
        for (const auto& [feature, weight] : def.leaves) out << "  leaf " << feature.str() << ' ' << weight << '\n';
        for (const auto& g : def.groups) {
            out << "  group " << g.name << " { members [";
            for (std::size_t i = 0; i < g.members.size(); ++i) out << (i ? ", " : "") << g.members[i].str();
            out << ']';
            if (!g.schedule.cumulative.empty()) {
                out << " bonus [";
                for (std::size_t i = 0; i < g.schedule.cumulative.size(); ++i) {
                    out << (i ? ", " : "") << g.schedule.cumulative[i];
                }
                out << ']';
            }
            out << " }\n";
        }
        out << "}\n";
    }
    return out.str();
}

ParseResult load_kb_file(const std::filesystem::path& path, const BehaviorRegistry& behaviors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult failed;
        failed.diagnostics.push_back({Severity::error, 0, 0, "io", "cannot read '" + path.string() + "'"});
        return failed;
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto result = parse_kb({text.str(), path.string()});
    if (!result.kb) return result;
    auto semantic = validate_kb(*result.kb, behaviors);
    result.diagnostics.insert(result.diagnostics.end(), semantic.begin(), semantic.end());
    if (has_errors(result.diagnostics)) result.kb.reset();
    return result;
}

}  // namespace dune
