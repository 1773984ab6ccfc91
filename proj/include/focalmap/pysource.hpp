#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "focalmap/error.hpp"

// Structural reader for Python 3 source: strings, comments, brackets,
// logical lines, and the indentation-based statement tree. It is not a
// grammar; expressions stay as flat token runs. That is enough to locate
// def/class/import/assignment statements with exact line spans, and to
// reject the tokenization and indentation errors a real parser would.

namespace focalmap {

enum class TokKind { Name, Number, Str, Op };

struct Token {
    TokKind kind = TokKind::Op;
    std::size_t begin = 0;  // [begin, end) byte range in the decoded text
    std::size_t end = 0;
    int line = 1;      // physical line of the first byte
    int line_end = 1;  // physical line of the last byte (strings may span)
};

// One statement node. For suite statements (def/class/if/...) `head` runs
// through the colon and `children` holds the body; simple statements keep
// all their tokens in `head`.
struct Statement {
    int line = 1;
    int end_line = 1;  // last physical line, children included
    int indent = 0;
    bool suite = false;
    std::vector<Token> head;
    std::vector<Statement> children;
};

struct ParsedSource {
    std::string text;  // decoded source the token offsets point into
    std::vector<Statement> statements;
};

inline std::string_view tok_text(const std::string& text, const Token& t) {
    return std::string_view{text}.substr(t.begin, t.end - t.begin);
}

inline bool tok_is(const std::string& text, const Token& t, std::string_view s) {
    return tok_text(text, t) == s;
}

inline bool is_python_keyword(std::string_view s) {
    static const std::unordered_set<std::string_view> kw = {
        "False", "None",   "True",  "and",    "as",     "assert", "async",
        "await", "break",  "class", "continue", "def",  "del",    "elif",
        "else",  "except", "finally", "for",  "from",   "global", "if",
        "import", "in",    "is",    "lambda", "nonlocal", "not",  "or",
        "pass",  "raise",  "return", "try",   "while",  "with",   "yield"};
    return kw.count(s) > 0;
}

// Rebuilds the source text of a token run, collapsing any whitespace gap
// (including line breaks) to a single space. String literal contents pass
// through untouched because they are single tokens.
template <typename It>
std::string join_tokens(const std::string& text, It first, It last) {
    std::string out;
    std::size_t prev_end = 0;
    for (It it = first; it != last; ++it) {
        if (!out.empty() && it->begin > prev_end) out += ' ';
        out += tok_text(text, *it);
        prev_end = it->end;
    }
    return out;
}

namespace detail {

inline bool is_name_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c >= 0x80;
}

inline bool is_name_cont(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

inline bool valid_utf8(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        if (c < 0x80) {
            i += 1;
            continue;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        i += extra + 1;
    }
    return true;
}

inline std::string latin1_to_utf8(const std::string& s) {
    std::string out;
    out.reserve(s.size() + s.size() / 4);
    for (const char ch : s) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            out += ch;
        } else {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
    }
    return out;
}

}  // namespace detail

// Decodes raw file bytes into the text every position refers to: strips a
// UTF-8 BOM, validates UTF-8 with a Latin-1 fallback, and normalizes CRLF
// and lone CR to LF. NUL bytes are a tokenization error.
inline std::string decode_source(std::string bytes) {
    if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
        static_cast<unsigned char>(bytes[1]) == 0xBB &&
        static_cast<unsigned char>(bytes[2]) == 0xBF)
        bytes.erase(0, 3);

    const std::size_t nul = bytes.find('\0');
    if (nul != std::string::npos) {
        const int line =
            1 + static_cast<int>(std::count(bytes.begin(), bytes.begin() + nul, '\n'));
        throw ParseError(line, "source code cannot contain null bytes");
    }

    if (!detail::valid_utf8(bytes)) bytes = detail::latin1_to_utf8(bytes);

    std::string out;
    out.reserve(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] == '\r') {
            out += '\n';
            if (i + 1 < bytes.size() && bytes[i + 1] == '\n') ++i;
        } else {
            out += bytes[i];
        }
    }
    return out;
}

namespace detail {

struct LogicalLine {
    int line = 1;
    int indent = 0;
    std::vector<Token> tokens;
};

class Tokenizer {
public:
    explicit Tokenizer(const std::string& text) : text_(text), n_(text.size()) {}

    std::vector<LogicalLine> run() {
        std::vector<LogicalLine> lines;
        int indent = 0;
        while (start_of_line(indent)) {
            LogicalLine ll;
            ll.line = line_;
            ll.indent = indent;
            scan_logical(ll);
            if (!ll.tokens.empty()) lines.push_back(std::move(ll));
        }
        return lines;
    }

private:
    const std::string& text_;
    std::size_t n_;
    std::size_t pos_ = 0;
    int line_ = 1;

    // Consumes blank and comment-only lines; positions at the first token
    // character and reports its line's indent. False at end of input.
    bool start_of_line(int& indent) {
        while (true) {
            indent = 0;
            while (pos_ < n_ && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                 text_[pos_] == '\f')) {
                if (text_[pos_] != '\f') ++indent;
                ++pos_;
            }
            if (pos_ >= n_) return false;
            if (text_[pos_] == '\n') {
                ++pos_;
                ++line_;
                continue;
            }
            if (text_[pos_] == '#') {
                while (pos_ < n_ && text_[pos_] != '\n') ++pos_;
                continue;
            }
            return true;
        }
    }

    struct Bracket {
        char open;
        int line;
    };

    void scan_logical(LogicalLine& ll) {
        std::vector<Bracket> brackets;
        while (true) {
            if (pos_ >= n_) {
                if (!brackets.empty())
                    throw ParseError(brackets.front().line,
                                     std::string("'") + brackets.front().open +
                                         "' was never closed");
                return;
            }
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                while (pos_ < n_ && text_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '\n') {
                ++pos_;
                ++line_;
                if (brackets.empty()) return;
                continue;
            }
            if (c == '\\') {
                if (pos_ + 1 < n_ && text_[pos_ + 1] == '\n') {
                    pos_ += 2;
                    ++line_;
                    continue;
                }
                if (pos_ + 1 >= n_)
                    throw ParseError(line_, "unexpected end of file in line continuation");
                throw ParseError(
                    line_, "unexpected character after line continuation character");
            }
            if (is_name_start(static_cast<unsigned char>(c))) {
                scan_name_or_prefixed_string(ll);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < n_ &&
                 std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
                scan_number(ll);
                continue;
            }
            if (c == '\'' || c == '"') {
                scan_string(ll, pos_, line_);
                continue;
            }
            scan_operator(ll, brackets);
        }
    }

    void scan_name_or_prefixed_string(LogicalLine& ll) {
        const std::size_t begin = pos_;
        const int start_line = line_;
        while (pos_ < n_ && is_name_cont(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string_view name =
            std::string_view{text_}.substr(begin, pos_ - begin);
        if (name.size() <= 2 && pos_ < n_ &&
            (text_[pos_] == '\'' || text_[pos_] == '"')) {
            bool prefix = true;
            for (const char p : name)
                if (std::string_view{"rRbBuUfF"}.find(p) == std::string_view::npos)
                    prefix = false;
            if (prefix) {
                scan_string(ll, begin, start_line);
                return;
            }
        }
        ll.tokens.push_back({TokKind::Name, begin, pos_, start_line, start_line});
    }

    void scan_number(LogicalLine& ll) {
        const std::size_t begin = pos_;
        const int start_line = line_;
        auto digits = [&](auto pred) {
            while (pos_ < n_ &&
                   (pred(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
        };
        if (text_[pos_] == '0' && pos_ + 1 < n_ &&
            std::string_view{"xXoObB"}.find(text_[pos_ + 1]) != std::string_view::npos) {
            pos_ += 2;
            digits([](unsigned char c) { return std::isxdigit(c) != 0; });
        } else {
            digits([](unsigned char c) { return std::isdigit(c) != 0; });
            if (pos_ < n_ && text_[pos_] == '.' && pos_ + 1 < n_ &&
                std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
                ++pos_;
                digits([](unsigned char c) { return std::isdigit(c) != 0; });
            }
            if (pos_ < n_ && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t k = pos_ + 1;
                if (k < n_ && (text_[k] == '+' || text_[k] == '-')) ++k;
                if (k < n_ && std::isdigit(static_cast<unsigned char>(text_[k]))) {
                    pos_ = k;
                    digits([](unsigned char c) { return std::isdigit(c) != 0; });
                }
            }
            if (pos_ < n_ && (text_[pos_] == 'j' || text_[pos_] == 'J')) ++pos_;
        }
        ll.tokens.push_back({TokKind::Number, begin, pos_, start_line, start_line});
    }

    // `begin` points at the prefix (if any); pos_ at the opening quote.
    // Backslash always consumes the next character, which matches CPython
    // termination scanning even for raw strings.
    void scan_string(LogicalLine& ll, std::size_t begin, int start_line) {
        const char q = text_[pos_];
        const bool triple =
            pos_ + 2 < n_ && text_[pos_ + 1] == q && text_[pos_ + 2] == q;
        pos_ += triple ? 3 : 1;
        while (true) {
            if (pos_ >= n_)
                throw ParseError(start_line,
                                 triple ? "unterminated triple-quoted string literal"
                                        : "unterminated string literal");
            const char c = text_[pos_];
            if (c == '\\') {
                if (pos_ + 1 < n_ && text_[pos_ + 1] == '\n') ++line_;
                pos_ += pos_ + 1 < n_ ? 2 : 1;
                continue;
            }
            if (c == '\n') {
                if (!triple)
                    throw ParseError(line_,
                                     "unterminated string literal (detected at end of line)");
                ++line_;
                ++pos_;
                continue;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < n_ && text_[pos_ + 1] == q && text_[pos_ + 2] == q) {
                    pos_ += 3;
                    break;
                }
                if (pos_ + 2 == n_ && text_[pos_ + 1] == q) {
                    // closing pair would run past the end; let EOF report it
                    ++pos_;
                    continue;
                }
                ++pos_;
                continue;
            }
            ++pos_;
        }
        ll.tokens.push_back({TokKind::Str, begin, pos_, start_line, line_});
    }

    void scan_operator(LogicalLine& ll, std::vector<Bracket>& brackets) {
        static constexpr std::array<std::string_view, 5> three = {"**=", "//=", ">>=",
                                                                  "<<=", "..."};
        static constexpr std::array<std::string_view, 19> two = {
            "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=",
            "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@="};
        static constexpr std::string_view singles = "+-*/%@&|^~<>=.,:;()[]{}";

        const std::string_view rest = std::string_view{text_}.substr(pos_);
        std::size_t len = 0;
        for (const auto op : three)
            if (rest.substr(0, 3) == op) len = 3;
        if (len == 0)
            for (const auto op : two)
                if (rest.substr(0, 2) == op) len = 2;
        if (len == 0 && singles.find(rest[0]) != std::string_view::npos) len = 1;
        if (len == 0)
            throw ParseError(line_,
                             std::string("invalid character '") + rest[0] + "'");

        const char c = text_[pos_];
        if (len == 1 && (c == '(' || c == '[' || c == '{')) {
            brackets.push_back({c, line_});
        } else if (len == 1 && (c == ')' || c == ']' || c == '}')) {
            const char open = c == ')' ? '(' : c == ']' ? '[' : '{';
            if (brackets.empty())
                throw ParseError(line_, std::string("unmatched '") + c + "'");
            if (brackets.back().open != open)
                throw ParseError(line_, std::string("closing bracket '") + c +
                                            "' does not match opening bracket '" +
                                            brackets.back().open + "'");
            brackets.pop_back();
        }
        ll.tokens.push_back({TokKind::Op, pos_, pos_ + len, line_, line_});
        pos_ += len;
    }
};

inline bool is_compound_opener(const std::string& text, const std::vector<Token>& toks) {
    if (toks.empty() || toks[0].kind != TokKind::Name) return false;
    const std::string_view head = tok_text(text, toks[0]);
    static const std::unordered_set<std::string_view> hard = {
        "if",  "elif", "else",  "for",   "while", "try",
        "with", "def", "class", "async", "except", "finally"};
    static const std::unordered_set<std::string_view> soft = {"match", "case"};
    if (hard.count(head)) return true;
    if (!soft.count(head) || toks.size() < 2) return false;
    // Soft keywords open a suite only when not used as a plain name:
    // `match = ...`, `match(...)`, `match.x`, `match[0]`, `match: int = 0`.
    if (toks[1].kind != TokKind::Op) return true;
    const std::string_view nxt = tok_text(text, toks[1]);
    return nxt != "=" && nxt != "." && nxt != "(" && nxt != "[" && nxt != "," &&
           nxt != ":" && nxt != ":=" && nxt != ";";
}

inline int depth0_colon(const std::string& text, const std::vector<Token>& toks) {
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokKind::Op) continue;
        const std::string_view t = tok_text(text, toks[i]);
        if (t == "(" || t == "[" || t == "{") ++depth;
        else if (t == ")" || t == "]" || t == "}") --depth;
        else if (t == ":" && depth == 0) return static_cast<int>(i);
    }
    return -1;
}

inline void reject_python2_statement(const std::string& text,
                                     const std::vector<Token>& toks) {
    if (toks.size() < 2 || toks[0].kind != TokKind::Name) return;
    const std::string_view head = tok_text(text, toks[0]);
    if (head != "print" && head != "exec") return;
    const Token& next = toks[1];
    const bool py2_form = next.kind == TokKind::Name || next.kind == TokKind::Number ||
                          next.kind == TokKind::Str ||
                          (next.kind == TokKind::Op && tok_is(text, next, ">>"));
    if (py2_form)
        throw ParseError(toks[0].line, "Missing parentheses in call to '" +
                                           std::string(head) + "'");
}

class TreeBuilder {
public:
    explicit TreeBuilder(const std::string& text) : text_(text) {}

    std::vector<Statement> run(const std::vector<LogicalLine>& lines) {
        std::vector<Statement> root;
        frames_ = {{0, &root}};
        for (const auto& ll : lines) process(ll);
        if (pending_)
            throw ParseError(pending_->line, "expected an indented block");
        for (auto& st : root) finalize(st);
        return root;
    }

private:
    struct Frame {
        int indent;
        std::vector<Statement>* out;
    };

    const std::string& text_;
    std::vector<Frame> frames_;
    Statement* pending_ = nullptr;  // suite opener whose block must follow
    int pending_indent_ = 0;

    void process(const LogicalLine& ll) {
        if (pending_) {
            if (ll.indent <= pending_indent_)
                throw ParseError(ll.line, "expected an indented block");
            frames_.push_back({ll.indent, &pending_->children});
            pending_ = nullptr;
        } else {
            if (ll.indent > frames_.back().indent)
                throw ParseError(ll.line, "unexpected indent");
            while (ll.indent < frames_.back().indent) frames_.pop_back();
            if (ll.indent != frames_.back().indent)
                throw ParseError(ll.line,
                                 "unindent does not match any outer indentation level");
        }
        emit(ll, *frames_.back().out);
    }

    static Statement make_simple(const std::vector<Token>& toks, int indent) {
        Statement st;
        st.line = toks.front().line;
        st.indent = indent;
        st.head = toks;
        return st;
    }

    void emit_simple_run(std::vector<Token> toks, int indent,
                         std::vector<Statement>& out) {
        // Split on statement separators at bracket depth zero.
        std::vector<Token> seg;
        int depth = 0;
        auto flush = [&] {
            if (seg.empty()) return;
            reject_python2_statement(text_, seg);
            out.push_back(make_simple(seg, indent));
            seg.clear();
        };
        for (const auto& t : toks) {
            if (t.kind == TokKind::Op) {
                const std::string_view s = tok_text(text_, t);
                if (s == "(" || s == "[" || s == "{") ++depth;
                if (s == ")" || s == "]" || s == "}") --depth;
                if (s == ";" && depth == 0) {
                    flush();
                    continue;
                }
            }
            seg.push_back(t);
        }
        flush();
    }

    void emit(const LogicalLine& ll, std::vector<Statement>& out) {
        const int colon = is_compound_opener(text_, ll.tokens)
                              ? depth0_colon(text_, ll.tokens)
                              : -1;
        if (colon < 0) {
            emit_simple_run(ll.tokens, ll.indent, out);
            return;
        }
        Statement st;
        st.line = ll.tokens.front().line;
        st.indent = ll.indent;
        st.suite = true;
        st.head.assign(ll.tokens.begin(), ll.tokens.begin() + colon + 1);
        std::vector<Token> rest(ll.tokens.begin() + colon + 1, ll.tokens.end());
        if (rest.empty()) {
            out.push_back(std::move(st));
            pending_ = &out.back();
            pending_indent_ = ll.indent;
        } else {
            emit_simple_run(std::move(rest), ll.indent, st.children);
            out.push_back(std::move(st));
        }
    }

    static int finalize(Statement& st) {
        int end = st.head.empty() ? st.line : st.head.back().line_end;
        for (auto& c : st.children) end = std::max(end, finalize(c));
        st.end_line = end;
        return end;
    }
};

}  // namespace detail

// Full structural parse of raw file bytes. Throws ParseError with the
// 1-based line of the offending construct.
inline ParsedSource parse_python(std::string raw_bytes) {
    ParsedSource out;
    out.text = decode_source(std::move(raw_bytes));
    detail::Tokenizer tokenizer(out.text);
    const std::vector<detail::LogicalLine> lines = tokenizer.run();
    detail::TreeBuilder builder(out.text);
    out.statements = builder.run(lines);
    return out;
}

// One-line rendering of a source snippet: comments dropped, inter-token
// gaps (newlines included) become single spaces, string literals kept
// verbatim. The snippet must be bracket-balanced.
inline std::string collapse_source(const std::string& snippet) {
    detail::Tokenizer tokenizer(snippet);
    std::string out;
    for (const auto& ll : tokenizer.run()) {
        const std::string joined = join_tokens(snippet, ll.tokens.begin(), ll.tokens.end());
        if (!out.empty() && !joined.empty()) out += ' ';
        out += joined;
    }
    return out;
}

}  // namespace focalmap
