#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "focalmap/pysource.hpp"

namespace focalmap {

struct Position {
    int line = 1;      // 1-based line of the def/class keyword's line
    int line_end = 1;  // last line of the body, inclusive
    int indent = 0;    // leading whitespace chars, tabs count as one

    friend bool operator==(const Position&, const Position&) = default;
};

struct ImportName {
    std::string name;
    std::optional<std::string> alias;

    friend bool operator==(const ImportName&, const ImportName&) = default;
};

struct ImportRecord {
    enum class Kind { Plain, From };
    Kind kind = Kind::Plain;
    std::string module;      // empty for plain imports and pure-relative froms
    int relative_level = 0;  // leading dots; > 0 only for from-imports
    std::vector<ImportName> names;

    friend bool operator==(const ImportRecord&, const ImportRecord&) = default;
};

struct CalledName {
    std::string dotted_path;  // attribute chain as written, e.g. client.connection_made
    std::string terminal;     // last dot-separated segment

    friend bool operator==(const CalledName&, const CalledName&) = default;
};

inline CalledName make_called_name(std::string dotted) {
    const std::size_t dot = dotted.rfind('.');
    std::string terminal = dot == std::string::npos ? dotted : dotted.substr(dot + 1);
    return {std::move(dotted), std::move(terminal)};
}

struct MethodRecord {
    std::string name;
    Position position;
    std::string signature_text;  // `def` through closing paren + return annotation
    std::optional<std::string> enclosing_class;
    std::vector<std::string> decorator_names;
    std::vector<CalledName> called_names;  // body order, deduplicated by dotted_path
    // `name = Other(...)` assignments in the body: name → first RHS name.
    // Lets call filtering chase locals back to their origin; not serialized.
    std::map<std::string, std::string> local_bindings;
};

struct AttributeRecord {
    std::string name;
    std::string text;  // whole assignment, whitespace-collapsed

    friend bool operator==(const AttributeRecord&, const AttributeRecord&) = default;
};

struct ClassRecord {
    std::string name;
    Position position;
    std::vector<std::string> base_exprs;
    std::vector<MethodRecord> methods;
    std::vector<AttributeRecord> class_attributes;     // class-body level
    std::vector<AttributeRecord> instance_attributes;  // self.x = ... in __init__
    // header through the colon, whitespace-collapsed; context rendering
    // needs it and it is cheap to keep; not serialized
    std::string declaration_text;
};

struct SourceFileRef {
    std::string relative_path;  // forward slashes, ends in .py
    std::string module_name;    // dotted, best effort
    bool importable = true;     // false when a segment is not an identifier
};

struct FileIndex {
    SourceFileRef file;
    std::vector<ImportRecord> imports;  // source order, any nesting depth
    std::vector<ClassRecord> classes;   // flat, sorted by start line
    std::vector<MethodRecord> functions;  // module level only
    bool parse_ok = true;
    std::optional<std::string> error_note;
};

namespace detail {

inline bool head_is(const std::string& text, const Statement& st, std::size_t i,
                    std::string_view s) {
    return i < st.head.size() && tok_is(text, st.head[i], s);
}

// def position within the head: 0, or 1 behind `async`. -1 when not a def.
inline int def_keyword_index(const std::string& text, const Statement& st) {
    if (!st.suite || st.head.empty()) return -1;
    if (st.head[0].kind == TokKind::Name && tok_is(text, st.head[0], "def")) return 0;
    if (st.head.size() > 1 && tok_is(text, st.head[0], "async") &&
        tok_is(text, st.head[1], "def"))
        return 1;
    return -1;
}

inline bool is_class_statement(const std::string& text, const Statement& st) {
    return st.suite && !st.head.empty() && st.head[0].kind == TokKind::Name &&
           tok_is(text, st.head[0], "class");
}

inline bool is_decorator(const std::string& text, const Statement& st) {
    return !st.suite && !st.head.empty() && st.head[0].kind == TokKind::Op &&
           tok_is(text, st.head[0], "@");
}

// `@a.b.c(args)` contributes "a.b.c"; non-chain decorator expressions
// contribute nothing.
inline std::optional<std::string> decorator_name(const std::string& text,
                                                 const Statement& st) {
    std::string out;
    std::size_t i = 1;
    while (i < st.head.size() && st.head[i].kind == TokKind::Name &&
           !is_python_keyword(tok_text(text, st.head[i]))) {
        out += tok_text(text, st.head[i]);
        if (i + 1 < st.head.size() && tok_is(text, st.head[i + 1], ".")) {
            out += '.';
            i += 2;
        } else {
            break;
        }
    }
    if (out.empty() || out.back() == '.') return std::nullopt;
    return out;
}

// Statements that can only legally appear as suite openers; seeing one as
// a simple statement means the file is not valid Python 3.
inline void reject_bare_compound(const std::string& text, const Statement& st) {
    if (st.suite || st.head.empty() || st.head[0].kind != TokKind::Name) return;
    static const std::set<std::string_view> heads = {
        "def", "class", "if",   "elif",    "else",  "for",
        "while", "try", "with", "finally", "except", "async"};
    if (heads.count(tok_text(text, st.head[0])))
        throw ParseError(st.line, "invalid syntax");
}

// Collects call-target chains from one statement's own tokens. Chains stop
// at any non-name link; a chain preceded by `def`/`class` is a definition,
// not a call.
inline void scan_calls(const std::string& text, const std::vector<Token>& toks,
                       std::vector<CalledName>& out, std::set<std::string>& seen) {
    for (std::size_t i = 1; i < toks.size(); ++i) {
        if (toks[i].kind != TokKind::Op || !tok_is(text, toks[i], "(")) continue;
        std::size_t j = i - 1;
        if (toks[j].kind != TokKind::Name || is_python_keyword(tok_text(text, toks[j])))
            continue;
        std::size_t first = j;
        while (first >= 2 && toks[first - 1].kind == TokKind::Op &&
               tok_is(text, toks[first - 1], ".") &&
               toks[first - 2].kind == TokKind::Name &&
               !is_python_keyword(tok_text(text, toks[first - 2])))
            first -= 2;
        if (first >= 1 && toks[first - 1].kind == TokKind::Name) {
            const std::string_view prev = tok_text(text, toks[first - 1]);
            if (prev == "def" || prev == "class") continue;
        }
        std::string dotted;
        for (std::size_t k = first; k <= j; k += 2) {
            if (!dotted.empty()) dotted += '.';
            dotted += tok_text(text, toks[k]);
        }
        if (seen.insert(dotted).second) out.push_back(make_called_name(std::move(dotted)));
    }
}

inline void scan_calls_tree(const std::string& text, const Statement& st,
                            std::vector<CalledName>& out, std::set<std::string>& seen) {
    scan_calls(text, st.head, out, seen);
    for (const auto& c : st.children) scan_calls_tree(text, c, out, seen);
}

// `self.<name> = ...` or `self.<name>: T = ...` at the start of a statement.
inline std::optional<AttributeRecord> match_self_attribute(const std::string& text,
                                                           const Statement& st) {
    const auto& h = st.head;
    if (st.suite || h.size() < 5) return std::nullopt;
    if (!(h[0].kind == TokKind::Name && tok_is(text, h[0], "self"))) return std::nullopt;
    if (!(h[1].kind == TokKind::Op && tok_is(text, h[1], "."))) return std::nullopt;
    if (h[2].kind != TokKind::Name) return std::nullopt;
    const bool plain = h[3].kind == TokKind::Op && tok_is(text, h[3], "=");
    bool annotated = false;
    if (!plain && h[3].kind == TokKind::Op && tok_is(text, h[3], ":")) {
        int depth = 0;
        for (std::size_t i = 4; i < h.size(); ++i) {
            const std::string_view s = tok_text(text, h[i]);
            if (h[i].kind != TokKind::Op) continue;
            if (s == "(" || s == "[" || s == "{") ++depth;
            else if (s == ")" || s == "]" || s == "}") --depth;
            else if (s == "=" && depth == 0) annotated = true;
        }
    }
    if (!plain && !annotated) return std::nullopt;
    return AttributeRecord{std::string(tok_text(text, h[2])),
                           join_tokens(text, h.begin(), h.end())};
}

// `<name> = ...` or `<name>: T = ...` at class-body level.
inline std::optional<AttributeRecord> match_class_attribute(const std::string& text,
                                                            const Statement& st) {
    const auto& h = st.head;
    if (st.suite || h.size() < 3) return std::nullopt;
    if (h[0].kind != TokKind::Name || is_python_keyword(tok_text(text, h[0])))
        return std::nullopt;
    const bool plain = h[1].kind == TokKind::Op && tok_is(text, h[1], "=");
    bool annotated = false;
    if (!plain && h[1].kind == TokKind::Op && tok_is(text, h[1], ":")) {
        int depth = 0;
        for (std::size_t i = 2; i < h.size(); ++i) {
            const std::string_view s = tok_text(text, h[i]);
            if (h[i].kind != TokKind::Op) continue;
            if (s == "(" || s == "[" || s == "{") ++depth;
            else if (s == ")" || s == "]" || s == "}") --depth;
            else if (s == "=" && depth == 0) annotated = true;
        }
    }
    if (!plain && !annotated) return std::nullopt;
    return AttributeRecord{std::string(tok_text(text, h[0])),
                           join_tokens(text, h.begin(), h.end())};
}

// `<name> = <Name>...` or `<name>: T = <Name>...`: binds the target to the
// first name of the right-hand side.
inline void match_local_binding(const std::string& text, const Statement& st,
                                std::map<std::string, std::string>& out) {
    const auto& h = st.head;
    if (st.suite || h.size() < 3) return;
    if (h[0].kind != TokKind::Name || is_python_keyword(tok_text(text, h[0]))) return;
    if (h[1].kind != TokKind::Op) return;
    std::size_t rhs = 0;
    if (tok_is(text, h[1], "=")) {
        rhs = 2;
    } else if (tok_is(text, h[1], ":")) {
        int depth = 0;
        for (std::size_t i = 2; i + 1 < h.size(); ++i) {
            const std::string_view s = tok_text(text, h[i]);
            if (h[i].kind != TokKind::Op) continue;
            if (s == "(" || s == "[" || s == "{") ++depth;
            else if (s == ")" || s == "]" || s == "}") --depth;
            else if (s == "=" && depth == 0) {
                rhs = i + 1;
                break;
            }
        }
        if (rhs == 0) return;
    } else {
        return;
    }
    if (rhs >= h.size() || h[rhs].kind != TokKind::Name ||
        is_python_keyword(tok_text(text, h[rhs])))
        return;
    out[std::string(tok_text(text, h[0]))] = std::string(tok_text(text, h[rhs]));
}

inline void collect_local_bindings(const std::string& text, const Statement& st,
                                   std::map<std::string, std::string>& out) {
    for (const auto& child : st.children) {
        if (def_keyword_index(text, child) >= 0 || is_class_statement(text, child))
            continue;
        match_local_binding(text, child, out);
        collect_local_bindings(text, child, out);
    }
}

// Walks `__init__`'s body (flow suites included, nested definitions not)
// collecting the first assignment per attribute name.
inline void collect_instance_attributes(const std::string& text, const Statement& st,
                                        std::vector<AttributeRecord>& out,
                                        std::set<std::string>& seen) {
    for (const auto& child : st.children) {
        if (def_keyword_index(text, child) >= 0 || is_class_statement(text, child))
            continue;
        if (auto attr = match_self_attribute(text, child)) {
            if (seen.insert(attr->name).second) out.push_back(std::move(*attr));
        }
        collect_instance_attributes(text, child, out, seen);
    }
}

class IndexWalker {
public:
    IndexWalker(const std::string& text, FileIndex& fi) : text_(text), fi_(fi) {}

    void run(const std::vector<Statement>& module_body) {
        walk_records(module_body, nullptr, nullptr);
        collect_imports(module_body);
        std::stable_sort(
            fi_.classes.begin(), fi_.classes.end(),
            [](const ClassRecord& a, const ClassRecord& b) {
                return a.position.line < b.position.line;
            });
    }

private:
    const std::string& text_;
    FileIndex& fi_;

    enum class Scope { TopLevel, ClassBody };

    // cls is the enclosing class record (null at module level); attr_seen
    // dedups its class attributes across flow suites.
    void walk_records(const std::vector<Statement>& body, ClassRecord* cls,
                      std::set<std::string>* attr_seen) {
        std::vector<std::string> decorators;
        for (const auto& st : body) {
            if (is_decorator(text_, st)) {
                if (auto name = decorator_name(text_, st))
                    decorators.push_back(std::move(*name));
                continue;
            }
            const int def_idx = def_keyword_index(text_, st);
            if (def_idx >= 0) {
                emit_method(st, def_idx, cls, std::move(decorators));
                decorators.clear();
                continue;
            }
            if (is_class_statement(text_, st)) {
                emit_class(st, std::move(decorators));
                decorators.clear();
                continue;
            }
            decorators.clear();
            reject_bare_compound(text_, st);
            if (st.suite) {
                // flow suite: transparent for definitions and attributes
                walk_records(st.children, cls, attr_seen);
                continue;
            }
            if (cls) {
                if (auto attr = match_class_attribute(text_, st))
                    if (attr_seen->insert(attr->name).second)
                        cls->class_attributes.push_back(std::move(*attr));
            }
        }
    }

    void emit_method(const Statement& st, int def_idx, ClassRecord* cls,
                     std::vector<std::string> decorators) {
        const std::size_t name_idx = static_cast<std::size_t>(def_idx) + 1;
        if (name_idx + 1 >= st.head.size() || st.head[name_idx].kind != TokKind::Name ||
            !tok_is(text_, st.head[name_idx + 1], "("))
            throw ParseError(st.line, "invalid function definition");

        MethodRecord m;
        m.name = std::string(tok_text(text_, st.head[name_idx]));
        m.position = {st.line, st.end_line, st.indent};
        const Token& def_tok = st.head[static_cast<std::size_t>(def_idx)];
        const Token& last = st.head[st.head.size() - 2];  // token before the colon
        m.signature_text = text_.substr(def_tok.begin, last.end - def_tok.begin);
        m.decorator_names = std::move(decorators);
        std::set<std::string> seen;
        scan_calls_tree(text_, st, m.called_names, seen);
        collect_local_bindings(text_, st, m.local_bindings);

        if (cls) {
            m.enclosing_class = cls->name;
            if (m.name == "__init__" && cls->instance_attributes.empty()) {
                std::set<std::string> attr_seen;
                collect_instance_attributes(text_, st, cls->instance_attributes,
                                            attr_seen);
            }
            cls->methods.push_back(std::move(m));
        } else {
            fi_.functions.push_back(std::move(m));
        }
        // Nested definitions inside the body are deliberately not records.
    }

    void emit_class(const Statement& st, std::vector<std::string> decorators) {
        (void)decorators;  // class decorators are not part of the schema
        if (st.head.size() < 3 || st.head[1].kind != TokKind::Name)
            throw ParseError(st.line, "invalid class definition");

        ClassRecord cls;
        cls.name = std::string(tok_text(text_, st.head[1]));
        cls.position = {st.line, st.end_line, st.indent};
        cls.base_exprs = parse_bases(st);
        cls.declaration_text = join_tokens(text_, st.head.begin(), st.head.end());

        std::set<std::string> attr_seen;
        walk_records(st.children, &cls, &attr_seen);
        fi_.classes.push_back(std::move(cls));
    }

    std::vector<std::string> parse_bases(const Statement& st) {
        std::vector<std::string> bases;
        if (!head_is(text_, st, 2, "(")) return bases;  // `class C:` form
        // head: class Name ( ... ) :  with the argument list split on
        // commas at depth zero, dropping keyword arguments and starred
        // entries.
        const std::size_t open = 2;
        const std::size_t close = st.head.size() - 2;  // token before the colon
        if (!head_is(text_, st, close, ")"))
            throw ParseError(st.line, "invalid class definition");
        int depth = 0;
        std::vector<Token> segment;
        bool keyword_arg = false;
        auto flush = [&] {
            if (!segment.empty() && !keyword_arg &&
                !tok_is(text_, segment[0], "*") && !tok_is(text_, segment[0], "**"))
                bases.push_back(join_tokens(text_, segment.begin(), segment.end()));
            segment.clear();
            keyword_arg = false;
        };
        for (std::size_t i = open + 1; i < close; ++i) {
            const Token& t = st.head[i];
            if (t.kind == TokKind::Op) {
                const std::string_view s = tok_text(text_, t);
                if (s == "(" || s == "[" || s == "{") ++depth;
                else if (s == ")" || s == "]" || s == "}") --depth;
                else if (s == "," && depth == 0) {
                    flush();
                    continue;
                } else if (s == "=" && depth == 0) {
                    keyword_arg = true;
                }
            }
            segment.push_back(t);
        }
        flush();
        return bases;
    }

    void collect_imports(const std::vector<Statement>& body) {
        for (const auto& st : body) {
            if (!st.suite && !st.head.empty() && st.head[0].kind == TokKind::Name) {
                if (tok_is(text_, st.head[0], "import"))
                    fi_.imports.push_back(parse_plain_import(st));
                else if (tok_is(text_, st.head[0], "from"))
                    fi_.imports.push_back(parse_from_import(st));
            }
            collect_imports(st.children);
        }
    }

    std::string parse_dotted(const Statement& st, std::size_t& i) {
        std::string out;
        while (i < st.head.size() && st.head[i].kind == TokKind::Name &&
               !is_python_keyword(tok_text(text_, st.head[i]))) {
            out += tok_text(text_, st.head[i]);
            ++i;
            if (i < st.head.size() && tok_is(text_, st.head[i], ".")) {
                out += '.';
                ++i;
            } else {
                break;
            }
        }
        if (out.empty() || out.back() == '.')
            throw ParseError(st.line, "invalid import statement");
        return out;
    }

    ImportRecord parse_plain_import(const Statement& st) {
        ImportRecord rec;
        rec.kind = ImportRecord::Kind::Plain;
        std::size_t i = 1;
        while (true) {
            ImportName entry;
            entry.name = parse_dotted(st, i);
            if (i < st.head.size() && tok_is(text_, st.head[i], "as")) {
                ++i;
                if (i >= st.head.size() || st.head[i].kind != TokKind::Name)
                    throw ParseError(st.line, "invalid import statement");
                entry.alias = std::string(tok_text(text_, st.head[i]));
                ++i;
            }
            rec.names.push_back(std::move(entry));
            if (i < st.head.size() && tok_is(text_, st.head[i], ",")) {
                ++i;
                continue;
            }
            break;
        }
        if (i != st.head.size()) throw ParseError(st.line, "invalid import statement");
        return rec;
    }

    ImportRecord parse_from_import(const Statement& st) {
        ImportRecord rec;
        rec.kind = ImportRecord::Kind::From;
        std::size_t i = 1;
        while (i < st.head.size() && st.head[i].kind == TokKind::Op) {
            const std::string_view s = tok_text(text_, st.head[i]);
            if (s == ".") rec.relative_level += 1;
            else if (s == "...") rec.relative_level += 3;
            else break;
            ++i;
        }
        if (i < st.head.size() && !tok_is(text_, st.head[i], "import"))
            rec.module = parse_dotted(st, i);
        if (rec.module.empty() && rec.relative_level == 0)
            throw ParseError(st.line, "invalid import statement");
        if (i >= st.head.size() || !tok_is(text_, st.head[i], "import"))
            throw ParseError(st.line, "invalid import statement");
        ++i;

        if (i < st.head.size() && tok_is(text_, st.head[i], "*")) {
            rec.names.push_back({"*", std::nullopt});
            if (i + 1 != st.head.size())
                throw ParseError(st.line, "invalid import statement");
            return rec;
        }

        bool parens = false;
        if (i < st.head.size() && tok_is(text_, st.head[i], "(")) {
            parens = true;
            ++i;
        }
        while (true) {
            if (parens && i < st.head.size() && tok_is(text_, st.head[i], ")")) break;
            if (i >= st.head.size() || st.head[i].kind != TokKind::Name)
                throw ParseError(st.line, "invalid import statement");
            ImportName entry;
            entry.name = std::string(tok_text(text_, st.head[i]));
            ++i;
            if (i < st.head.size() && tok_is(text_, st.head[i], "as")) {
                ++i;
                if (i >= st.head.size() || st.head[i].kind != TokKind::Name)
                    throw ParseError(st.line, "invalid import statement");
                entry.alias = std::string(tok_text(text_, st.head[i]));
                ++i;
            }
            rec.names.push_back(std::move(entry));
            if (i < st.head.size() && tok_is(text_, st.head[i], ",")) {
                ++i;
                continue;
            }
            break;
        }
        if (parens) {
            if (i >= st.head.size() || !tok_is(text_, st.head[i], ")"))
                throw ParseError(st.line, "invalid import statement");
            ++i;
        }
        if (i != st.head.size()) throw ParseError(st.line, "invalid import statement");
        if (rec.names.empty()) throw ParseError(st.line, "invalid import statement");
        return rec;
    }
};

}  // namespace detail

// Indexes an already-parsed source. The FileIndex positions refer to the
// ParsedSource's decoded text.
inline FileIndex index_parsed(const ParsedSource& ps, SourceFileRef file) {
    FileIndex fi;
    fi.file = std::move(file);
    detail::IndexWalker walker(ps.text, fi);
    walker.run(ps.statements);
    return fi;
}

// Parses and indexes raw file bytes. Syntax errors yield parse_ok = false
// with an error note instead of throwing; such files carry no records but
// still count as files.
inline FileIndex index_file(const std::string& source_bytes, SourceFileRef file) {
    try {
        const ParsedSource ps = parse_python(source_bytes);
        return index_parsed(ps, file);
    } catch (const ParseError& e) {
        FileIndex fi;
        fi.file = std::move(file);
        fi.parse_ok = false;
        fi.error_note = "line " + std::to_string(e.line) + ": " + e.what();
        return fi;
    }
}

// Per-repository view: file indexes by relative path plus a module-name
// lookup. Duplicate module names keep the lexicographically first path.
struct RepoIndex {
    std::map<std::string, FileIndex> files;
    std::map<std::string, std::string> modules;
};

inline RepoIndex make_repo_index(std::map<std::string, FileIndex> files) {
    RepoIndex idx;
    idx.files = std::move(files);
    for (const auto& [path, fi] : idx.files)
        if (!fi.file.module_name.empty()) idx.modules.emplace(fi.file.module_name, path);
    return idx;
}

}  // namespace focalmap
