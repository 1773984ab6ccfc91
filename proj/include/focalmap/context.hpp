#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "focalmap/error.hpp"
#include "focalmap/indexer.hpp"
#include "focalmap/ingest.hpp"
#include "focalmap/resolver.hpp"
#include "focalmap/store.hpp"

namespace focalmap {

enum class SectionKind {
    ClassDeclaration,
    FocalMethod,
    Constructor,
    MethodSignatures,
    ClassAttributes,
    InstanceAttributes,
};

struct ContextSection {
    SectionKind kind;
    std::vector<std::string> lines;  // labels already applied
};

struct FocalContext {
    std::vector<ContextSection> sections;  // in SectionKind order, absent skipped

    // Blank lines separate the declaration+body block, the signatures
    // block, and the attributes block; the text ends with a newline.
    std::string text() const {
        auto block_of = [](SectionKind k) {
            if (k == SectionKind::ClassDeclaration || k == SectionKind::FocalMethod)
                return 0;
            if (k == SectionKind::Constructor || k == SectionKind::MethodSignatures)
                return 1;
            return 2;
        };
        std::string out;
        int prev_block = -1;
        for (const auto& sec : sections) {
            if (sec.lines.empty()) continue;
            const int block = block_of(sec.kind);
            if (prev_block >= 0 && block != prev_block) out += '\n';
            prev_block = block;
            for (const auto& line : sec.lines) {
                out += line;
                out += '\n';
            }
        }
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
    return lines;
}

// Shifts one line left (delta > 0 removes up to delta leading blanks) or
// right (delta < 0 pads with spaces); blank lines collapse to empty.
inline std::string shift_line(const std::string& line, int delta) {
    if (line.find_first_not_of(" \t") == std::string::npos) return "";
    if (delta > 0) {
        std::size_t i = 0;
        while (i < line.size() && i < static_cast<std::size_t>(delta) &&
               (line[i] == ' ' || line[i] == '\t'))
            ++i;
        return line.substr(i);
    }
    if (delta < 0) return std::string(static_cast<std::size_t>(-delta), ' ') + line;
    return line;
}

inline std::string with_label(std::string line, const char* label) {
    return std::move(line) + "  # " + label;
}

inline std::string elide(const std::string& signature_text, int indent) {
    return std::string(static_cast<std::size_t>(indent), ' ') +
           collapse_source(signature_text) + ": ...";
}

inline const ClassRecord* class_by_qualified_name(const FileIndex& fi,
                                                  const std::string& qualified) {
    const std::size_t dot = qualified.rfind('.');
    const std::string name =
        dot == std::string::npos ? qualified : qualified.substr(dot + 1);
    return find_class(fi, name);
}

}  // namespace detail

// Renders the context for one mapped test: the focal method in full, the
// enclosing class's other signatures elided, then its attributes. The
// `source` must be the decoded focal file text the index came from;
// `commit_hash` names the expected checkout in span errors.
inline FocalContext build_context(const FocalEntry& entry, const FileIndex& focal_fi,
                                  const std::string& source,
                                  const std::string& commit_hash) {
    const std::vector<std::string> lines = detail::split_lines(source);
    const Position& fp = entry.focal_method.position;
    if (fp.line < 1 || static_cast<std::size_t>(fp.line_end) > lines.size() ||
        fp.line > fp.line_end)
        throw DataError("focal span " + std::to_string(fp.line) + "-" +
                        std::to_string(fp.line_end) + " exceeds " +
                        focal_fi.file.relative_path + "; expected checkout at commit " +
                        commit_hash);

    const ClassRecord* cls = nullptr;
    if (entry.focal_class) {
        cls = detail::class_by_qualified_name(focal_fi, *entry.focal_class);
        if (!cls)
            throw DataError("focal class " + *entry.focal_class + " not found in " +
                            focal_fi.file.relative_path +
                            "; expected checkout at commit " + commit_hash);
    }

    FocalContext ctx;
    const int member_indent = cls ? 4 : 0;

    if (cls) {
        ContextSection decl{SectionKind::ClassDeclaration, {}};
        decl.lines.push_back(detail::with_label(cls->declaration_text, "focal class"));
        ctx.sections.push_back(std::move(decl));
    }

    ContextSection focal{SectionKind::FocalMethod, {}};
    const int shift = fp.indent - member_indent;
    for (int n = fp.line; n <= fp.line_end; ++n)
        focal.lines.push_back(
            detail::shift_line(lines[static_cast<std::size_t>(n - 1)], shift));
    focal.lines.front() =
        detail::with_label(std::move(focal.lines.front()), "focal method");
    ctx.sections.push_back(std::move(focal));

    if (cls) {
        const std::string& focal_name = entry.focal_method.name;
        ContextSection ctor{SectionKind::Constructor, {}};
        ContextSection methods{SectionKind::MethodSignatures, {}};
        for (const auto& m : cls->methods) {
            if (m.name == focal_name) continue;
            if (m.name == "__init__")
                ctor.lines.push_back(detail::with_label(
                    detail::elide(m.signature_text, member_indent), "constructor"));
            else
                methods.lines.push_back(detail::elide(m.signature_text, member_indent));
        }
        if (!methods.lines.empty())
            methods.lines.front() =
                detail::with_label(std::move(methods.lines.front()), "methods");
        ctx.sections.push_back(std::move(ctor));
        ctx.sections.push_back(std::move(methods));

        const std::string pad(static_cast<std::size_t>(member_indent), ' ');
        ContextSection cattrs{SectionKind::ClassAttributes, {}};
        if (cls->class_attributes.empty()) {
            cattrs.lines.push_back(pad + "# class attributes (none)");
        } else {
            for (const auto& a : cls->class_attributes)
                cattrs.lines.push_back(pad + a.text);
            cattrs.lines.front() =
                detail::with_label(std::move(cattrs.lines.front()), "class attributes");
        }
        ctx.sections.push_back(std::move(cattrs));

        ContextSection iattrs{SectionKind::InstanceAttributes, {}};
        if (cls->instance_attributes.empty()) {
            iattrs.lines.push_back(pad + "# instance attributes (none)");
        } else {
            for (const auto& a : cls->instance_attributes)
                iattrs.lines.push_back(pad + a.text);
            iattrs.lines.front() = detail::with_label(std::move(iattrs.lines.front()),
                                                      "instance attributes");
        }
        ctx.sections.push_back(std::move(iattrs));
        return ctx;
    }

    // module-level focal function: elide the other module functions
    ContextSection methods{SectionKind::MethodSignatures, {}};
    for (const auto& m : focal_fi.functions) {
        if (m.name == entry.focal_method.name) continue;
        methods.lines.push_back(detail::elide(m.signature_text, 0));
    }
    if (!methods.lines.empty())
        methods.lines.front() =
            detail::with_label(std::move(methods.lines.front()), "methods");
    ctx.sections.push_back(std::move(methods));
    return ctx;
}

struct ContextGenResult {
    std::filesystem::path out_path;
    int written = 0;
    int skipped = 0;
    std::vector<std::string> notes;  // one per skipped entry
};

struct FocalPathParts {
    std::string owner;
    std::string name;
    std::string hash;
};

// `<data>/<owner>/<name>/<hash>.focal.json` → its three path components.
inline FocalPathParts parse_focal_path(const std::filesystem::path& focal_json) {
    const std::string base = focal_json.filename().string();
    constexpr std::string_view suffix = ".focal.json";
    FocalPathParts parts;
    if (base.size() > suffix.size() && base.ends_with(suffix))
        parts.hash = base.substr(0, base.size() - suffix.size());
    if (!is_commit_hash(parts.hash))
        throw DataError("focal path must end in <40-hex-hash>.focal.json: " +
                        focal_json.generic_string());
    const std::filesystem::path dir = focal_json.parent_path();
    parts.name = dir.filename().string();
    parts.owner = dir.parent_path().filename().string();
    if (parts.name.empty() || parts.owner.empty())
        throw DataError("focal path must sit under <owner>/<name>/: " +
                        focal_json.generic_string());
    return parts;
}

// Builds every context named by a focal mapping file against a checkout
// of the recorded commit, writing `<hash>.contexts.json` alongside it.
inline ContextGenResult generate_for_repo(
    const std::filesystem::path& focal_json, const std::filesystem::path& repos_dir,
    const std::string& remote_base = "https://github.com/") {
    const FocalPathParts parts = parse_focal_path(focal_json);
    const std::vector<FocalMapping> mappings = read_focal(focal_json);

    const std::filesystem::path root =
        ensure_checkout(parts.owner, parts.name, repos_dir, remote_base);
    run_checked({"git", "-C", root.string(), "checkout", "--quiet", parts.hash});

    struct FocalSource {
        ParsedSource parsed;
        FileIndex index;
    };
    std::map<std::string, FocalSource> cache;

    ContextGenResult result;
    json out = json::object();
    for (const auto& mapping : mappings) {
        auto it = cache.find(mapping.focal_file);
        if (it == cache.end()) {
            FocalSource fs;
            try {
                fs.parsed = parse_python(read_file_bytes(root / mapping.focal_file));
                fs.index = index_parsed(
                    fs.parsed, resolve_module_name(root, mapping.focal_file));
            } catch (const std::exception& e) {
                for (const auto& [test_name, entry] : mapping.entries) {
                    (void)entry;
                    ++result.skipped;
                    result.notes.push_back(mapping.test_file + "::" + test_name + ": " +
                                           e.what());
                }
                continue;
            }
            it = cache.emplace(mapping.focal_file, std::move(fs)).first;
        }
        json per_file = json::object();
        for (const auto& [test_name, entry] : mapping.entries) {
            try {
                per_file[test_name] =
                    build_context(entry, it->second.index, it->second.parsed.text,
                                  parts.hash)
                        .text();
                ++result.written;
            } catch (const DataError& e) {
                ++result.skipped;
                result.notes.push_back(mapping.test_file + "::" + test_name + ": " +
                                       e.what());
            }
        }
        if (!per_file.empty()) out[mapping.test_file] = std::move(per_file);
    }

    result.out_path = focal_json.parent_path() / (parts.hash + ".contexts.json");
    write_json_file(result.out_path, out);
    return result;
}

}  // namespace focalmap
