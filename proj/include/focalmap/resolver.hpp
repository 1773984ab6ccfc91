#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "focalmap/discovery.hpp"
#include "focalmap/fuzzy.hpp"
#include "focalmap/indexer.hpp"

namespace focalmap {

struct FocalMethodRef {
    std::string name;
    Position position;
};

struct FocalEntry {
    Position test_position;
    std::optional<std::string> focal_class;  // module_name + "." + class name
    FocalMethodRef focal_method;
};

struct FocalMapping {
    std::string test_file;
    std::string focal_file;
    std::map<std::string, FocalEntry> entries;  // keyed by test method name
};

namespace detail {

// Project files an import record can stand for. A `from` import prefers
// the submodule file, falling back to the module defining the symbol;
// packages land on their __init__.py.
inline void imported_files(const ImportRecord& imp, const RepoIndex& repo,
                           std::set<std::string>& out) {
    if (imp.kind == ImportRecord::Kind::Plain) {
        for (const auto& n : imp.names) {
            const auto it = repo.modules.find(n.name);
            if (it != repo.modules.end()) out.insert(it->second);
        }
        return;
    }
    for (const auto& n : imp.names) {
        if (n.name != "*") {
            const auto sub = repo.modules.find(imp.module + "." + n.name);
            if (sub != repo.modules.end()) {
                out.insert(sub->second);
                continue;
            }
        }
        const auto it = repo.modules.find(imp.module);
        if (it != repo.modules.end()) out.insert(it->second);
    }
}

// Strips the test-naming affix: leading "test_", else trailing "_test".
inline std::string strip_test_affix(const std::string& stem) {
    if (stem.starts_with("test_")) return stem.substr(5);
    if (stem.ends_with("_test")) return stem.substr(0, stem.size() - 5);
    return stem;
}

}  // namespace detail

// Three-stage cascade: unique project import → filename-stem suffix
// match → fuzzy best scorer. Candidates never include test files.
inline std::optional<std::string> resolve_focal_file(const TestFileRecord& tf,
                                                     const RepoIndex& repo,
                                                     const FrameworkMap& fwmap) {
    // stage 1: exactly one distinct non-test project file imported
    std::set<std::string> imported;
    if (!tf.tests.empty())
        for (const auto& imp : tf.tests.front().local_imports)
            detail::imported_files(imp, repo, imported);
    std::erase_if(imported, [&](const std::string& path) {
        return path == tf.file || fwmap.count(path) != 0;
    });
    if (imported.size() == 1) return *imported.begin();

    // stage 2: candidate stems that close the test file's stem
    const std::string raw_stem = detail::filename_stem(tf.file);
    const std::string stripped = detail::strip_test_affix(raw_stem);
    std::vector<std::string> candidates;  // sorted path order via repo.files
    for (const auto& [path, fi] : repo.files) {
        (void)fi;
        if (path == tf.file || fwmap.count(path)) continue;
        candidates.push_back(path);
    }
    auto matches_with = [&](const std::string& stem) {
        std::vector<std::string> out;
        for (const auto& path : candidates)
            if (stem.ends_with(detail::filename_stem(path))) out.push_back(path);
        return out;
    };
    std::vector<std::string> matched = matches_with(stripped);
    if (matched.empty() && stripped != raw_stem) matched = matches_with(raw_stem);
    if (matched.empty()) return std::nullopt;
    if (matched.size() == 1) return matched.front();

    // stage 3: highest fuzzy score against the raw test stem
    const auto best = best_match(raw_stem, matched, 0, [](const std::string& path) {
        return detail::filename_stem(path);
    });
    if (!best) return std::nullopt;
    return matched[best->index];
}

namespace detail {

// All definitions of the focal file in source order: module functions
// plus every class's methods.
inline std::vector<const MethodRecord*> all_definitions(const FileIndex& fi) {
    std::vector<const MethodRecord*> defs;
    for (const auto& m : fi.functions) defs.push_back(&m);
    for (const auto& cls : fi.classes)
        for (const auto& m : cls.methods) defs.push_back(&m);
    std::stable_sort(defs.begin(), defs.end(),
                     [](const MethodRecord* a, const MethodRecord* b) {
                         return a->position.line < b->position.line;
                     });
    return defs;
}

inline const MethodRecord* first_definition(const std::vector<const MethodRecord*>& defs,
                                            const std::string& name) {
    for (const auto* m : defs)
        if (m->name == name) return m;
    return nullptr;
}

}  // namespace detail

// Matches the test's name against the project calls that land in the
// focal file: literal ends-with first, fuzzy similarity ≥ 50 second.
inline std::optional<FocalMethodRef> resolve_focal_method(const TestMethodRecord& t,
                                                          const FileIndex& focal_fi) {
    const auto defs = detail::all_definitions(focal_fi);
    std::vector<std::string> terminals;  // call order
    for (const auto& call : t.project_calls)
        if (detail::first_definition(defs, call.terminal))
            terminals.push_back(call.terminal);
    if (terminals.empty()) return std::nullopt;

    // stage 1: ends-with; most specific (longest) name wins, then the
    // earliest call
    const std::string* picked = nullptr;
    for (const auto& term : terminals)
        if (t.name.ends_with(term) && (!picked || term.size() > picked->size()))
            picked = &term;

    if (!picked) {
        const auto best = best_match(t.name, terminals, 50);
        if (!best) return std::nullopt;
        picked = &terminals[best->index];
    }
    const MethodRecord* def = detail::first_definition(defs, *picked);
    return FocalMethodRef{def->name, def->position};
}

// Name stage: the test class name minus its Test affix against the focal
// file's classes. Position stage: the innermost class span containing
// the method.
inline std::optional<std::string> resolve_focal_class(const TestMethodRecord& t,
                                                      const FileIndex& focal_fi,
                                                      const FocalMethodRef& fm) {
    const auto qualified = [&](const std::string& name) {
        return focal_fi.file.module_name + "." + name;
    };

    if (t.enclosing_class) {
        std::string stripped = *t.enclosing_class;
        if (stripped.starts_with("Test")) stripped = stripped.substr(4);
        else if (stripped.ends_with("Test"))
            stripped = stripped.substr(0, stripped.size() - 4);

        const ClassRecord* named = detail::find_class(focal_fi, stripped);
        if (!named) {
            std::vector<std::string> names;
            for (const auto& cls : focal_fi.classes) names.push_back(cls.name);
            if (const auto best = best_match(stripped, names, 50))
                named = &focal_fi.classes[best->index];
        }
        if (named) {
            const bool member = std::any_of(
                named->methods.begin(), named->methods.end(),
                [&](const MethodRecord& m) { return m.name == fm.name; });
            if (member) return qualified(named->name);
        }
    }

    const ClassRecord* enclosing = nullptr;
    for (const auto& cls : focal_fi.classes) {
        if (cls.position.line <= fm.position.line &&
            fm.position.line <= cls.position.line_end &&
            (!enclosing || cls.position.line > enclosing->position.line))
            enclosing = &cls;
    }
    if (enclosing) return qualified(enclosing->name);
    return std::nullopt;
}

// Composes the three resolvers over one test file. Absent when the focal
// file is unresolved or unparsable, or when no test resolves.
inline std::optional<FocalMapping> build_focal_mapping(const TestFileRecord& tf,
                                                       const RepoIndex& repo,
                                                       const FrameworkMap& fwmap) {
    const auto focal = resolve_focal_file(tf, repo, fwmap);
    if (!focal) return std::nullopt;
    const FileIndex& focal_fi = repo.files.at(*focal);
    if (!focal_fi.parse_ok) return std::nullopt;

    FocalMapping mapping;
    mapping.test_file = tf.file;
    mapping.focal_file = *focal;
    for (const auto& t : tf.tests) {
        const auto fm = resolve_focal_method(t, focal_fi);
        if (!fm) continue;
        FocalEntry entry;
        entry.test_position = t.position;
        entry.focal_class = resolve_focal_class(t, focal_fi, *fm);
        entry.focal_method = *fm;
        mapping.entries.emplace(t.name, std::move(entry));
    }
    if (mapping.entries.empty()) return std::nullopt;
    return mapping;
}

}  // namespace focalmap
