#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "focalmap/indexer.hpp"
#include "focalmap/ingest.hpp"

namespace focalmap {

enum class Framework { Pytest, Unittest, Both };

inline std::string framework_label(Framework f) {
    switch (f) {
        case Framework::Pytest: return "pytest";
        case Framework::Unittest: return "unittest";
        case Framework::Both: return "both";
    }
    return "pytest";
}

inline std::optional<Framework> framework_from_label(std::string_view s) {
    if (s == "pytest") return Framework::Pytest;
    if (s == "unittest") return Framework::Unittest;
    if (s == "both") return Framework::Both;
    return std::nullopt;
}

// file path → classification, for every file that classified as a test file
using FrameworkMap = std::map<std::string, Framework>;

struct TestMethodRecord {
    std::string name;
    Position position;
    std::optional<std::string> enclosing_class;
    Framework framework = Framework::Pytest;  // the rule that admitted the test
    std::vector<CalledName> project_calls;
    std::vector<ImportRecord> local_imports;
};

struct TestFileRecord {
    std::string file;
    Framework framework = Framework::Pytest;
    std::vector<TestMethodRecord> tests;  // may be empty; the file still counts
};

namespace detail {

inline std::string root_segment(const std::string& dotted) {
    const std::size_t dot = dotted.find('.');
    return dot == std::string::npos ? dotted : dotted.substr(0, dot);
}

inline std::string filename_stem(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    if (base.size() >= 3 && base.ends_with(".py")) base.resize(base.size() - 3);
    return base;
}

inline bool test_filename_stem(const std::string& stem) {
    return stem.starts_with("test_") || stem.ends_with("_test");
}

// "a.b.c" → {a, b, c}; nullopt when any segment is not a bare identifier
// (tolerates the single spaces join_tokens may leave around dots).
inline std::optional<std::vector<std::string>> split_dotted_name(std::string_view s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '.') {
            parts.push_back(cur);
            cur.clear();
        } else if (c == ' ') {
            continue;
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    for (const auto& p : parts)
        if (!is_identifier(p)) return std::nullopt;
    return parts;
}

}  // namespace detail

// Framework classification by import roots. pytest-only files must also
// carry a test-style filename; unittest is accepted regardless of name.
inline std::optional<Framework> classify_test_file(const FileIndex& fi) {
    if (!fi.parse_ok) return std::nullopt;
    bool has_pytest = false;
    bool has_unittest = false;
    for (const auto& imp : fi.imports) {
        if (imp.kind == ImportRecord::Kind::From) {
            if (imp.relative_level > 0) continue;  // project-internal
            const std::string root = detail::root_segment(imp.module);
            has_pytest |= root == "pytest";
            has_unittest |= root == "unittest";
        } else {
            for (const auto& n : imp.names) {
                const std::string root = detail::root_segment(n.name);
                has_pytest |= root == "pytest";
                has_unittest |= root == "unittest";
            }
        }
    }
    if (has_pytest && has_unittest) return Framework::Both;
    if (has_unittest) return Framework::Unittest;
    if (has_pytest &&
        detail::test_filename_stem(detail::filename_stem(fi.file.relative_path)))
        return Framework::Pytest;
    return std::nullopt;
}

inline FrameworkMap classify_all(const RepoIndex& repo) {
    FrameworkMap out;
    for (const auto& [path, fi] : repo.files)
        if (auto fw = classify_test_file(fi)) out.emplace(path, *fw);
    return out;
}

namespace detail {

// Dotted package the file's relative imports resolve against.
inline std::string file_package(const SourceFileRef& ref) {
    const std::string stem = filename_stem(ref.relative_path);
    if (stem == "__init__") return ref.module_name;  // the package itself
    const std::size_t dot = ref.module_name.rfind('.');
    return dot == std::string::npos ? std::string() : ref.module_name.substr(0, dot);
}

// `from ..sub import x` in package a.b.c → "a.b.sub"; nullopt when the
// dots climb past the package root.
inline std::optional<std::string> resolve_relative_module(const SourceFileRef& ref,
                                                          int level,
                                                          const std::string& module) {
    std::vector<std::string> parts;
    {
        const std::string pkg = file_package(ref);
        std::string cur;
        for (char c : pkg) {
            if (c == '.') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) parts.push_back(cur);
    }
    const int drop = level - 1;
    if (drop < 0 || static_cast<std::size_t>(drop) > parts.size()) return std::nullopt;
    parts.resize(parts.size() - static_cast<std::size_t>(drop));
    std::string base;
    for (const auto& p : parts) {
        if (!base.empty()) base += '.';
        base += p;
    }
    if (!module.empty()) base = base.empty() ? module : base + "." + module;
    if (base.empty()) return std::nullopt;
    return base;
}

// Absolute module path of a from-import, with relative forms resolved.
inline std::optional<std::string> from_import_module(const ImportRecord& imp,
                                                     const SourceFileRef& ref) {
    if (imp.relative_level == 0)
        return imp.module.empty() ? std::nullopt : std::optional(imp.module);
    return resolve_relative_module(ref, imp.relative_level, imp.module);
}

// True when `base_text` references unittest's TestCase through this
// file's own imports: `unittest.TestCase`, an alias of it, or a
// from-imported `TestCase`.
inline bool base_is_direct_testcase(const std::string& base_text, const FileIndex& fi) {
    const auto parts = split_dotted_name(base_text);
    if (!parts || parts->empty()) return false;

    auto accepted_origin = [](const std::string& module) {
        return module == "unittest" || module == "unittest.case";
    };

    if (parts->size() == 1) {
        const std::string& bound = parts->front();
        for (const auto& imp : fi.imports) {
            if (imp.kind != ImportRecord::Kind::From || imp.relative_level != 0)
                continue;
            if (!accepted_origin(imp.module)) continue;
            for (const auto& n : imp.names)
                if (n.name == "TestCase" && n.alias.value_or(n.name) == bound)
                    return true;
        }
        return false;
    }

    if (parts->back() != "TestCase") return false;
    const std::string& head = parts->front();
    std::string middle;
    for (std::size_t i = 1; i + 1 < parts->size(); ++i) middle += "." + (*parts)[i];

    for (const auto& imp : fi.imports) {
        if (imp.relative_level != 0) continue;
        if (imp.kind == ImportRecord::Kind::Plain) {
            for (const auto& n : imp.names) {
                const std::string bound = n.alias ? *n.alias : root_segment(n.name);
                const std::string resolved = n.alias ? n.name : root_segment(n.name);
                if (bound == head && accepted_origin(resolved + middle)) return true;
            }
        } else {
            // `from unittest import case` binds a submodule name
            for (const auto& n : imp.names) {
                if (n.name == "*") continue;
                if (n.alias.value_or(n.name) != head) continue;
                if (accepted_origin(imp.module + "." + n.name + middle)) return true;
            }
        }
    }
    return false;
}

inline const ClassRecord* find_class(const FileIndex& fi, const std::string& name) {
    for (const auto& cls : fi.classes)
        if (cls.name == name) return &cls;
    return nullptr;
}

inline bool class_directly_testcase(const ClassRecord& cls, const FileIndex& fi) {
    return std::any_of(cls.base_exprs.begin(), cls.base_exprs.end(),
                       [&](const std::string& b) {
                           return base_is_direct_testcase(b, fi);
                       });
}

}  // namespace detail

// Names of classes in `fi` deriving from unittest.TestCase, directly or
// through one intermediate project class (same file, or reachable via a
// from-import within the repository).
inline std::set<std::string> testcase_classes(const FileIndex& fi,
                                              const RepoIndex& repo) {
    std::set<std::string> out;
    for (const auto& cls : fi.classes)
        if (detail::class_directly_testcase(cls, fi)) out.insert(cls.name);

    for (const auto& cls : fi.classes) {
        if (out.count(cls.name)) continue;
        for (const auto& base : cls.base_exprs) {
            const auto parts = detail::split_dotted_name(base);
            if (!parts || parts->size() != 1) continue;
            const std::string& bound = parts->front();

            if (const ClassRecord* local = detail::find_class(fi, bound)) {
                if (detail::class_directly_testcase(*local, fi)) {
                    out.insert(cls.name);
                    break;
                }
                continue;  // shadowing local class takes precedence
            }

            bool found = false;
            for (const auto& imp : fi.imports) {
                if (imp.kind != ImportRecord::Kind::From) continue;
                const auto mod = detail::from_import_module(imp, fi.file);
                if (!mod) continue;
                const auto it = repo.modules.find(*mod);
                if (it == repo.modules.end()) continue;
                const FileIndex& base_fi = repo.files.at(it->second);
                for (const auto& n : imp.names) {
                    if (n.name == "*" || n.alias.value_or(n.name) != bound) continue;
                    const ClassRecord* remote = detail::find_class(base_fi, n.name);
                    if (remote && detail::class_directly_testcase(*remote, base_fi)) {
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) {
                out.insert(cls.name);
                break;
            }
        }
    }
    return out;
}

// Imports of the file that resolve inside the repository, with relative
// forms rewritten to absolute module paths and foreign names dropped.
inline std::vector<ImportRecord> project_local_imports(const FileIndex& fi,
                                                       const RepoIndex& repo) {
    std::vector<ImportRecord> out;
    for (const auto& imp : fi.imports) {
        if (imp.kind == ImportRecord::Kind::Plain) {
            ImportRecord kept = imp;
            kept.names.clear();
            for (const auto& n : imp.names)
                if (repo.modules.count(n.name)) kept.names.push_back(n);
            if (!kept.names.empty()) out.push_back(std::move(kept));
            continue;
        }
        const auto mod = detail::from_import_module(imp, fi.file);
        if (!mod) continue;
        ImportRecord kept;
        kept.kind = ImportRecord::Kind::From;
        kept.module = *mod;
        kept.relative_level = 0;
        const bool module_known = repo.modules.count(*mod) != 0;
        for (const auto& n : imp.names) {
            if (n.name == "*") {
                if (module_known) kept.names.push_back(n);
            } else if (module_known || repo.modules.count(*mod + "." + n.name)) {
                kept.names.push_back(n);
            }
        }
        if (!kept.names.empty()) out.push_back(std::move(kept));
    }
    return out;
}

namespace detail {

// Name environment of one test method: import bindings of the file plus
// simple `name = Chain(...)` assignments from the body, used to decide
// which called names point back into the project.
struct CallEnv {
    // name → full module path bound by a plain import
    std::map<std::string, std::string> plain;
    // name → (module, symbol); symbol empty when the name is a submodule
    std::map<std::string, std::pair<std::string, std::string>> from;
    std::vector<std::string> star_modules;
    const std::map<std::string, std::string>* locals = nullptr;
};

inline CallEnv build_env(const FileIndex& fi, const RepoIndex& repo) {
    CallEnv env;
    for (const auto& imp : fi.imports) {
        if (imp.kind == ImportRecord::Kind::Plain) {
            for (const auto& n : imp.names) {
                if (n.alias) env.plain[*n.alias] = n.name;
                else env.plain[root_segment(n.name)] = root_segment(n.name);
            }
            continue;
        }
        const auto mod = from_import_module(imp, fi.file);
        if (!mod) continue;
        for (const auto& n : imp.names) {
            if (n.name == "*") {
                env.star_modules.push_back(*mod);
                continue;
            }
            const std::string bound = n.alias.value_or(n.name);
            if (repo.modules.count(*mod + "." + n.name))
                env.from[bound] = {*mod + "." + n.name, ""};
            else
                env.from[bound] = {*mod, n.name};
        }
    }
    return env;
}

inline bool file_defines_symbol(const FileIndex& fi, const std::string& symbol) {
    if (find_class(fi, symbol)) return true;
    return std::any_of(fi.functions.begin(), fi.functions.end(),
                       [&](const MethodRecord& m) { return m.name == symbol; });
}

// True when `root` reaches a non-test project module/class/function.
inline bool root_is_project(const std::string& root, const CallEnv& env,
                            const RepoIndex& repo, const FrameworkMap& fwmap) {
    auto module_ok = [&](const std::string& mod) {
        const auto it = repo.modules.find(mod);
        return it != repo.modules.end() && fwmap.count(it->second) == 0;
    };

    std::string cur = root;
    if (env.locals) {
        for (int depth = 0; depth < 8; ++depth) {
            const auto it = env.locals->find(cur);
            if (it == env.locals->end()) break;
            cur = it->second;
        }
    }
    if (cur == "self") return false;

    if (const auto it = env.plain.find(cur); it != env.plain.end())
        return module_ok(it->second);
    if (const auto it = env.from.find(cur); it != env.from.end()) {
        const auto& [mod, symbol] = it->second;
        if (symbol.empty()) return module_ok(mod);
        const auto mit = repo.modules.find(mod);
        if (mit == repo.modules.end() || fwmap.count(mit->second)) return false;
        return file_defines_symbol(repo.files.at(mit->second), symbol);
    }
    for (const auto& mod : env.star_modules) {
        const auto mit = repo.modules.find(mod);
        if (mit == repo.modules.end() || fwmap.count(mit->second)) continue;
        if (file_defines_symbol(repo.files.at(mit->second), cur)) return true;
    }
    return false;
}

}  // namespace detail

// Keeps the called names whose root binding leads back into a non-test
// file of this repository; order and spelling are preserved.
inline std::vector<CalledName> filter_project_calls(const MethodRecord& method,
                                                    const FileIndex& fi,
                                                    const RepoIndex& repo,
                                                    const FrameworkMap& fwmap) {
    detail::CallEnv env = detail::build_env(fi, repo);
    env.locals = &method.local_bindings;
    std::vector<CalledName> out;
    for (const auto& call : method.called_names) {
        const std::string root = detail::root_segment(call.dotted_path);
        if (detail::root_is_project(root, env, repo, fwmap)) out.push_back(call);
    }
    return out;
}

// Enumerates the test methods of one classified test file per the
// framework's convention, filling per-test project calls and imports.
inline TestFileRecord discover_tests(const FileIndex& fi, const RepoIndex& repo,
                                     const FrameworkMap& fwmap) {
    TestFileRecord rec;
    rec.file = fi.file.relative_path;
    rec.framework = fwmap.at(rec.file);
    const bool pytest_on = rec.framework != Framework::Unittest;
    const bool unittest_on = rec.framework != Framework::Pytest;

    const std::set<std::string> tc =
        unittest_on ? testcase_classes(fi, repo) : std::set<std::string>{};
    const std::vector<ImportRecord> local = project_local_imports(fi, repo);

    auto add = [&](const MethodRecord& m, Framework fw,
                   const std::optional<std::string>& cls) {
        TestMethodRecord t;
        t.name = m.name;
        t.position = m.position;
        t.enclosing_class = cls;
        t.framework = fw;
        t.project_calls = filter_project_calls(m, fi, repo, fwmap);
        t.local_imports = local;
        rec.tests.push_back(std::move(t));
    };

    if (pytest_on)
        for (const auto& m : fi.functions)
            if (m.name.starts_with("test")) add(m, Framework::Pytest, std::nullopt);
    for (const auto& cls : fi.classes) {
        const bool is_testcase = tc.count(cls.name) != 0;
        for (const auto& m : cls.methods) {
            if (!m.name.starts_with("test")) continue;
            if (unittest_on && is_testcase) add(m, Framework::Unittest, cls.name);
            else if (pytest_on) add(m, Framework::Pytest, cls.name);
        }
    }
    std::stable_sort(rec.tests.begin(), rec.tests.end(),
                     [](const TestMethodRecord& a, const TestMethodRecord& b) {
                         return a.position.line < b.position.line;
                     });
    return rec;
}

}  // namespace focalmap
