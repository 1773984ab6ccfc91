#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "focalmap/discovery.hpp"
#include "focalmap/error.hpp"
#include "focalmap/indexer.hpp"
#include "focalmap/resolver.hpp"

namespace focalmap {

using json = nlohmann::json;  // key-sorted objects give canonical output

constexpr int kSchemaVersion = 1;

struct RepoOutputSet {
    std::filesystem::path index_path;  // <data>/<owner>/<name>/<hash>.json
    std::filesystem::path tests_path;  // <data>/<owner>/<name>/<hash>.tests.json
    std::filesystem::path focal_path;  // <data>/<owner>/<name>/<hash>.focal.json
};

inline RepoOutputSet make_output_set(const std::filesystem::path& data_dir,
                                     const std::string& owner, const std::string& name,
                                     const std::string& hash) {
    const std::filesystem::path dir = data_dir / owner / name;
    return {dir / (hash + ".json"), dir / (hash + ".tests.json"),
            dir / (hash + ".focal.json")};
}

inline void write_json_file(const std::filesystem::path& path, const json& value) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path.generic_string());
    out << value.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path.generic_string());
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file: " + path.generic_string());
    json value = json::parse(in, nullptr, false);
    if (value.is_discarded())
        throw DataError("invalid JSON: " + path.generic_string());
    return value;
}

namespace detail {

inline const json& need(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw DataError("schema violation at " + path + "." + key);
    return *it;
}

inline std::string need_string(const json& obj, const char* key,
                               const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_string()) throw DataError("schema violation at " + path + "." + key);
    return v.get<std::string>();
}

inline int need_int(const json& obj, const char* key, const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_number_integer())
        throw DataError("schema violation at " + path + "." + key);
    return v.get<int>();
}

inline bool need_bool(const json& obj, const char* key, const std::string& path) {
    const json& v = need(obj, key, path);
    if (!v.is_boolean()) throw DataError("schema violation at " + path + "." + key);
    return v.get<bool>();
}

inline void put_position(json& obj, const Position& p) {
    obj["line"] = p.line;
    obj["line_end"] = p.line_end;
    obj["indent"] = p.indent;
}

inline Position get_position(const json& obj, const std::string& path) {
    Position p;
    p.line = need_int(obj, "line", path);
    p.line_end = need_int(obj, "line_end", path);
    p.indent = need_int(obj, "indent", path);
    return p;
}

}  // namespace detail

// ---- index artifact (<hash>.json) ----

inline json import_to_json(const ImportRecord& imp) {
    json names = json::array();
    for (const auto& n : imp.names) {
        json entry;
        entry["name"] = n.name;
        if (n.alias) entry["alias"] = *n.alias;
        names.push_back(std::move(entry));
    }
    json out;
    out["kind"] = imp.kind == ImportRecord::Kind::Plain ? "plain" : "from";
    out["module"] = imp.module;
    out["relative_level"] = imp.relative_level;
    out["names"] = std::move(names);
    return out;
}

inline ImportRecord import_from_json(const json& obj, const std::string& path) {
    ImportRecord imp;
    const std::string kind = detail::need_string(obj, "kind", path);
    if (kind == "plain") imp.kind = ImportRecord::Kind::Plain;
    else if (kind == "from") imp.kind = ImportRecord::Kind::From;
    else throw DataError("schema violation at " + path + ".kind");
    imp.module = detail::need_string(obj, "module", path);
    imp.relative_level = detail::need_int(obj, "relative_level", path);
    const json& names = detail::need(obj, "names", path);
    if (!names.is_array()) throw DataError("schema violation at " + path + ".names");
    for (const auto& n : names) {
        ImportName entry;
        entry.name = detail::need_string(n, "name", path + ".names");
        if (n.contains("alias")) entry.alias = n["alias"].get<std::string>();
        imp.names.push_back(std::move(entry));
    }
    return imp;
}

inline json method_to_json(const MethodRecord& m) {
    json out;
    detail::put_position(out, m.position);
    out["name"] = m.name;
    out["signature"] = m.signature_text;
    out["decorators"] = m.decorator_names;
    json calls = json::array();
    for (const auto& c : m.called_names) calls.push_back(c.dotted_path);
    out["called_names"] = std::move(calls);
    return out;
}

inline MethodRecord method_from_json(const json& obj, const std::string& path) {
    MethodRecord m;
    m.position = detail::get_position(obj, path);
    m.name = detail::need_string(obj, "name", path);
    m.signature_text = detail::need_string(obj, "signature", path);
    for (const auto& d : detail::need(obj, "decorators", path))
        m.decorator_names.push_back(d.get<std::string>());
    for (const auto& c : detail::need(obj, "called_names", path))
        m.called_names.push_back(make_called_name(c.get<std::string>()));
    return m;
}

inline json class_to_json(const ClassRecord& cls) {
    json out;
    detail::put_position(out, cls.position);
    out["name"] = cls.name;
    out["bases"] = cls.base_exprs;
    json methods = json::array();
    for (const auto& m : cls.methods) methods.push_back(method_to_json(m));
    out["methods"] = std::move(methods);
    auto attrs = [](const std::vector<AttributeRecord>& list) {
        json arr = json::array();
        for (const auto& a : list) arr.push_back({{"name", a.name}, {"text", a.text}});
        return arr;
    };
    out["class_attributes"] = attrs(cls.class_attributes);
    out["instance_attributes"] = attrs(cls.instance_attributes);
    return out;
}

inline ClassRecord class_from_json(const json& obj, const std::string& path) {
    ClassRecord cls;
    cls.position = detail::get_position(obj, path);
    cls.name = detail::need_string(obj, "name", path);
    for (const auto& b : detail::need(obj, "bases", path))
        cls.base_exprs.push_back(b.get<std::string>());
    for (const auto& m : detail::need(obj, "methods", path)) {
        MethodRecord rec = method_from_json(m, path + ".methods");
        rec.enclosing_class = cls.name;
        cls.methods.push_back(std::move(rec));
    }
    auto attrs = [&](const char* key) {
        std::vector<AttributeRecord> list;
        for (const auto& a : detail::need(obj, key, path))
            list.push_back({detail::need_string(a, "name", path),
                            detail::need_string(a, "text", path)});
        return list;
    };
    cls.class_attributes = attrs("class_attributes");
    cls.instance_attributes = attrs("instance_attributes");
    return cls;
}

inline json index_to_json(const std::map<std::string, FileIndex>& files) {
    json out;
    out["schema_version"] = kSchemaVersion;
    json fobj = json::object();
    for (const auto& [path, fi] : files) {
        json entry;
        entry["module"] = fi.file.module_name;
        entry["importable"] = fi.file.importable;
        entry["parse_ok"] = fi.parse_ok;
        if (fi.error_note) entry["error_note"] = *fi.error_note;
        json imports = json::array();
        for (const auto& imp : fi.imports) imports.push_back(import_to_json(imp));
        entry["imports"] = std::move(imports);
        json classes = json::array();
        for (const auto& cls : fi.classes) classes.push_back(class_to_json(cls));
        entry["classes"] = std::move(classes);
        json functions = json::array();
        for (const auto& m : fi.functions) functions.push_back(method_to_json(m));
        entry["functions"] = std::move(functions);
        fobj[path] = std::move(entry);
    }
    out["files"] = std::move(fobj);
    return out;
}

inline std::map<std::string, FileIndex> index_from_json(const json& doc) {
    const json& files = detail::need(doc, "files", "index");
    if (!files.is_object()) throw DataError("schema violation at index.files");
    std::map<std::string, FileIndex> out;
    for (const auto& [path, entry] : files.items()) {
        FileIndex fi;
        fi.file.relative_path = path;
        fi.file.module_name = detail::need_string(entry, "module", path);
        fi.file.importable = detail::need_bool(entry, "importable", path);
        fi.parse_ok = detail::need_bool(entry, "parse_ok", path);
        if (entry.contains("error_note"))
            fi.error_note = entry["error_note"].get<std::string>();
        for (const auto& imp : detail::need(entry, "imports", path))
            fi.imports.push_back(import_from_json(imp, path + ".imports"));
        for (const auto& cls : detail::need(entry, "classes", path))
            fi.classes.push_back(class_from_json(cls, path + ".classes"));
        for (const auto& m : detail::need(entry, "functions", path))
            fi.functions.push_back(method_from_json(m, path + ".functions"));
        out.emplace(path, std::move(fi));
    }
    return out;
}

// ---- tests artifact (<hash>.tests.json) ----

inline json tests_to_json(const std::vector<TestFileRecord>& records) {
    json arr = json::array();
    for (const auto& rec : records) {
        json tests = json::array();
        for (const auto& t : rec.tests) {
            json entry;
            detail::put_position(entry, t.position);
            entry["name"] = t.name;
            entry["framework"] = framework_label(t.framework);
            if (t.enclosing_class) entry["class"] = *t.enclosing_class;
            json calls = json::array();
            for (const auto& c : t.project_calls) calls.push_back(c.dotted_path);
            entry["project_calls"] = std::move(calls);
            json imports = json::array();
            for (const auto& imp : t.local_imports)
                imports.push_back(import_to_json(imp));
            entry["local_imports"] = std::move(imports);
            tests.push_back(std::move(entry));
        }
        json fileobj;
        fileobj["file"] = rec.file;
        fileobj["framework"] = framework_label(rec.framework);
        fileobj["tests"] = std::move(tests);
        arr.push_back(std::move(fileobj));
    }
    json out;
    out["schema_version"] = kSchemaVersion;
    out["test_files"] = std::move(arr);
    return out;
}

inline std::vector<TestFileRecord> tests_from_json(const json& doc) {
    const json& arr = detail::need(doc, "test_files", "tests");
    if (!arr.is_array()) throw DataError("schema violation at tests.test_files");
    std::vector<TestFileRecord> out;
    for (const auto& fileobj : arr) {
        TestFileRecord rec;
        rec.file = detail::need_string(fileobj, "file", "test_files");
        const auto fw =
            framework_from_label(detail::need_string(fileobj, "framework", rec.file));
        if (!fw) throw DataError("schema violation at " + rec.file + ".framework");
        rec.framework = *fw;
        for (const auto& entry : detail::need(fileobj, "tests", rec.file)) {
            TestMethodRecord t;
            const std::string path = rec.file + ".tests";
            t.name = detail::need_string(entry, "name", path);
            t.position = detail::get_position(entry, path + "." + t.name);
            const auto tfw = framework_from_label(
                detail::need_string(entry, "framework", path + "." + t.name));
            if (!tfw)
                throw DataError("schema violation at " + path + "." + t.name +
                                ".framework");
            t.framework = *tfw;
            if (entry.contains("class"))
                t.enclosing_class = entry["class"].get<std::string>();
            for (const auto& c : detail::need(entry, "project_calls", path))
                t.project_calls.push_back(make_called_name(c.get<std::string>()));
            for (const auto& imp : detail::need(entry, "local_imports", path))
                t.local_imports.push_back(import_from_json(imp, path));
            rec.tests.push_back(std::move(t));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// ---- focal artifact (<hash>.focal.json) ----

inline json focal_to_json(const std::vector<FocalMapping>& mappings) {
    json out = json::object();
    for (const auto& mapping : mappings) {
        json methods = json::object();
        for (const auto& [test_name, entry] : mapping.entries) {
            json e;
            detail::put_position(e, entry.test_position);
            if (entry.focal_class) e["focal_class"] = *entry.focal_class;
            json fm;
            detail::put_position(fm, entry.focal_method.position);
            fm["name"] = entry.focal_method.name;
            e["focal_method"] = std::move(fm);
            methods[test_name] = std::move(e);
        }
        json fileobj;
        fileobj["focal_file"] = mapping.focal_file;
        fileobj["methods"] = std::move(methods);
        out[mapping.test_file] = std::move(fileobj);
    }
    return out;
}

namespace detail {

inline void check_only_keys(const json& obj, std::initializer_list<const char*> keys,
                            const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const char* k : keys) known |= key == k;
        if (!known) throw DataError("schema violation at " + path + "." + key);
    }
}

}  // namespace detail

inline std::vector<FocalMapping> focal_from_json(const json& doc) {
    if (!doc.is_object()) throw DataError("schema violation at top level");
    std::vector<FocalMapping> out;
    for (const auto& [test_file, fileobj] : doc.items()) {
        if (!fileobj.is_object())
            throw DataError("schema violation at " + test_file);
        detail::check_only_keys(fileobj, {"focal_file", "methods"}, test_file);
        FocalMapping mapping;
        mapping.test_file = test_file;
        mapping.focal_file = detail::need_string(fileobj, "focal_file", test_file);
        const json& methods = detail::need(fileobj, "methods", test_file);
        if (!methods.is_object())
            throw DataError("schema violation at " + test_file + ".methods");
        for (const auto& [test_name, mobj] : methods.items()) {
            const std::string path = "methods." + test_name;
            if (!mobj.is_object()) throw DataError("schema violation at " + path);
            detail::check_only_keys(
                mobj, {"line", "line_end", "indent", "focal_class", "focal_method"},
                path);
            FocalEntry entry;
            entry.test_position = detail::get_position(mobj, path);
            if (mobj.contains("focal_class")) {
                if (!mobj["focal_class"].is_string())
                    throw DataError("schema violation at " + path + ".focal_class");
                entry.focal_class = mobj["focal_class"].get<std::string>();
            }
            const json& fm = detail::need(mobj, "focal_method", path);
            if (!fm.is_object())
                throw DataError("schema violation at " + path + ".focal_method");
            detail::check_only_keys(fm, {"line", "line_end", "indent", "name"},
                                    path + ".focal_method");
            entry.focal_method.position =
                detail::get_position(fm, path + ".focal_method");
            entry.focal_method.name =
                detail::need_string(fm, "name", path + ".focal_method");
            mapping.entries.emplace(test_name, std::move(entry));
        }
        out.push_back(std::move(mapping));
    }
    return out;
}

// Writes the focal artifact; an empty mapping list writes nothing.
inline void write_focal(const std::vector<FocalMapping>& mappings,
                        const RepoOutputSet& out) {
    if (mappings.empty()) return;
    write_json_file(out.focal_path, focal_to_json(mappings));
}

inline std::vector<FocalMapping> read_focal(const std::filesystem::path& path) {
    return focal_from_json(read_json_file(path));
}

}  // namespace focalmap
