#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "focalmap/error.hpp"
#include "focalmap/store.hpp"

namespace focalmap {

struct CorpusStats {
    std::int64_t repositories = 0;
    std::int64_t all_files = 0;
    std::int64_t test_files = 0;
    std::int64_t all_classes = 0;
    std::int64_t all_methods = 0;
    std::int64_t test_methods = 0;
    std::int64_t focal_methods = 0;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;

    CorpusStats& operator+=(const CorpusStats& o) {
        repositories += o.repositories;
        all_files += o.all_files;
        test_files += o.test_files;
        all_classes += o.all_classes;
        all_methods += o.all_methods;
        test_methods += o.test_methods;
        focal_methods += o.focal_methods;
        return *this;
    }
    friend CorpusStats operator+(CorpusStats a, const CorpusStats& b) { return a += b; }

    json to_json() const {
        json out;
        out["repositories"] = repositories;
        out["all_files"] = all_files;
        out["test_files"] = test_files;
        out["all_classes"] = all_classes;
        out["all_methods"] = all_methods;
        out["test_methods"] = test_methods;
        out["focal_methods"] = focal_methods;
        return out;
    }

    std::string table() const {
        auto row = [](const char* label, std::int64_t v) {
            std::string line(label);
            line.resize(16, ' ');
            return line + std::to_string(v) + "\n";
        };
        return row("repositories", repositories) + row("all_files", all_files) +
               row("test_files", test_files) + row("all_classes", all_classes) +
               row("all_methods", all_methods) + row("test_methods", test_methods) +
               row("focal_methods", focal_methods);
    }
};

namespace detail {

inline bool is_index_artifact(const std::string& filename) {
    constexpr std::string_view suffix = ".json";
    if (filename.size() != 40 + suffix.size() || !filename.ends_with(suffix))
        return false;
    return is_commit_hash(filename.substr(0, 40));
}

inline CorpusStats stats_of_output_dir(const std::filesystem::path& dir) {
    CorpusStats s;
    std::vector<std::filesystem::path> index_files;
    std::error_code ec;
    for (std::filesystem::directory_iterator it(dir, ec), end; it != end;
         it.increment(ec)) {
        if (ec) break;
        if (it->is_regular_file(ec) && is_index_artifact(it->path().filename().string()))
            index_files.push_back(it->path());
    }
    if (index_files.empty()) return s;
    std::sort(index_files.begin(), index_files.end());
    s.repositories = 1;

    for (const auto& index_path : index_files) {
        const json index = read_json_file(index_path);
        const auto files = index.find("files");
        if (files == index.end() || !files->is_object())
            throw DataError("malformed index artifact: " + index_path.generic_string());
        s.all_files += static_cast<std::int64_t>(files->size());
        for (const auto& [path, entry] : files->items()) {
            (void)path;
            if (entry.contains("classes"))
                for (const auto& cls : entry["classes"]) {
                    ++s.all_classes;
                    if (cls.contains("methods"))
                        s.all_methods += static_cast<std::int64_t>(cls["methods"].size());
                }
            if (entry.contains("functions"))
                s.all_methods += static_cast<std::int64_t>(entry["functions"].size());
        }

        std::filesystem::path tests_path = index_path;
        tests_path.replace_extension(".tests.json");
        if (std::filesystem::exists(tests_path, ec)) {
            const json tests = read_json_file(tests_path);
            if (tests.contains("test_files"))
                for (const auto& tf : tests["test_files"]) {
                    ++s.test_files;
                    if (tf.contains("tests"))
                        s.test_methods += static_cast<std::int64_t>(tf["tests"].size());
                }
        }

        std::filesystem::path focal_path = index_path;
        focal_path.replace_extension(".focal.json");
        if (std::filesystem::exists(focal_path, ec)) {
            const json focal = read_json_file(focal_path);
            for (const auto& [file, fileobj] : focal.items()) {
                (void)file;
                if (fileobj.contains("methods"))
                    s.focal_methods +=
                        static_cast<std::int64_t>(fileobj["methods"].size());
            }
        }
    }
    return s;
}

}  // namespace detail

// Folds the counters over every `<data>/<owner>/<name>` output directory.
// An output directory is one holding at least one `<hash>.json`.
inline CorpusStats collect_stats(const std::filesystem::path& data_dir) {
    CorpusStats total;
    bool any = false;
    std::error_code ec;
    std::vector<std::filesystem::path> repo_dirs;
    for (std::filesystem::directory_iterator owner_it(data_dir, ec), end;
         owner_it != end; owner_it.increment(ec)) {
        if (ec) break;
        if (!owner_it->is_directory(ec)) continue;
        for (std::filesystem::directory_iterator name_it(owner_it->path(), ec), end2;
             name_it != end2; name_it.increment(ec)) {
            if (ec) break;
            if (name_it->is_directory(ec)) repo_dirs.push_back(name_it->path());
        }
    }
    std::sort(repo_dirs.begin(), repo_dirs.end());
    for (const auto& dir : repo_dirs) {
        const CorpusStats s = detail::stats_of_output_dir(dir);
        if (s.repositories == 0) continue;
        any = true;
        total += s;
    }
    if (!any)
        throw DataError("no repository outputs under " + data_dir.generic_string());
    return total;
}

}  // namespace focalmap
