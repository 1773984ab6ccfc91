#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "focalmap/context.hpp"
#include "focalmap/discovery.hpp"
#include "focalmap/ingest.hpp"
#include "focalmap/parallel.hpp"
#include "focalmap/resolver.hpp"
#include "focalmap/stats.hpp"
#include "focalmap/store.hpp"

namespace focalmap {

struct RepoTask {
    std::string owner;
    std::string name;
};

// One `owner/name` per line; `#` starts a comment. Malformed lines are
// reported through `warn` and skipped.
inline std::vector<RepoTask> parse_repo_list(
    std::istream& in, const std::function<void(const std::string&)>& warn) {
    std::vector<RepoTask> tasks;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const std::size_t e = line.find_last_not_of(" \t\r");
        const std::string entry = line.substr(b, e - b + 1);
        const std::size_t slash = entry.find('/');
        if (slash == std::string::npos || slash == 0 || slash + 1 == entry.size() ||
            entry.find('/', slash + 1) != std::string::npos ||
            entry.find_first_of(" \t") != std::string::npos) {
            warn("skipping malformed repo list line " + std::to_string(lineno) + ": " +
                 entry);
            continue;
        }
        tasks.push_back({entry.substr(0, slash), entry.substr(slash + 1)});
    }
    return tasks;
}

inline std::vector<RepoTask> parse_repo_list_file(
    const std::filesystem::path& path,
    const std::function<void(const std::string&)>& warn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read repo list: " + path.generic_string());
    return parse_repo_list(in, warn);
}

struct PipelineOptions {
    std::filesystem::path repos_dir = "repos";
    std::filesystem::path data_dir = "data";
    unsigned jobs = 0;  // 0 → default_jobs()
    std::string remote_base = "https://github.com/";
    bool clone = true;       // `run` clones; `index`/`map` use local checkouts
    bool index_only = false; // `index` stops after the index artifact
};

struct RepoResult {
    RepoTask task;
    bool ok = false;
    std::string hash;
    std::string error;
    std::size_t files = 0;
    std::size_t test_files = 0;
    std::size_t mappings = 0;
};

// Full pipeline for one repository: checkout → index → discover → resolve
// → artifacts. `inner_jobs` parallelizes file indexing within the repo.
inline RepoResult process_repo(const RepoTask& task, const PipelineOptions& opts,
                               unsigned inner_jobs = 1) {
    RepoResult result;
    result.task = task;

    std::filesystem::path root;
    if (opts.clone) {
        root = ensure_checkout(task.owner, task.name, opts.repos_dir,
                               opts.remote_base);
    } else {
        root = opts.repos_dir / task.owner / task.name;
        std::error_code ec;
        if (!std::filesystem::is_directory(root, ec))
            throw DataError("no checkout at " + root.generic_string());
    }
    result.hash = capture_head_commit(root);

    const std::vector<std::string> rel_paths = discover_python_files(root);
    std::vector<FileIndex> indexed(rel_paths.size());
    parallel_for(rel_paths.size(), inner_jobs, [&](std::size_t i) {
        indexed[i] = index_one_path(root, rel_paths[i]);
    });
    std::map<std::string, FileIndex> files;
    for (std::size_t i = 0; i < rel_paths.size(); ++i)
        files.emplace(rel_paths[i], std::move(indexed[i]));
    const RepoIndex repo = make_repo_index(std::move(files));
    result.files = repo.files.size();

    const RepoOutputSet outs =
        make_output_set(opts.data_dir, task.owner, task.name, result.hash);
    write_json_file(outs.index_path, index_to_json(repo.files));
    if (opts.index_only) {
        result.ok = true;
        return result;
    }

    const FrameworkMap fwmap = classify_all(repo);
    std::vector<TestFileRecord> test_files;
    for (const auto& [path, fw] : fwmap) {
        (void)fw;
        test_files.push_back(discover_tests(repo.files.at(path), repo, fwmap));
    }
    result.test_files = test_files.size();
    write_json_file(outs.tests_path, tests_to_json(test_files));

    std::vector<FocalMapping> mappings;
    for (const auto& tf : test_files)
        if (auto mapping = build_focal_mapping(tf, repo, fwmap))
            mappings.push_back(std::move(*mapping));
    result.mappings = mappings.size();
    write_focal(mappings, outs);

    result.ok = true;
    return result;
}

// Processes every task, isolating per-repo failures. Exit code 0 when at
// least one repository succeeded, 1 otherwise.
inline int run_pipeline(const std::vector<RepoTask>& tasks, const PipelineOptions& opts,
                        const std::function<void(const std::string&)>& log) {
    const unsigned jobs = opts.jobs == 0 ? default_jobs() : opts.jobs;
    const unsigned repo_jobs = tasks.size() == 1 ? 1 : jobs;
    const unsigned inner_jobs = tasks.size() == 1 ? jobs : 1;

    std::vector<RepoResult> results(tasks.size());
    std::mutex log_mutex;
    auto locked_log = [&](const std::string& line) {
        const std::lock_guard<std::mutex> guard(log_mutex);
        log(line);
    };

    parallel_for(tasks.size(), repo_jobs, [&](std::size_t i) {
        const RepoTask& task = tasks[i];
        const std::string label = task.owner + "/" + task.name;
        try {
            results[i] = process_repo(task, opts, inner_jobs);
            locked_log(label + ": " + std::to_string(results[i].files) + " files, " +
                       std::to_string(results[i].test_files) + " test files, " +
                       std::to_string(results[i].mappings) + " mapped test files");
        } catch (const std::exception& e) {
            results[i].task = task;
            results[i].ok = false;
            results[i].error = e.what();
            locked_log(label + ": failed: " + e.what());
        }
    });

    const bool any_ok =
        std::any_of(results.begin(), results.end(),
                    [](const RepoResult& r) { return r.ok; });
    return any_ok ? 0 : 1;
}

}  // namespace focalmap
