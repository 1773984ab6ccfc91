#pragma once

// Shared helpers for the test suite: scratch directories, fixture tree
// copying, and turning checked-in fixture trees into real git
// repositories with reproducible commit hashes.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "focalmap/ingest.hpp"
#include "focalmap/subprocess.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(FOCALMAP_FIXTURE_DIR); }
inline fs::path golden_dir() { return fs::path(FOCALMAP_GOLDEN_DIR); }
inline std::string cli_path() { return std::string(FOCALMAP_CLI_PATH); }

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        const fs::path base = fs::temp_directory_path();
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::ostringstream name;
            name << "focalmap-test-" << ::getpid() << "-" << counter.fetch_add(1)
                 << "-" << (rd() & 0xffffu);
            fs::path candidate = base / name.str();
            std::error_code ec;
            if (fs::create_directory(candidate, ec)) {
                path_ = std::move(candidate);
                return;
            }
        }
        throw std::runtime_error("cannot create scratch directory");
    }

    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

inline void copy_tree(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    fs::copy(from, to,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

// Environment for git invocations in tests: pinned dates and no user
// config, so every materialization of the same tree produces the same
// commit hash.
inline std::map<std::string, std::string> git_env() {
    return {
        {"GIT_AUTHOR_DATE", "2024-01-02T03:04:05+00:00"},
        {"GIT_COMMITTER_DATE", "2024-01-02T03:04:05+00:00"},
        {"GIT_CONFIG_GLOBAL", "/dev/null"},
        {"GIT_CONFIG_SYSTEM", "/dev/null"},
        {"GIT_TERMINAL_PROMPT", "0"},
    };
}

// Initializes `repo` as a git repository and commits its current
// contents. Returns the head commit hash.
inline std::string git_commit_all(const fs::path& repo) {
    using focalmap::run_checked;
    const auto env = git_env();
    const std::string dir = repo.string();
    run_checked({"git", "init", "--quiet", "--initial-branch=main", dir}, std::nullopt, env);
    run_checked({"git", "-C", dir, "add", "--all"}, std::nullopt, env);
    run_checked({"git", "-C", dir, "-c", "user.name=Fixture", "-c",
                 "user.email=fixture@example.invalid", "commit", "--quiet", "-m",
                 "snapshot"},
                std::nullopt, env);
    return focalmap::capture_head_commit(dir);
}

// Copies the checked-in fixture tree for owner/name into
// `dest_root/owner/name` and turns it into a git repository. Returns the
// head commit hash.
inline std::string materialize_repo(const std::string& owner, const std::string& name,
                                    const fs::path& dest_root) {
    const fs::path src = fixture_dir() / "repos" / owner / name;
    const fs::path dst = dest_root / owner / name;
    copy_tree(src, dst);
    return git_commit_all(dst);
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the command line tool with the given arguments.
inline CliResult run_cli(const std::vector<std::string>& args,
                         const std::optional<std::string>& cwd = std::nullopt,
                         const std::map<std::string, std::string>& env = {}) {
    std::vector<std::string> argv;
    argv.reserve(args.size() + 1);
    argv.push_back(cli_path());
    argv.insert(argv.end(), args.begin(), args.end());
    auto merged = git_env();  // clones inside the pipeline must be quiet too
    for (const auto& [k, v] : env) merged[k] = v;
    focalmap::CommandResult r = focalmap::run_command(argv, cwd, merged);
    return {r.exit_code, r.out, r.err};
}

}  // namespace testsupport
