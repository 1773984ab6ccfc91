#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "focalmap/error.hpp"
#include "focalmap/indexer.hpp"
#include "focalmap/subprocess.hpp"

namespace focalmap {

struct RepoRef {
    std::string owner;
    std::string name;
    std::string head_hash;  // 40-hex commit of the indexed snapshot
    std::filesystem::path root;
};

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

inline bool is_commit_hash(std::string_view s) {
    return s.size() == 40 && std::all_of(s.begin(), s.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

namespace detail {

inline bool skip_directory(const std::filesystem::path& dir,
                           const std::filesystem::path& repo_root) {
    const std::string base = dir.filename().string();
    if (base == ".git" || base == ".hg" || base == ".svn" || base == "node_modules")
        return true;
    std::error_code ec;
    if (std::filesystem::exists(dir / "pyvenv.cfg", ec)) return true;
    // vendored checkouts below the root are foreign code
    if (dir != repo_root && std::filesystem::exists(dir / ".git", ec)) return true;
    return false;
}

inline void discover_into(const std::filesystem::path& dir,
                          const std::filesystem::path& repo_root,
                          std::vector<std::filesystem::path>& out) {
    std::error_code ec;
    for (std::filesystem::directory_iterator it(dir, ec), end; it != end;
         it.increment(ec)) {
        if (ec) break;
        const auto& entry = *it;
        if (entry.is_symlink(ec)) continue;
        if (entry.is_directory(ec)) {
            if (!skip_directory(entry.path(), repo_root))
                discover_into(entry.path(), repo_root, out);
        } else if (entry.is_regular_file(ec) && entry.path().extension() == ".py") {
            out.push_back(entry.path());
        }
    }
}

}  // namespace detail

// Relative paths of all .py files under root, forward slashes, sorted.
// Version-control metadata, virtualenvs, node_modules, and nested
// checkouts are skipped; symlinks are never followed.
inline std::vector<std::string> discover_python_files(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> found;
    detail::discover_into(root, root, found);
    std::vector<std::string> rel;
    rel.reserve(found.size());
    for (const auto& p : found)
        rel.push_back(std::filesystem::relative(p, root).generic_string());
    std::sort(rel.begin(), rel.end());
    return rel;
}

// Dotted module name for a file: walk up from the file while packages
// carry an __init__.py, then join the kept segments. `pkg/__init__.py`
// names the package itself. importable = every segment is an identifier.
inline SourceFileRef resolve_module_name(const std::filesystem::path& root,
                                         const std::string& relative_path) {
    SourceFileRef ref;
    ref.relative_path = relative_path;

    const std::filesystem::path rel(relative_path);
    std::vector<std::string> parts;
    for (const auto& seg : rel.parent_path()) parts.push_back(seg.string());

    std::string stem = rel.stem().string();
    const bool is_init = stem == "__init__";

    // segments without an __init__.py marker are plain directories, not
    // package levels; keep only the unbroken package chain above the file
    std::size_t keep_from = parts.size();
    while (keep_from > 0) {
        std::filesystem::path pkg = root;
        for (std::size_t i = 0; i < keep_from; ++i) pkg /= parts[i];
        std::error_code ec;
        if (!std::filesystem::exists(pkg / "__init__.py", ec)) break;
        --keep_from;
    }

    std::vector<std::string> segments(parts.begin() + static_cast<long>(keep_from),
                                      parts.end());
    if (!is_init) segments.push_back(stem);

    std::string module;
    for (const auto& seg : segments) {
        if (!module.empty()) module += '.';
        module += seg;
    }
    ref.module_name = std::move(module);
    ref.importable = std::all_of(segments.begin(), segments.end(),
                                 [](const std::string& s) { return is_identifier(s); });
    if (segments.empty()) ref.importable = false;
    return ref;
}

inline std::string capture_head_commit(const std::filesystem::path& repo_root) {
    std::string out = run_checked({"git", "-C", repo_root.string(), "rev-parse", "HEAD"});
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    if (!is_commit_hash(out))
        throw SubprocessError("git rev-parse returned an invalid commit id: " + out);
    return out;
}

inline std::string join_remote(const std::string& base, const std::string& owner,
                               const std::string& name) {
    std::string url = base;
    if (!url.empty() && url.back() != '/' && url.back() != ':') url += '/';
    return url + owner + "/" + name;
}

// Returns the checkout at <repos_dir>/<owner>/<name>, cloning it from the
// remote when absent. An existing directory is trusted as a cache hit.
inline std::filesystem::path ensure_checkout(
    const std::string& owner, const std::string& name,
    const std::filesystem::path& repos_dir,
    const std::string& remote_base = "https://github.com/") {
    const std::filesystem::path target = repos_dir / owner / name;
    std::error_code ec;
    if (std::filesystem::is_directory(target, ec)) return target;
    std::filesystem::create_directories(target.parent_path());
    run_checked({"git", "clone", "--quiet", join_remote(remote_base, owner, name),
                 target.string()},
                std::nullopt, {{"GIT_TERMINAL_PROMPT", "0"}});
    return target;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file: " + path.generic_string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Indexes every Python file of a checkout. Unreadable files degrade to
// parse_ok = false entries so the file count stays faithful.
inline FileIndex index_one_path(const std::filesystem::path& root,
                                const std::string& relative_path) {
    SourceFileRef ref = resolve_module_name(root, relative_path);
    try {
        const std::string bytes = read_file_bytes(root / relative_path);
        return index_file(bytes, std::move(ref));
    } catch (const DataError& e) {
        FileIndex fi;
        fi.file = std::move(ref);
        fi.parse_ok = false;
        fi.error_note = e.what();
        return fi;
    }
}

}  // namespace focalmap
