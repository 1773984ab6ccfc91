#pragma once

#include <array>
#include <cerrno>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "focalmap/error.hpp"

namespace focalmap {

struct CommandResult {
    int exit_code = -1;  // -1 when the child died from a signal
    std::string out;
    std::string err;

    bool ok() const { return exit_code == 0; }
};

namespace detail {

inline void write_child_error(int fd, const char* what) {
    std::string msg = std::string(what) + ": " + std::strerror(errno);
    ssize_t n = ::write(fd, msg.data(), msg.size());
    (void)n;
}

}  // namespace detail

// Runs argv with execvp semantics: stdin from /dev/null, stdout/stderr
// captured separately. `env` entries are applied on top of the inherited
// environment. Throws SubprocessError only when the child cannot be
// spawned; a non-zero exit is reported through the result so callers can
// attach context.
inline CommandResult run_command(const std::vector<std::string>& argv,
                                 const std::optional<std::string>& cwd = std::nullopt,
                                 const std::map<std::string, std::string>& env = {}) {
    if (argv.empty()) throw SubprocessError("run_command: empty argv");

    int out_pipe[2];
    int err_pipe[2];
    int spawn_pipe[2];  // child reports exec failures through this, CLOEXEC
    if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0 || ::pipe(spawn_pipe) != 0)
        throw SubprocessError(std::string("pipe: ") + std::strerror(errno));
    ::fcntl(spawn_pipe[1], F_SETFD, FD_CLOEXEC);

    const pid_t pid = ::fork();
    if (pid < 0) throw SubprocessError(std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        ::close(out_pipe[0]);
        ::close(err_pipe[0]);
        ::close(spawn_pipe[0]);
        if (cwd && ::chdir(cwd->c_str()) != 0) {
            detail::write_child_error(spawn_pipe[1], "chdir");
            ::_exit(127);
        }
        for (const auto& [key, value] : env) ::setenv(key.c_str(), value.c_str(), 1);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
            ::close(devnull);
        }
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(out_pipe[1]);
        ::close(err_pipe[1]);

        std::vector<char*> raw;
        raw.reserve(argv.size() + 1);
        for (const auto& a : argv) raw.push_back(const_cast<char*>(a.c_str()));
        raw.push_back(nullptr);
        ::execvp(raw[0], raw.data());
        detail::write_child_error(spawn_pipe[1], "execvp");
        ::_exit(127);
    }

    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    ::close(spawn_pipe[1]);

    CommandResult result;
    std::string spawn_error;
    struct Stream {
        int fd;
        std::string* sink;
        bool open;
    };
    std::array<Stream, 3> streams{{{out_pipe[0], &result.out, true},
                                   {err_pipe[0], &result.err, true},
                                   {spawn_pipe[0], &spawn_error, true}}};

    char buf[4096];
    while (true) {
        std::vector<pollfd> fds;
        for (const auto& s : streams)
            if (s.open) fds.push_back({s.fd, POLLIN, 0});
        if (fds.empty()) break;
        if (::poll(fds.data(), fds.size(), -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (const auto& p : fds) {
            if (!(p.revents & (POLLIN | POLLHUP | POLLERR))) continue;
            for (auto& s : streams) {
                if (s.fd != p.fd || !s.open) continue;
                const ssize_t n = ::read(s.fd, buf, sizeof buf);
                if (n > 0) {
                    s.sink->append(buf, static_cast<std::size_t>(n));
                } else {
                    ::close(s.fd);
                    s.open = false;
                }
            }
        }
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!spawn_error.empty())
        throw SubprocessError("cannot run '" + argv[0] + "': " + spawn_error);
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else
        result.exit_code = -1;
    return result;
}

// Convenience wrapper that demands success and folds stderr into the
// thrown message.
inline std::string run_checked(const std::vector<std::string>& argv,
                               const std::optional<std::string>& cwd = std::nullopt,
                               const std::map<std::string, std::string>& env = {}) {
    CommandResult r = run_command(argv, cwd, env);
    if (!r.ok()) {
        std::string cmd;
        for (const auto& a : argv) {
            if (!cmd.empty()) cmd += ' ';
            cmd += a;
        }
        throw SubprocessError("'" + cmd + "' failed (exit " +
                              std::to_string(r.exit_code) + "): " + r.err);
    }
    return r.out;
}

}  // namespace focalmap
