#pragma once

#include <stdexcept>
#include <string>

namespace focalmap {

// Tokenization or indentation failure inside a Python source file.
// `line` is 1-based and refers to the decoded text.
struct ParseError : std::runtime_error {
    int line;

    ParseError(int line_, const std::string& msg)
        : std::runtime_error(msg), line(line_) {}
};

// A child process could not be spawned, or exited non-zero where success
// was required (clone, checkout, rev-parse).
struct SubprocessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed artifact content: bad JSON shape, impossible spans, stale
// checkouts. The message names the offending key path where applicable.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace focalmap
