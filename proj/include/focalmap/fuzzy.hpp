#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace focalmap {

// Length of the longest common subsequence of a and b. Two-row dynamic
// program, O(|a|*|b|) time; identifier-sized inputs in practice.
inline std::size_t lcs_length(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                          : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Similarity ratio on a 0..100 scale: round(100 * 2*LCS(a,b) / (|a|+|b|)),
// rounded half up. Two empty strings compare equal by convention (100).
// Case-sensitive, no normalization; scores feed the resolver cutoffs.
inline int similarity(std::string_view a, std::string_view b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 100;
    const std::size_t lcs = lcs_length(a, b);
    // floor((200*lcs/total) + 1/2) without leaving integer arithmetic.
    return static_cast<int>((400 * lcs + total) / (2 * total));
}

struct MatchResult {
    std::size_t index = 0;  // position in the candidate range
    int score = 0;
};

// Highest-scoring candidate by similarity(query, proj(candidate)); the
// earliest candidate wins ties, so callers control tie-breaking through
// input order. Empty when no score reaches cutoff.
template <typename Range, typename Proj>
std::optional<MatchResult> best_match(std::string_view query, const Range& candidates,
                                      int cutoff, Proj&& proj) {
    std::optional<MatchResult> best;
    std::size_t i = 0;
    for (const auto& c : candidates) {
        const int score = similarity(query, proj(c));
        if (!best || score > best->score) best = MatchResult{i, score};
        ++i;
    }
    if (!best || best->score < cutoff) return std::nullopt;
    return best;
}

inline std::optional<MatchResult> best_match(std::string_view query,
                                             const std::vector<std::string>& candidates,
                                             int cutoff) {
    return best_match(query, candidates, cutoff,
                      [](const std::string& s) { return std::string_view{s}; });
}

}  // namespace focalmap
