#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace codezoom::diff {

enum class EditKind { Keep, Delete, Insert };

struct Edit {
    EditKind kind;
    std::size_t old_index; // position in `a` (for Insert: the line it precedes)
    std::size_t new_index; // position in `b` (for Delete: the line it precedes)
};

/// Minimal line edit script (fewest deleted + inserted lines). Among optimal
/// alignments the leftmost one is chosen: equal lines are matched as early as
/// possible and, inside a changed run, deletions precede insertions.
std::vector<Edit> edit_script(std::span<const std::string> a, std::span<const std::string> b);

/// Number of deleted plus inserted lines in a script.
std::size_t edit_cost(const std::vector<Edit>& script);

/// Maximal run of non-Keep edits. Indices are 0-based.
struct ChangeRun {
    std::size_t old_start = 0;
    std::size_t new_start = 0;
    std::vector<std::string> old_lines;
    std::vector<std::string> new_lines;

    friend bool operator==(const ChangeRun&, const ChangeRun&) = default;
};

std::vector<ChangeRun> change_runs(std::span<const std::string> a, std::span<const std::string> b);

/// Applies runs computed against `a`; throws std::invalid_argument when a run
/// does not match `a`.
std::vector<std::string> apply_runs(std::span<const std::string> a, const std::vector<ChangeRun>& runs);

/// Splits text into lines that keep their trailing '\n'; concatenating the
/// result reproduces the input exactly.
std::vector<std::string> split_keep_newlines(std::string_view text);
std::string join(const std::vector<std::string>& lines);

/// Unified diff over lines produced by split_keep_newlines.
std::string unified_diff(std::span<const std::string> a, std::span<const std::string> b,
                         std::string_view old_label, std::string_view new_label, std::size_t context = 3);

} // namespace codezoom::diff
