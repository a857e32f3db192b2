#include "codezoom/line_diff.hpp"

#include <algorithm>
#include <stdexcept>

namespace codezoom::diff {

std::vector<Edit> edit_script(std::span<const std::string> a, std::span<const std::string> b)
{
    // Common prefix and suffix never change the optimum and shrink the table.
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
        ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
        ++suffix;

    const std::size_t n = a.size() - prefix - suffix;
    const std::size_t m = b.size() - prefix - suffix;
    auto A = a.subspan(prefix, n);
    auto B = b.subspan(prefix, m);

    // lcs[i][j] = LCS length of A[i..] and B[j..]
    std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
    auto at = [m1 = m + 1, &lcs](std::size_t i, std::size_t j) -> std::uint32_t& { return lcs[i * m1 + j]; };
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            at(i, j) = A[i] == B[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));

    std::vector<Edit> out;
    out.reserve(a.size() + b.size());
    for (std::size_t k = 0; k < prefix; ++k)
        out.push_back({EditKind::Keep, k, k});

    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && A[i] == B[j]) {
            out.push_back({EditKind::Keep, prefix + i, prefix + j});
            ++i;
            ++j;
        } else if (i < n && (j == m || at(i + 1, j) >= at(i, j + 1))) {
            out.push_back({EditKind::Delete, prefix + i, prefix + j});
            ++i;
        } else {
            out.push_back({EditKind::Insert, prefix + i, prefix + j});
            ++j;
        }
    }

    for (std::size_t k = 0; k < suffix; ++k)
        out.push_back({EditKind::Keep, prefix + n + k, prefix + m + k});
    return out;
}

std::size_t edit_cost(const std::vector<Edit>& script)
{
    return static_cast<std::size_t>(
        std::count_if(script.begin(), script.end(), [](const Edit& e) { return e.kind != EditKind::Keep; }));
}

std::vector<ChangeRun> change_runs(std::span<const std::string> a, std::span<const std::string> b)
{
    std::vector<ChangeRun> runs;
    auto script = edit_script(a, b);
    for (std::size_t k = 0; k < script.size();) {
        if (script[k].kind == EditKind::Keep) {
            ++k;
            continue;
        }
        ChangeRun run;
        run.old_start = script[k].old_index;
        run.new_start = script[k].new_index;
        for (; k < script.size() && script[k].kind != EditKind::Keep; ++k) {
            if (script[k].kind == EditKind::Delete)
                run.old_lines.push_back(a[script[k].old_index]);
            else
                run.new_lines.push_back(b[script[k].new_index]);
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

std::vector<std::string> apply_runs(std::span<const std::string> a, const std::vector<ChangeRun>& runs)
{
    std::vector<std::string> out;
    std::size_t cursor = 0;
    for (const auto& run : runs) {
        if (run.old_start < cursor || run.old_start + run.old_lines.size() > a.size())
            throw std::invalid_argument("change run out of order or out of range");
        out.insert(out.end(), a.begin() + static_cast<long>(cursor), a.begin() + static_cast<long>(run.old_start));
        for (std::size_t k = 0; k < run.old_lines.size(); ++k)
            if (a[run.old_start + k] != run.old_lines[k])
                throw std::invalid_argument("change run does not match the original text at line " +
                                            std::to_string(run.old_start + k + 1));
        out.insert(out.end(), run.new_lines.begin(), run.new_lines.end());
        cursor = run.old_start + run.old_lines.size();
    }
    out.insert(out.end(), a.begin() + static_cast<long>(cursor), a.end());
    return out;
}

std::vector<std::string> split_keep_newlines(std::string_view text)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        std::size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
        lines.emplace_back(text.substr(start, end - start));
        start = end;
    }
    return lines;
}

std::string join(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& l : lines)
        out += l;
    return out;
}

namespace {

void emit_line(std::string& out, char marker, const std::string& line)
{
    out += marker;
    out += line;
    if (line.empty() || line.back() != '\n')
        out += "\n\\ No newline at end of file\n";
}

std::string range_header(std::size_t start, std::size_t count)
{
    // Unified diff convention: an empty range names the line before it.
    std::size_t first = count == 0 ? start : start + 1;
    return std::to_string(first) + (count == 1 ? "" : "," + std::to_string(count));
}

} // namespace

std::string unified_diff(std::span<const std::string> a, std::span<const std::string> b,
                         std::string_view old_label, std::string_view new_label, std::size_t context)
{
    auto script = edit_script(a, b);

    // Windows of [change - context, change + context) merged when they touch.
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    for (std::size_t k = 0; k < script.size();) {
        if (script[k].kind == EditKind::Keep) {
            ++k;
            continue;
        }
        std::size_t run_end = k;
        while (run_end < script.size() && script[run_end].kind != EditKind::Keep)
            ++run_end;
        std::size_t begin = k > context ? k - context : 0;
        std::size_t end = std::min(script.size(), run_end + context);
        if (!windows.empty() && begin <= windows.back().second)
            windows.back().second = end;
        else
            windows.emplace_back(begin, end);
        k = run_end;
    }

    std::string out;
    if (windows.empty())
        return out;
    out += "--- " + std::string(old_label) + "\n+++ " + std::string(new_label) + "\n";
    for (auto [begin, end] : windows) {
        std::size_t old_count = 0, new_count = 0;
        for (std::size_t t = begin; t < end; ++t) {
            old_count += script[t].kind != EditKind::Insert;
            new_count += script[t].kind != EditKind::Delete;
        }
        out += "@@ -" + range_header(script[begin].old_index, old_count) + " +" +
               range_header(script[begin].new_index, new_count) + " @@\n";
        for (std::size_t t = begin; t < end; ++t) {
            const auto& e = script[t];
            if (e.kind == EditKind::Keep)
                emit_line(out, ' ', a[e.old_index]);
            else if (e.kind == EditKind::Delete)
                emit_line(out, '-', a[e.old_index]);
            else
                emit_line(out, '+', b[e.new_index]);
        }
    }
    return out;
}

} // namespace codezoom::diff
