#include "codezoom/zoom.hpp"

#include <mutex>

#include "codezoom/prompts.hpp"
#include "codezoom/util.hpp"

namespace codezoom {

using nlohmann::json;

std::uint64_t fingerprint(const Block& block)
{
    return fnv1a64(to_interchange(block).dump());
}

ZoomCache::ZoomCache(const ZoomCache& other)
{
    std::shared_lock lock(other.mutex_);
    entries_ = other.entries_;
    by_coarse_ = other.by_coarse_;
    by_fine_ = other.by_fine_;
}

ZoomCache& ZoomCache::operator=(const ZoomCache& other)
{
    if (this == &other)
        return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = other.entries_;
    by_coarse_ = other.by_coarse_;
    by_fine_ = other.by_fine_;
    return *this;
}

void ZoomCache::record(const Block& coarse, const Block& fine)
{
    check_invariants(coarse);
    check_invariants(fine);
    if (coarse.empty() || fine.empty())
        throw InvariantError("zoom cache entries need statements on both sides");
    std::unique_lock lock(mutex_);
    if (!entries_.empty() && entries_.back().coarse == coarse && entries_.back().fine == fine)
        return;
    entries_.push_back({coarse, fine});
    index_last();
}

void ZoomCache::index_last()
{
    std::size_t i = entries_.size() - 1;
    by_coarse_.emplace(fingerprint(entries_[i].coarse), i);
    by_fine_.emplace(fingerprint(entries_[i].fine), i);
}

namespace {

std::optional<std::size_t> newest(const std::unordered_multimap<std::uint64_t, std::size_t>& index,
                                  const std::vector<ZoomEntry>& entries, const Block& key, bool coarse_side)
{
    std::optional<std::size_t> best;
    auto [lo, hi] = index.equal_range(fingerprint(key));
    for (auto it = lo; it != hi; ++it) {
        const auto& e = entries[it->second];
        if ((coarse_side ? e.coarse : e.fine) == key && (!best || it->second > *best))
            best = it->second;
    }
    return best;
}

} // namespace

std::optional<Block> ZoomCache::fine_for(const Block& coarse) const
{
    std::shared_lock lock(mutex_);
    if (auto i = newest(by_coarse_, entries_, coarse, true))
        return entries_[*i].fine;
    return std::nullopt;
}

std::optional<Block> ZoomCache::coarse_for(const Block& fine) const
{
    std::shared_lock lock(mutex_);
    if (auto i = newest(by_fine_, entries_, fine, false))
        return entries_[*i].coarse;
    return std::nullopt;
}

std::size_t ZoomCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::vector<ZoomEntry> ZoomCache::entries() const
{
    std::shared_lock lock(mutex_);
    return entries_;
}

json ZoomCache::to_json() const
{
    std::shared_lock lock(mutex_);
    json out = json::array();
    for (const auto& e : entries_)
        out.push_back({{"coarse", to_interchange(e.coarse)}, {"fine", to_interchange(e.fine)}});
    return out;
}

ZoomCache ZoomCache::from_json(const json& j)
{
    if (!j.is_array())
        throw SchemaError("zoom_cache", "expected an array");
    ZoomCache cache;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string at = "zoom_cache[" + std::to_string(i) + "]";
        const auto& e = j[i];
        if (!e.is_object() || !e.contains("coarse") || !e.contains("fine") || e.size() != 2)
            throw SchemaError(at, "expected {coarse, fine}");
        cache.record(block_from_interchange(e["coarse"], at + ".coarse"),
                     block_from_interchange(e["fine"], at + ".fine"));
    }
    return cache;
}

SummaryShapeError::SummaryShapeError(const std::string& message, int attempts)
    : std::runtime_error(message), attempts_(attempts)
{
}

std::string mark_region(const PseudoProgram& program, const BlockSelection& selection)
{
    auto r = render(program);
    std::string out;
    for (int line = 1; line <= static_cast<int>(r.lines.size()); ++line) {
        if (line == selection.lines.start)
            out += "<<<REGION\n";
        out += r.lines[line - 1] + "\n";
        if (line == selection.lines.end)
            out += "REGION>>>\n";
    }
    return out;
}

llm::ChatRequest zoom_request(ZoomOp op, const PseudoProgram& program, const SourceDocument& source,
                              const BlockSelection& selection)
{
    llm::ChatRequest req;
    req.system_text = prompts::fill_resource(
        "zoom_system", {{"grammar", std::string(prompts::resource("grammar"))},
                        {"schema", llm::response_format(llm::ResponseSchema::Steps)["json_schema"]["schema"].dump(2)}});
    bool expanding = op == ZoomOp::Expand;
    req.user_text = prompts::fill_resource(
        "zoom_user", {{"language", source.language_hint},
                      {"source", prompts::terminated(source.text)},
                      {"pseudocode", mark_region(program, selection)},
                      {"operation", expanding ? "expand" : "collapse"},
                      {"instruction", std::string(prompts::resource(expanding ? "zoom_expand" : "zoom_collapse"))}});
    req.response_schema = llm::ResponseSchema::Steps;
    return req;
}

namespace {

ZoomResult finish(const PseudoProgram& program, const BlockSelection& selection, const Block& replacement,
                  bool used_cache)
{
    ZoomResult result{replace_selection(program, selection, replacement), {}, used_cache, selection};
    auto map = render(result.program).map;
    NodePath first = selection.list_path;
    first.push_back(selection.first);
    NodePath last = selection.list_path;
    last.push_back(selection.first + replacement.size() - 1);
    result.changed_range = LineRange(map.span_of(first).start, map.span_of(last).end);
    return result;
}

BlockSelection select(const PseudoProgram& program, LineRange range)
{
    check_invariants(program);
    return slice(program, render(program).map, range);
}

} // namespace

ZoomResult expand(const PseudoProgram& program, const SourceDocument& source, LineRange range, ZoomCache& cache,
                  const llm::Client& client)
{
    auto selection = select(program, range);
    auto selected = selected_statements(program, selection);
    if (auto cached = cache.fine_for(selected))
        return finish(program, selection, *cached, true);

    auto response = client.complete(zoom_request(ZoomOp::Expand, program, source, selection));
    Block fine = block_from_interchange((*response.structured)["steps"]);
    cache.record(selected, fine);
    return finish(program, selection, fine, false);
}

ZoomResult collapse(const PseudoProgram& program, const SourceDocument& source, LineRange range, ZoomCache& cache,
                    const llm::Client& client)
{
    auto selection = select(program, range);
    auto selected = selected_statements(program, selection);
    if (auto cached = cache.coarse_for(selected))
        return finish(program, selection, *cached, true);
    if (selected.size() == 1 && selected.front().is_simple())
        return finish(program, selection, selected, false);

    auto request = zoom_request(ZoomOp::Collapse, program, source, selection);
    bool shape_failed = false;
    request.check = [&shape_failed](const json& doc) {
        shape_failed = doc["steps"].size() != 1;
        if (shape_failed)
            throw std::invalid_argument("a collapse summary must be exactly one statement, got " +
                                        std::to_string(doc["steps"].size()));
    };
    try {
        auto response = client.complete(request);
        Block summary = block_from_interchange((*response.structured)["steps"]);
        cache.record(summary, selected);
        return finish(program, selection, summary, false);
    } catch (const llm::LlmError& e) {
        if (e.kind() == llm::LlmErrorKind::SchemaAfterRetries && shape_failed)
            throw SummaryShapeError(e.what(), e.attempts());
        throw;
    }
}

ZoomResult zoom(ZoomOp op, const PseudoProgram& program, const SourceDocument& source, LineRange range,
                ZoomCache& cache, const llm::Client& client)
{
    return op == ZoomOp::Expand ? expand(program, source, range, cache, client)
                                : collapse(program, source, range, cache, client);
}

} // namespace codezoom
