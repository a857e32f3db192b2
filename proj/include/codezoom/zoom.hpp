#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "codezoom/grammar.hpp"
#include "codezoom/llm_client.hpp"
#include "codezoom/pipeline.hpp"

namespace codezoom {

/// FNV-1a over the compact interchange text of `block`.
std::uint64_t fingerprint(const Block& block);

/// A coarse statement list and the finer list it expands to. Collapse
/// summaries are always a single statement; a coarse side recorded by
/// expanding a multi-statement selection keeps all of them.
struct ZoomEntry {
    Block coarse;
    Block fine;
    friend bool operator==(const ZoomEntry&, const ZoomEntry&) = default;
};

class ZoomCache {
public:
    ZoomCache() = default;
    ZoomCache(const ZoomCache& other);
    ZoomCache& operator=(const ZoomCache& other);

    /// Validates both sides; a later entry wins over earlier ones on lookup.
    void record(const Block& coarse, const Block& fine);

    std::optional<Block> fine_for(const Block& coarse) const;
    std::optional<Block> coarse_for(const Block& fine) const;

    std::size_t size() const;
    std::vector<ZoomEntry> entries() const;

    nlohmann::json to_json() const;
    static ZoomCache from_json(const nlohmann::json& j);

private:
    void index_last();

    mutable std::shared_mutex mutex_;
    std::vector<ZoomEntry> entries_;
    std::unordered_multimap<std::uint64_t, std::size_t> by_coarse_;
    std::unordered_multimap<std::uint64_t, std::size_t> by_fine_;
};

enum class ZoomOp { Expand, Collapse };

struct ZoomResult {
    PseudoProgram program;
    LineRange changed_range; // in the new rendering
    bool used_cache = false;
    BlockSelection selection; // what the requested range widened to, in the old rendering
};

/// Collapse got a multi-statement answer on every attempt.
class SummaryShapeError : public std::runtime_error {
public:
    SummaryShapeError(const std::string& message, int attempts);
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

/// Canonical rendering with `<<<REGION` / `REGION>>>` lines around the selection.
std::string mark_region(const PseudoProgram& program, const BlockSelection& selection);

llm::ChatRequest zoom_request(ZoomOp op, const PseudoProgram& program, const SourceDocument& source,
                              const BlockSelection& selection);

ZoomResult expand(const PseudoProgram& program, const SourceDocument& source, LineRange range, ZoomCache& cache,
                  const llm::Client& client);
ZoomResult collapse(const PseudoProgram& program, const SourceDocument& source, LineRange range, ZoomCache& cache,
                    const llm::Client& client);
ZoomResult zoom(ZoomOp op, const PseudoProgram& program, const SourceDocument& source, LineRange range,
                ZoomCache& cache, const llm::Client& client);

} // namespace codezoom
