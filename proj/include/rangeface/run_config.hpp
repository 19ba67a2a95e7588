#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rangeface/matching.hpp"

namespace rangeface {

/// Every tunable of the pipeline behind one dotted-key namespace, so config
/// files (`detector.w = 0.9`) and command-line flags (`--detector-w 0.9`)
/// address the same settings.
struct RunConfig {
    PipelineConfig pipeline;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool verbose = false;

    /// Applies one setting; throws on unknown keys or unparseable values.
    void set(const std::string& key, const std::string& value);

    /// Reads `key = value` lines; '#' starts a comment, blank lines are
    /// skipped. Later lines win over earlier ones.
    void load_file(const std::filesystem::path& path);

    /// Re-checks every component invariant after merging sources.
    void validate() const;

    /// All dotted keys set() accepts, in a stable order.
    static std::vector<std::string> known_keys();
};

}  // namespace rangeface
