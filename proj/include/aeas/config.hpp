#pragma once

#include "aeas/analyzer.hpp"
#include "aeas/connectors.hpp"
#include "aeas/prefilter.hpp"
#include "aeas/scoring.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace aeas {

enum class BackendKind { Rules, Live };

std::string_view to_string(BackendKind b);
BackendKind backend_from_string(std::string_view text); // throws ConfigError

struct RunConfig {
    std::filesystem::path corpus_root;
    std::filesystem::path out_dir = "aeas-out";
    std::filesystem::path cache_dir = ".aeas-cache";
    std::filesystem::path labels;                           // optional, for eval
    std::map<std::string, std::filesystem::path> baselines; // name -> cve_id,score CSV
    BackendKind backend = BackendKind::Rules;
    std::size_t concurrency_cap = 4;
    std::size_t top_k = 3;

    FilterConfig filter;
    Weights weights;
    AnalyzerConfig analyzer;
    LiveBackendConfig live;
    LlmClientConfig llm;
    RepoClientConfig repo;

    /// Throws ConfigError.
    void validate() const;
};

/// Parses the JSON config document. Unknown keys are rejected; relative
/// paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace aeas
