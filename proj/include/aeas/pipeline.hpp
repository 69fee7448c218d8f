#pragma once

#include "aeas/config.hpp"
#include "aeas/evalkit.hpp"
#include "aeas/report.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace aeas {

// Fixed output file names under RunConfig::out_dir.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kFindingsDir = "findings";
inline constexpr const char* kScoresFile = "scores.json";
inline constexpr const char* kReportFile = "report.md";
inline constexpr const char* kMetricsFile = "metrics.json";

struct ManifestEntry {
    std::string artifact_id;
    std::string repo_id;
    double confidence = 0.0;
    double quality = 0.0;
    std::string status; // kept, dropped_size, dropped_confidence, dropped_rank
    std::size_t rank = 0; // 1-based priority for kept entries
};

struct CveManifest {
    std::string cve_id;
    std::size_t candidates = 0;
    std::vector<ManifestEntry> kept;    // priority order
    std::vector<ManifestEntry> dropped; // by artifact_id
};

struct FilterManifest {
    std::string reference_time;
    std::vector<CveManifest> cves; // by cve_id
};

FilterManifest build_manifest(const Corpus& corpus, const FilterConfig& cfg, Timestamp now);
std::string manifest_to_json(const FilterManifest& manifest);
FilterManifest manifest_from_json(std::string_view text);

/// `live` wraps an LlmClient over `transport` (cpp-httplib when null).
std::unique_ptr<AnalyzerBackend> make_backend(const RunConfig& cfg,
                                              std::shared_ptr<Transport> transport = nullptr);

/// Runs fn(i) for i in [0, n) on up to `cap` threads. The first exception
/// is rethrown after every worker has stopped.
void parallel_for(std::size_t n, std::size_t cap, const std::function<void(std::size_t)>& fn);

Corpus load_run_corpus(const RunConfig& cfg);

FilterManifest cmd_filter(const RunConfig& cfg);

struct ExtractSummary {
    std::size_t artifacts = 0;
    std::size_t backend_calls = 0;
    std::size_t failed_replies = 0;
    std::size_t defaulted = 0;
};

/// Needs manifest.json (runs the filter stage first when it is absent).
ExtractSummary cmd_extract(const RunConfig& cfg, AnalyzerBackend& backend);
ExtractSummary cmd_extract(const RunConfig& cfg);

/// Needs findings for every kept artifact; writes scores.json and report.md.
ScoreReport cmd_score(const RunConfig& cfg);

/// filter, extract and score in one go.
ScoreReport cmd_rank(const RunConfig& cfg);

/// Re-renders report.md from scores.json.
std::string cmd_report(const RunConfig& cfg);

struct RankingMetric {
    std::string metric; // top_k_success, precision_at_k, recall_k_for_top_j, random_select
    std::size_t k = 0;
    std::size_t j = 0;
    double value = 0.0;
};

struct BaselineAgreement {
    std::string baseline;
    std::string subset; // all, with_exploits
    AgreementStats stats;
};

struct EvalReport {
    std::size_t labeled_cases = 0;
    std::size_t functional_cases = 0;
    std::vector<RankingMetric> ranking;
    std::vector<BaselineAgreement> agreement;
};

std::vector<RankingCase> build_ranking_cases(const ScoreReport& scores, const Corpus& corpus,
                                             const std::vector<GroundTruthLabel>& labels);

/// Needs scores.json and cfg.labels; writes metrics.json and plot data
/// under plots/.
EvalReport cmd_eval(const RunConfig& cfg);

std::string render_eval_tables(const EvalReport& report);

} // namespace aeas
