#pragma once

#include "aeas/corpus.hpp"
#include "aeas/time.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aeas {

/// Per-repository "goodness" indicators, each in [0,1]: d for description
/// length, i for issue count, t for topic relevance.
struct RepoSignals {
    double d = 1.0;
    double i = 1.0;
    double t = 1.0;
};

struct FilterConfig {
    std::array<double, 3> confidence_weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double confidence_threshold = 0.5;
    double quality_lambda = 1.0 / 365.0; // per day of repository age
    double max_description_len = 2000.0;
    double max_issue_count = 100.0;
    std::uint64_t min_size_bytes = 1024;
    std::uint64_t max_size_bytes = 50ull * 1024 * 1024;
    std::size_t top_n = 10; // 0 keeps every eliminated survivor
    std::set<std::string, std::less<>> relevant_topics{
        "cve",     "exploit",       "exploits",  "poc",        "proof-of-concept",
        "rce",     "vulnerability", "security",  "pentest",    "penetration-testing",
        "red-team", "redteam",      "infosec",   "lpe",        "privilege-escalation"};
    std::set<std::string, std::less<>> keep_extensions;
    std::set<std::string, std::less<>> drop_extensions;
    std::optional<Timestamp> reference_time;

    /// Weights non-negative with positive sum, finite threshold, lambda > 0,
    /// positive normalizers, sane size window. Throws ConfigError.
    void validate() const;
};

RepoSignals repo_signals(const RepoMeta& meta, const std::set<std::string, std::less<>>& relevant_topics,
                         const FilterConfig& cfg = {});

/// w1*d + w2*i + w3*t.
double confidence_score(const RepoSignals& s, const FilterConfig& cfg);

/// Stars * lambda * age_days / max(Forks, 1).
double quality_score(const RepoMeta& meta, Timestamp now, const FilterConfig& cfg);

bool within_size_bounds(const RepoMeta& meta, const FilterConfig& cfg);

enum class ScreenOutcome { Kept, DroppedSize, DroppedConfidence };

struct ScreenResult {
    double confidence = 0.0;
    ScreenOutcome outcome = ScreenOutcome::Kept;
};

/// Size window first, then the confidence threshold. The comparison
/// tolerates rounding proportional to the weight sum, so scaling weights and
/// threshold together does not flip a decision.
ScreenResult screen_repo(const RepoMeta& meta, const FilterConfig& cfg);

std::vector<std::size_t> eliminate_indices(std::span<const RepoMeta> repos, const FilterConfig& cfg);
std::vector<RepoMeta> eliminate(std::span<const RepoMeta> repos, const FilterConfig& cfg);

/// Eliminates, then orders survivors by quality descending, stars
/// descending, repo_id ascending; truncates to top_n (0 = unlimited).
std::vector<std::size_t> prioritize_indices(std::span<const RepoMeta> repos, Timestamp now,
                                            const FilterConfig& cfg, std::size_t top_n);
std::vector<RepoMeta> prioritize(std::span<const RepoMeta> repos, Timestamp now,
                                 const FilterConfig& cfg, std::size_t top_n);

enum class FileDecision { Keep, Drop };

FileDecision file_filter(std::string_view path, FileKind kind, const FilterConfig& cfg = {});

/// Readability-style main-content extraction. Plain text passes through
/// untouched; HTML loses navigation, sidebars and ads while headings,
/// paragraphs and <pre>/<code> blocks survive in document order.
std::string extract_main_content(std::string_view html);

bool looks_like_html(std::string_view text);

} // namespace aeas
