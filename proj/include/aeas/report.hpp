#pragma once

#include "aeas/scoring.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aeas {

struct ScoredExploit {
    std::string artifact_id;
    std::string repo_id;
    ExploitScore score;
    std::size_t defaulted_subfeatures = 0;
};

struct ScoredVulnerability {
    std::string cve_id;
    std::string application;
    std::optional<double> cvss;
    std::optional<double> epss;
    double severity = 0.0;
    std::vector<ScoredExploit> exploits; // actionability descending, artifact_id ascending
    std::vector<std::string> dropped;    // candidates removed by the prefilter
};

struct ScoreReport {
    std::string backend;
    std::vector<ScoredVulnerability> vulnerabilities; // by cve_id
};

/// Sorts exploits and sets severity from them.
void finalize(ScoredVulnerability& v);

/// Vulnerabilities by severity descending, then cve_id.
std::vector<const ScoredVulnerability*> severity_order(const ScoreReport& report);

std::string scores_to_json(const ScoreReport& report);
ScoreReport scores_from_json(std::string_view text);

/// Markdown with, per vulnerability, the severity, each exploit's score and
/// every feature value with its justification lines.
std::string render_report_markdown(const ScoreReport& report);

/// Fixed-point rendering used in reports ("0.9500").
std::string format_score(double v, int precision = 4);

} // namespace aeas
