#pragma once

#include "aeas/corpus.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aeas {

class EvalError : public Error {
public:
    using Error::Error;
};

struct RankingCase {
    std::string cve_id;
    std::vector<std::string> predicted_order; // descending actionability
    std::map<std::string, GroundTruthLabel> labels;
};

/// True when `a` is a better ground-truth artifact than `b`: higher observed
/// maturity, then shorter completion time (missing counts as slowest), then
/// fewer errors (missing counts as most), then smaller artifact_id.
bool label_better(const GroundTruthLabel& a, const GroundTruthLabel& b);

/// Labeled artifacts, best first.
std::vector<std::string> ground_truth_order(const RankingCase& c);

/// Throws EvalError unless predicted_order is a permutation of the labeled artifacts.
void validate_case(const RankingCase& c);

/// Share of cases (among those with a Functional label) whose top-k
/// predictions include a Functional artifact. Throws for k < 1.
double top_k_success(std::span<const RankingCase> cases, std::size_t k);

/// Share of labeled cases whose best ground-truth artifact is in the top-k.
double precision_at_k(std::span<const RankingCase> cases, std::size_t k);

/// Share of labeled cases whose top-k predictions meet the top-j ground truth.
double recall_k_for_top_j(std::span<const RankingCase> cases, std::size_t k, std::size_t j);

/// Expected top-k success of picking k artifacts uniformly at random, over
/// the cases top_k_success counts.
double random_select_success(std::span<const RankingCase> cases, std::size_t k);

struct AgreementStats {
    std::size_t n = 0;
    double mean_diff = 0.0;
    double sd_diff = 0.0;
    std::pair<double, double> limits{0.0, 0.0};
    std::size_t n_outside = 0;
    double pct_outside = 0.0;
    std::optional<double> pearson;
    std::optional<double> spearman;
    double mae = 0.0;
    double rmse = 0.0;
};

/// diffs = b - a; sample standard deviation; limits mean +/- 1.96 sd.
AgreementStats bland_altman(std::span<const double> a, std::span<const double> b);

/// Bland-Altman fields plus correlations and error magnitudes.
AgreementStats score_agreement(std::span<const double> a, std::span<const double> b);

/// Absent when either input is constant.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// 1-based ranks, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// `cve_id,score` rows; an optional header row whose second column is not
/// numeric is skipped.
std::map<std::string, double> load_baseline_csv(const std::filesystem::path& path);

struct PlotPoint {
    std::string id;
    double mean = 0.0;
    double diff = 0.0;
};

struct BlandAltmanPlot {
    std::vector<PlotPoint> points;
    double mean_diff = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

BlandAltmanPlot bland_altman_plot(std::span<const std::string> ids, std::span<const double> a,
                                  std::span<const double> b);

} // namespace aeas
