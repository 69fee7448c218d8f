#pragma once

#include "aeas/analyzer.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aeas {

struct Weights {
    // InfoDependency, AttackCondition, ProbabilityDep, UserInteraction,
    // PrivilegeRequired, Evasion.
    std::array<double, 6> complexity_w{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    // n_exploits, stars, forks.
    std::array<double, 3> popularity_w{0.5, 0.003, 0.006};
    // AV, AC, I, EM, P.
    std::array<double, 5> feature_alpha{0.15, 0.20, 0.25, 0.30, 0.10};
    double complexity_threshold = 0.5;
    double popularity_threshold = 5.0;

    /// Non-negative entries; complexity_w and feature_alpha sum to 1 within
    /// 1e-9. Throws ConfigError.
    void validate() const;
};

struct PopularityInputs {
    std::uint64_t n_exploits = 0;
    std::uint64_t stars = 0;
    std::uint64_t forks = 0;
};

enum class AttackVector { Remote, NotRemote };
enum class ComplexityLevel { Low, High };
enum class Impact { CodeExec, PrivEsc, InfoLeak, Bypass, None };
enum class Maturity { None, PoC, Exploit };
enum class PopularityLevel { Low, High };

std::string_view to_string(AttackVector v);
std::string_view to_string(ComplexityLevel v);
std::string_view to_string(Impact v);
std::string_view to_string(Maturity v);
std::string_view to_string(PopularityLevel v);

struct AggregatedFeatures {
    AttackVector attack_vector = AttackVector::NotRemote;
    ComplexityLevel complexity_level = ComplexityLevel::High;
    double complexity_score = 0.0;
    Impact primary_impact = Impact::None;
    bool dos = false;
    Maturity maturity = Maturity::None;
    PopularityLevel popularity_level = PopularityLevel::Low;
    double popularity_score = 0.0;

    bool operator==(const AggregatedFeatures&) const = default;
};

/// Attacker-favourability of one complexity sub-feature: a present
/// prerequisite gives 0, an absent one 1; privilege none/user/admin gives
/// 1/0.5/0.
double favorability(const FeatureVector& fv, SubFeature f);
std::array<double, 6> complexity_inputs(const FeatureVector& fv);

/// Sum of complexity_w[i] * f_i.
double complexity_score(const FeatureVector& fv, const Weights& w);

double popularity_score(const PopularityInputs& pop, const Weights& w);

Maturity maturity_level(bool relevance, bool availability, bool flexibility, bool functionality);
Impact primary_impact(bool code_exec, bool priv_escalation, bool info_leak, bool bypass);

/// Level decisions use the thresholds with a rounding allowance
/// proportional to the weight sum, so scaling weights and threshold
/// together keeps the label.
AggregatedFeatures aggregate(const FeatureVector& fv, const PopularityInputs& pop, const Weights& w);

struct FeatureEncoding {
    double av = 0.0;
    double ac = 0.0;
    double impact = 0.0;
    double maturity = 0.0;
    double popularity = 0.0;
};

FeatureEncoding encode(const AggregatedFeatures& agg);

/// clamp(sum of alpha_i * encoding_i, 0, 1).
double actionability(const FeatureEncoding& enc, const Weights& w);
double actionability(const AggregatedFeatures& agg, const Weights& w);

/// Maximum of the exploit scores; 0.0 for a vulnerability with none.
double vulnerability_severity(std::span<const double> scores);

struct Justification {
    std::string feature; // "Attack Vector", "Attack Complexity", ...
    std::string value;   // rendered level
    std::vector<std::string> lines;
};

struct ExploitScore {
    AggregatedFeatures features;
    double actionability = 0.0;
    std::vector<Justification> justifications;
};

ExploitScore score_exploit(const FeatureVector& fv, const PopularityInputs& pop, const Weights& w);

} // namespace aeas
