#include "aeas/scoring.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <vector>

namespace aeas {
namespace {

FeatureVector all_false() {
    FeatureVector fv;
    fv.defaulted.fill(false);
    for (SubFeature f : kAllSubFeatures) {
        fv[f] = {f, {}, false, 3};
    }
    fv[SubFeature::PrivilegeRequired].conclusion = Privilege::None;
    return fv;
}

TEST(Complexity, WorkedExample) {
    // favorability (1, 0, 1, 0, 0.5, 1) under uniform weights.
    FeatureVector fv = all_false();
    fv[SubFeature::AttackCondition].conclusion = true;
    fv[SubFeature::UserInteraction].conclusion = true;
    fv[SubFeature::PrivilegeRequired].conclusion = Privilege::User;
    const auto f = complexity_inputs(fv);
    EXPECT_EQ(f, (std::array<double, 6>{1, 0, 1, 0, 0.5, 1}));
    EXPECT_NEAR(complexity_score(fv, Weights{}), 3.5 / 6.0, 1e-12);
    EXPECT_EQ(aggregate(fv, {}, Weights{}).complexity_level, ComplexityLevel::Low);
}

TEST(Complexity, PrivilegeFavorability) {
    FeatureVector fv = all_false();
    fv[SubFeature::PrivilegeRequired].conclusion = Privilege::None;
    EXPECT_EQ(favorability(fv, SubFeature::PrivilegeRequired), 1.0);
    fv[SubFeature::PrivilegeRequired].conclusion = Privilege::User;
    EXPECT_EQ(favorability(fv, SubFeature::PrivilegeRequired), 0.5);
    fv[SubFeature::PrivilegeRequired].conclusion = Privilege::Admin;
    EXPECT_EQ(favorability(fv, SubFeature::PrivilegeRequired), 0.0);
}

TEST(Complexity, ThresholdIsStrict) {
    // Exactly 0.5 is not above the threshold.
    FeatureVector fv = all_false();
    fv[SubFeature::InfoDependency].conclusion = true;
    fv[SubFeature::AttackCondition].conclusion = true;
    fv[SubFeature::ProbabilityDep].conclusion = true;
    EXPECT_NEAR(complexity_score(fv, Weights{}), 0.5, 1e-15);
    EXPECT_EQ(aggregate(fv, {}, Weights{}).complexity_level, ComplexityLevel::High);
}

TEST(Complexity, DefaultsGiveHighComplexity) {
    const FeatureVector fv; // all conservative defaults
    EXPECT_EQ(complexity_score(fv, Weights{}), 0.0);
    const auto agg = aggregate(fv, {}, Weights{});
    EXPECT_EQ(agg.attack_vector, AttackVector::NotRemote);
    EXPECT_EQ(agg.complexity_level, ComplexityLevel::High);
    EXPECT_EQ(agg.primary_impact, Impact::None);
    EXPECT_EQ(agg.maturity, Maturity::None);
}

TEST(Popularity, WeightedCounts) {
    const Weights w;
    EXPECT_NEAR(popularity_score({4, 100, 50}, w), 0.5 * 4 + 0.003 * 100 + 0.006 * 50, 1e-12);
    FeatureVector fv = all_false();
    EXPECT_EQ(aggregate(fv, {4, 100, 50}, w).popularity_level, PopularityLevel::Low);    // 2.6
    EXPECT_EQ(aggregate(fv, {4, 1000, 100}, w).popularity_level, PopularityLevel::High); // 5.6
    EXPECT_EQ(aggregate(fv, {10, 0, 0}, w).popularity_level, PopularityLevel::Low);      // exactly 5
}

TEST(Maturity, Table) {
    EXPECT_EQ(maturity_level(false, true, true, true), Maturity::None);
    EXPECT_EQ(maturity_level(true, false, false, false), Maturity::PoC);
    EXPECT_EQ(maturity_level(true, true, false, false), Maturity::PoC);
    EXPECT_EQ(maturity_level(true, false, false, true), Maturity::PoC);
    EXPECT_EQ(maturity_level(true, true, false, true), Maturity::Exploit);
    EXPECT_EQ(maturity_level(true, false, true, true), Maturity::Exploit);
}

TEST(Impact, Hierarchy) {
    EXPECT_EQ(primary_impact(true, true, true, true), Impact::CodeExec);
    EXPECT_EQ(primary_impact(false, true, true, true), Impact::PrivEsc);
    EXPECT_EQ(primary_impact(false, false, true, true), Impact::InfoLeak);
    EXPECT_EQ(primary_impact(false, false, false, true), Impact::Bypass);
    EXPECT_EQ(primary_impact(false, false, false, false), Impact::None);
}

TEST(Encoding, DosRaisesOnlyWeakImpact) {
    AggregatedFeatures agg;
    agg.dos = true;
    EXPECT_DOUBLE_EQ(encode(agg).impact, 0.3);
    agg.primary_impact = Impact::Bypass;
    EXPECT_DOUBLE_EQ(encode(agg).impact, 0.4);
    agg.primary_impact = Impact::CodeExec;
    EXPECT_DOUBLE_EQ(encode(agg).impact, 1.0);
}

TEST(Actionability, WorkedExample) {
    AggregatedFeatures agg;
    agg.attack_vector = AttackVector::Remote;
    agg.complexity_level = ComplexityLevel::Low;
    agg.primary_impact = Impact::CodeExec;
    agg.maturity = Maturity::Exploit;
    agg.popularity_level = PopularityLevel::Low;
    const FeatureEncoding e = encode(agg);
    EXPECT_EQ(e.av, 1.0);
    EXPECT_EQ(e.ac, 1.0);
    EXPECT_EQ(e.impact, 1.0);
    EXPECT_EQ(e.maturity, 1.0);
    EXPECT_EQ(e.popularity, 0.5);
    EXPECT_NEAR(actionability(agg, Weights{}), 0.95, 1e-12);
}

TEST(Actionability, Floor) {
    // Worst case: NotRemote, High, None, None, Low.
    EXPECT_NEAR(actionability(AggregatedFeatures{}, Weights{}), 0.15 * 0.2 + 0.2 * 0.3 + 0.1 * 0.5, 1e-12);
}

TEST(Severity, MaxOfExploits) {
    EXPECT_EQ(vulnerability_severity(std::vector<double>{}), 0.0);
    EXPECT_EQ(vulnerability_severity(std::vector<double>{0.2, 0.95, 0.4}), 0.95);
    EXPECT_EQ(vulnerability_severity(std::vector<double>{0.0}), 0.0);
}

TEST(Weights, Validation) {
    EXPECT_NO_THROW(Weights{}.validate());
    Weights w;
    w.feature_alpha = {0.2, 0.2, 0.2, 0.2, 0.1};
    EXPECT_THROW(w.validate(), ConfigError);
    w = Weights{};
    w.complexity_w[0] = -0.1;
    w.complexity_w[1] += 0.1;
    EXPECT_THROW(w.validate(), ConfigError);
    w = Weights{};
    w.popularity_w = {1, 2, 3}; // popularity weights need not sum to one
    EXPECT_NO_THROW(w.validate());
    w.popularity_w[2] = -1;
    EXPECT_THROW(w.validate(), ConfigError);
}

TEST(Justification, CitesEvidenceVerbatim) {
    FeatureVector fv = all_false();
    fv[SubFeature::IsRemote] = {SubFeature::IsRemote, {{"exploit.py", 47, "requests.post to the target URL"}}, true, 5};
    fv[SubFeature::CodeExec] = {SubFeature::CodeExec, {{"exploit.py", 32, "payload spawns a shell"}}, true, 4};
    const ExploitScore s = score_exploit(fv, {1, 10, 2}, Weights{});
    ASSERT_EQ(s.justifications.size(), 5u);
    EXPECT_EQ(s.justifications[0].feature, "Attack Vector");
    EXPECT_EQ(s.justifications[0].value, "Remote");
    EXPECT_EQ(s.justifications[0].lines, std::vector<std::string>{"exploit.py:47 - requests.post to the target URL"});
    EXPECT_EQ(s.justifications[2].feature, "Impact");
    EXPECT_EQ(s.justifications[2].lines, std::vector<std::string>{"exploit.py:32 - payload spawns a shell"});
    EXPECT_EQ(s.justifications[4].feature, "Popularity");
    EXPECT_EQ(s.justifications[4].lines.front(), "1 exploit repositories, 10 stars, 2 forks");
}

TEST(Justification, NoEvidenceText) {
    const ExploitScore s = score_exploit(FeatureVector{}, {}, Weights{});
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(s.justifications[i].lines,
                  std::vector<std::string>{"no supporting evidence; conservative default"});
    }
}

TEST(Justification, DuplicateCitationsCollapse) {
    FeatureVector fv = all_false();
    for (SubFeature f : {SubFeature::Relevance, SubFeature::Availability}) {
        fv[f] = {f, {{"poc.py", 3, "target check"}}, true, 4};
    }
    const ExploitScore s = score_exploit(fv, {}, Weights{});
    EXPECT_EQ(s.justifications[3].feature, "Exploit Maturity");
    EXPECT_EQ(s.justifications[3].lines.size(), 1u);
}

TEST(ScoreExploit, RangeOverRandomVectors) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> count(0, 5000);
    for (int i = 0; i < 2000; ++i) {
        const FeatureVector fv = test::random_feature_vector(rng);
        const ExploitScore s = score_exploit(fv, {count(rng) % 20, count(rng), count(rng)}, Weights{});
        EXPECT_GE(s.actionability, 0.0);
        EXPECT_LE(s.actionability, 1.0);
        EXPECT_GE(s.features.complexity_score, 0.0);
        EXPECT_LE(s.features.complexity_score, 1.0 + 1e-12);
    }
}

} // namespace
} // namespace aeas
