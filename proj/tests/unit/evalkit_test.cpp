#include "aeas/evalkit.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace aeas {
namespace {

using test::make_label;

RankingCase make_case(const std::string& cve, std::vector<std::string> order,
                      std::initializer_list<GroundTruthLabel> labels) {
    RankingCase c;
    c.cve_id = cve;
    c.predicted_order = std::move(order);
    for (const auto& l : labels) {
        c.labels[l.artifact_id] = l;
    }
    return c;
}

TEST(LabelBetter, Ordering) {
    const auto func_fast = make_label("CVE-2024-0001", "a", ObservedMaturity::Functional, 5.0, 2);
    const auto func_slow = make_label("CVE-2024-0001", "b", ObservedMaturity::Functional, 9.0, 0);
    const auto func_untimed = make_label("CVE-2024-0001", "c", ObservedMaturity::Functional);
    const auto poc = make_label("CVE-2024-0001", "d", ObservedMaturity::PoC, 1.0, 0);
    EXPECT_TRUE(label_better(func_fast, func_slow));
    EXPECT_TRUE(label_better(func_slow, func_untimed));
    EXPECT_TRUE(label_better(func_untimed, poc));
    EXPECT_FALSE(label_better(poc, poc));
    const auto same_time_fewer = make_label("CVE-2024-0001", "z", ObservedMaturity::Functional, 5.0, 1);
    EXPECT_TRUE(label_better(same_time_fewer, func_fast));
    const auto tie_a = make_label("CVE-2024-0001", "a", ObservedMaturity::DocOnly);
    const auto tie_b = make_label("CVE-2024-0001", "b", ObservedMaturity::DocOnly);
    EXPECT_TRUE(label_better(tie_a, tie_b));
    EXPECT_TRUE(label_better(make_label("x", "q", ObservedMaturity::DocOnly),
                             make_label("x", "p", ObservedMaturity::NonFunctional)));
}

TEST(GroundTruthOrder, BestFirst) {
    const auto c = make_case("CVE-2024-0001", {"a", "b", "c"},
                             {make_label("CVE-2024-0001", "a", ObservedMaturity::PoC),
                              make_label("CVE-2024-0001", "b", ObservedMaturity::Functional, 30.0),
                              make_label("CVE-2024-0001", "c", ObservedMaturity::Functional, 10.0)});
    EXPECT_EQ(ground_truth_order(c), (std::vector<std::string>{"c", "b", "a"}));
}

TEST(ValidateCase, RejectsNonPermutations) {
    auto c = make_case("CVE-2024-0001", {"a", "b"},
                       {make_label("CVE-2024-0001", "a", ObservedMaturity::PoC),
                        make_label("CVE-2024-0001", "b", ObservedMaturity::PoC)});
    EXPECT_NO_THROW(validate_case(c));
    c.predicted_order = {"a", "a"};
    EXPECT_THROW(validate_case(c), EvalError);
    c.predicted_order = {"a"};
    EXPECT_THROW(validate_case(c), EvalError);
    c.predicted_order = {"a", "b", "x"};
    EXPECT_THROW(validate_case(c), EvalError);
}

std::vector<RankingCase> two_cases() {
    return {make_case("CVE-2024-0001", {"p", "f", "d"},
                      {make_label("CVE-2024-0001", "f", ObservedMaturity::Functional, 10.0),
                       make_label("CVE-2024-0001", "p", ObservedMaturity::PoC),
                       make_label("CVE-2024-0001", "d", ObservedMaturity::DocOnly)}),
            make_case("CVE-2024-0002", {"x", "y"},
                      {make_label("CVE-2024-0002", "x", ObservedMaturity::NonFunctional),
                       make_label("CVE-2024-0002", "y", ObservedMaturity::PoC)})};
}

TEST(RankingMetrics, HandCase) {
    const auto cases = two_cases();
    // Only the first case has a functional artifact; it sits at rank 2.
    EXPECT_EQ(top_k_success(cases, 1), 0.0);
    EXPECT_EQ(top_k_success(cases, 2), 1.0);
    // Best artifacts: f (rank 2) and y (rank 2).
    EXPECT_EQ(precision_at_k(cases, 1), 0.0);
    EXPECT_EQ(precision_at_k(cases, 2), 1.0);
    // Top-2 truth: {f, p} and {y, x}; both are hit at k = 1.
    EXPECT_EQ(recall_k_for_top_j(cases, 1, 2), 1.0);
    // Random picks: one functional among three.
    EXPECT_NEAR(random_select_success(cases, 1), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(random_select_success(cases, 2), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(random_select_success(cases, 3), 1.0, 1e-15);
    EXPECT_NEAR(random_select_success(cases, 10), 1.0, 1e-15);
}

TEST(RankingMetrics, EmptyAndInvalid) {
    EXPECT_EQ(top_k_success({}, 1), 0.0);
    EXPECT_EQ(precision_at_k({}, 3), 0.0);
    EXPECT_EQ(random_select_success({}, 3), 0.0);
    const auto cases = two_cases();
    EXPECT_THROW(top_k_success(cases, 0), EvalError);
    EXPECT_THROW(recall_k_for_top_j(cases, 1, 0), EvalError);
}

TEST(RankingMetrics, MonotoneInK) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<RankingCase> cases;
        for (int c = 0; c < 4; ++c) {
            RankingCase rc;
            rc.cve_id = "CVE-2024-000" + std::to_string(c);
            const int n = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i) {
                const std::string id = "a" + std::to_string(i);
                rc.labels[id] = make_label(rc.cve_id, id, static_cast<ObservedMaturity>(rng() % 4),
                                           static_cast<double>(rng() % 50));
                rc.predicted_order.push_back(id);
            }
            std::shuffle(rc.predicted_order.begin(), rc.predicted_order.end(), rng);
            cases.push_back(rc);
        }
        for (std::size_t k = 1; k < 7; ++k) {
            EXPECT_LE(top_k_success(cases, k), top_k_success(cases, k + 1));
            EXPECT_LE(precision_at_k(cases, k), precision_at_k(cases, k + 1));
            EXPECT_LE(random_select_success(cases, k), random_select_success(cases, k + 1) + 1e-12);
            EXPECT_LE(recall_k_for_top_j(cases, k, 1), recall_k_for_top_j(cases, k, 2));
        }
    }
}

TEST(Agreement, BlandAltmanHandExample) {
    const std::vector<double> a{0, 0, 0, 0};
    const std::vector<double> b{0.1, 0.1, 0.1, 0.5};
    const auto s = bland_altman(a, b);
    EXPECT_EQ(s.n, 4u);
    EXPECT_NEAR(s.mean_diff, 0.2, 1e-12);
    EXPECT_NEAR(s.sd_diff, 0.2, 1e-12);
    EXPECT_NEAR(s.limits.first, -0.192, 1e-12);
    EXPECT_NEAR(s.limits.second, 0.592, 1e-12);
    EXPECT_EQ(s.n_outside, 0u);
}

TEST(Agreement, OutsideCount) {
    std::vector<double> a(20, 0.0);
    std::vector<double> b(20, 0.0);
    b[0] = 10.0;
    const auto s = bland_altman(a, b);
    EXPECT_EQ(s.n_outside, 1u);
    EXPECT_DOUBLE_EQ(s.pct_outside, 5.0);
}

TEST(Agreement, Correlations) {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{2, 4, 6, 8, 10};
    EXPECT_NEAR(*pearson(a, b), 1.0, 1e-12);
    const std::vector<double> c{1, 4, 9, 16, 100};
    EXPECT_NEAR(*spearman(a, c), 1.0, 1e-12);
    EXPECT_LT(*pearson(a, c), 1.0);
    const std::vector<double> flat{3, 3, 3, 3, 3};
    EXPECT_FALSE(pearson(a, flat).has_value());
    EXPECT_FALSE(spearman(flat, a).has_value());
    const auto s = score_agreement(a, flat);
    EXPECT_FALSE(s.pearson.has_value());
    EXPECT_FALSE(s.spearman.has_value());
    EXPECT_NEAR(s.mae, (2 + 1 + 0 + 1 + 2) / 5.0, 1e-12);
    EXPECT_NEAR(s.rmse, std::sqrt((4 + 1 + 0 + 1 + 4) / 5.0), 1e-12);
}

TEST(Agreement, InputErrors) {
    const std::vector<double> one{1.0};
    const std::vector<double> two{1.0, 2.0};
    const std::vector<double> nan{1.0, std::nan("")};
    EXPECT_THROW(bland_altman(one, one), EvalError);
    EXPECT_THROW(bland_altman(one, two), EvalError);
    EXPECT_THROW(pearson(two, nan), EvalError);
}

TEST(AverageRanks, Ties) {
    const std::vector<double> v{10, 20, 10, 30, 20, 20};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 4, 1.5, 6, 4, 4}));
    EXPECT_TRUE(average_ranks(std::vector<double>{}).empty());
}

TEST(BaselineCsv, HeaderAndRows) {
    test::TempDir dir("csv");
    write_file(dir / "b.csv", "cve_id,score\nCVE-2024-0001,0.5\n\"CVE-2024-0002\", 0.25\n\n");
    const auto m = load_baseline_csv(dir / "b.csv");
    EXPECT_EQ(m.size(), 2u);
    EXPECT_EQ(m.at("CVE-2024-0001"), 0.5);
    EXPECT_EQ(m.at("CVE-2024-0002"), 0.25);

    write_file(dir / "nohdr.csv", "CVE-2024-0001,1\n");
    EXPECT_EQ(load_baseline_csv(dir / "nohdr.csv").size(), 1u);

    write_file(dir / "bad.csv", "CVE-2024-0001,1\nCVE-2024-0002,high\n");
    EXPECT_THROW(load_baseline_csv(dir / "bad.csv"), CorpusError);
    write_file(dir / "dup.csv", "CVE-2024-0001,1\nCVE-2024-0001,2\n");
    EXPECT_THROW(load_baseline_csv(dir / "dup.csv"), CorpusError);
    write_file(dir / "id.csv", "CVE-24-1,1\n");
    EXPECT_THROW(load_baseline_csv(dir / "id.csv"), CorpusError);
    EXPECT_THROW(load_baseline_csv(dir / "missing.csv"), CorpusError);
}

TEST(BaselineCsv, FixtureFile) {
    const auto m = load_baseline_csv(test::fixtures_dir() / "baselines" / "vendor_priority.csv");
    EXPECT_EQ(m.size(), 6u);
}

TEST(PlotData, PointsMatchStats) {
    const std::vector<std::string> ids{"x", "y", "z"};
    const std::vector<double> a{0.1, 0.5, 0.9};
    const std::vector<double> b{0.2, 0.4, 0.9};
    const auto plot = bland_altman_plot(ids, a, b);
    ASSERT_EQ(plot.points.size(), 3u);
    EXPECT_EQ(plot.points[1].id, "y");
    EXPECT_NEAR(plot.points[1].mean, 0.45, 1e-12);
    EXPECT_NEAR(plot.points[1].diff, -0.1, 1e-12);
    const auto s = bland_altman(a, b);
    EXPECT_DOUBLE_EQ(plot.mean_diff, s.mean_diff);
    EXPECT_DOUBLE_EQ(plot.lo, s.limits.first);
    EXPECT_DOUBLE_EQ(plot.hi, s.limits.second);
}

} // namespace
} // namespace aeas
