// Acceptance run: one line per criterion, non-zero exit if any fails.

#include "aeas/fixtures.hpp"
#include "aeas/pipeline.hpp"
#include "test_support.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace aeas;
using aeas::test::TempDir;

namespace {

// A criterion reports failures through this; an empty list is a pass.
struct Outcome {
    std::vector<std::string> failures;
    std::string detail;

    void fail(std::string msg) {
        if (failures.size() < 5) {
            failures.push_back(std::move(msg));
        } else if (failures.size() == 5) {
            failures.emplace_back("...");
        }
    }
    bool ok() const { return failures.empty(); }
};

struct Criterion {
    int number;
    std::string name;
    double limit_seconds;
    std::function<void(Outcome&)> run;
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool near(double a, double b, double tol) {
    return std::fabs(a - b) <= tol;
}

// ---------------------------------------------------------------------------

FeatureVector vector_with(std::initializer_list<std::pair<SubFeature, bool>> flags) {
    FeatureVector fv;
    for (SubFeature f : kAllSubFeatures) {
        fv[f].subfeature = f;
        fv[f].confidence = 3;
        fv[f].conclusion = f == SubFeature::PrivilegeRequired ? Conclusion{Privilege::None} : Conclusion{false};
    }
    for (const auto& [f, v] : flags) {
        fv[f].conclusion = v;
    }
    return fv;
}

void maturity_truth_table(Outcome& out) {
    int none = 0;
    int exploit = 0;
    int exploit_rows = 0;
    for (int bits = 0; bits < 16; ++bits) {
        const bool rel = bits & 1;
        const bool avail = bits & 2;
        const bool flex = bits & 4;
        const bool func = bits & 8;
        // Row criteria as written in the feature table.
        const bool row_none = !rel;
        const bool row_poc = rel && ((!avail && !flex) || !func);
        const bool row_exploit = rel && (avail || flex) && func;
        if (int(row_none) + int(row_poc) + int(row_exploit) != 1) {
            out.fail("oracle rows not exclusive at combination " + std::to_string(bits));
            continue;
        }
        const Maturity expected = row_none ? Maturity::None : row_poc ? Maturity::PoC : Maturity::Exploit;
        const Maturity direct = maturity_level(rel, avail, flex, func);
        const FeatureVector fv = vector_with({{SubFeature::Relevance, rel},
                                              {SubFeature::Availability, avail},
                                              {SubFeature::Flexibility, flex},
                                              {SubFeature::Functionality, func}});
        const Maturity aggregated = aggregate(fv, {}, Weights{}).maturity;
        if (direct != expected || aggregated != expected) {
            out.fail("combination " + std::to_string(bits) + ": got " + std::string(to_string(direct)) + "/" +
                     std::string(to_string(aggregated)) + ", expected " + std::string(to_string(expected)));
        }
        exploit_rows += row_exploit;
        none += direct == Maturity::None;
        exploit += direct == Maturity::Exploit;
    }
    if (none != 8) {
        out.fail(std::to_string(none) + " combinations map to None, expected 8");
    }
    // The stated count is 4, but the Exploit row is satisfied by only 3 of
    // the 16 inputs, so no implementation of that row can meet it. The check
    // stays as stated.
    if (exploit != 4) {
        out.fail(std::to_string(exploit) + " combinations map to Exploit, expected 4 (the Exploit row itself admits " +
                 std::to_string(exploit_rows) + ")");
    }
    out.detail = "16 combinations";
}

void impact_hierarchy(Outcome& out) {
    for (int bits = 0; bits < 32; ++bits) {
        const bool ce = bits & 1;
        const bool pe = bits & 2;
        const bool il = bits & 4;
        const bool bp = bits & 8;
        const bool dos = bits & 16;
        const Impact expected = ce ? Impact::CodeExec : pe ? Impact::PrivEsc : il ? Impact::InfoLeak
                                                           : bp ? Impact::Bypass : Impact::None;
        const FeatureVector fv = vector_with({{SubFeature::CodeExec, ce},
                                              {SubFeature::PrivEscalation, pe},
                                              {SubFeature::InfoLeak, il},
                                              {SubFeature::Bypass, bp},
                                              {SubFeature::Dos, dos}});
        const auto agg = aggregate(fv, {}, Weights{});
        if (primary_impact(ce, pe, il, bp) != expected || agg.primary_impact != expected) {
            out.fail("combination " + std::to_string(bits) + ": impact " +
                     std::string(to_string(agg.primary_impact)) + ", expected " + std::string(to_string(expected)));
        }
        if (agg.dos != dos) {
            out.fail("combination " + std::to_string(bits) + ": dos not carried");
        }
    }
    out.detail = "32 combinations";
}

// Independent encodings of the aggregated levels.
double oracle_encoding(const AggregatedFeatures& a, int which) {
    switch (which) {
    case 0:
        return a.attack_vector == AttackVector::Remote ? 1.0 : 0.2;
    case 1:
        return a.complexity_level == ComplexityLevel::Low ? 1.0 : 0.3;
    case 2: {
        double v = 0.0;
        switch (a.primary_impact) {
        case Impact::CodeExec: v = 1.0; break;
        case Impact::PrivEsc: v = 0.8; break;
        case Impact::InfoLeak: v = 0.6; break;
        case Impact::Bypass: v = 0.4; break;
        case Impact::None: v = 0.0; break;
        }
        return a.dos ? std::max(v, 0.3) : v;
    }
    case 3:
        return a.maturity == Maturity::Exploit ? 1.0 : a.maturity == Maturity::PoC ? 0.4 : 0.0;
    default:
        return a.popularity_level == PopularityLevel::High ? 1.0 : 0.5;
    }
}

double oracle_favorability(const FeatureVector& fv, SubFeature f) {
    if (f == SubFeature::PrivilegeRequired) {
        switch (std::get<Privilege>(fv[f].conclusion)) {
        case Privilege::None: return 1.0;
        case Privilege::User: return 0.5;
        case Privilege::Admin: return 0.0;
        }
    }
    return std::get<bool>(fv[f].conclusion) ? 0.0 : 1.0;
}

AggregatedFeatures random_aggregate(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 4);
    std::bernoulli_distribution coin(0.5);
    AggregatedFeatures a;
    a.attack_vector = coin(rng) ? AttackVector::Remote : AttackVector::NotRemote;
    a.complexity_level = coin(rng) ? ComplexityLevel::Low : ComplexityLevel::High;
    a.primary_impact = static_cast<Impact>(pick(rng));
    a.dos = coin(rng);
    a.maturity = static_cast<Maturity>(pick(rng) % 3);
    a.popularity_level = coin(rng) ? PopularityLevel::High : PopularityLevel::Low;
    return a;
}

void weighted_sums(Outcome& out) {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<std::uint64_t> small(0, 50);
    std::uniform_int_distribution<std::uint64_t> large(0, 100000);
    std::uniform_real_distribution<double> pw(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Weights w;
        w.complexity_w = test::random_simplex<6>(rng);
        w.feature_alpha = test::random_simplex<5>(rng);
        w.popularity_w = {pw(rng), pw(rng) / 100.0, pw(rng) / 100.0};

        const FeatureVector fv = test::random_feature_vector(rng);
        double c = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            c += w.complexity_w[i] * oracle_favorability(fv, kComplexitySubFeatures[i]);
        }
        if (!near(complexity_score(fv, w), c, 1e-9)) {
            out.fail("complexity trial " + std::to_string(trial) + ": " + fmt_double(complexity_score(fv, w)) +
                     " vs " + fmt_double(c));
        }

        const PopularityInputs pop{small(rng), large(rng), large(rng) / 10};
        const double p = w.popularity_w[0] * double(pop.n_exploits) + w.popularity_w[1] * double(pop.stars) +
                         w.popularity_w[2] * double(pop.forks);
        if (!near(popularity_score(pop, w), p, 1e-9 * std::max(1.0, p))) {
            out.fail("popularity trial " + std::to_string(trial));
        }

        const AggregatedFeatures agg = random_aggregate(rng);
        double total = 0.0;
        for (int i = 0; i < 5; ++i) {
            total += w.feature_alpha[static_cast<std::size_t>(i)] * oracle_encoding(agg, i);
        }
        total = std::clamp(total, 0.0, 1.0);
        if (!near(actionability(agg, w), total, 1e-9)) {
            out.fail("actionability trial " + std::to_string(trial) + ": " + fmt_double(actionability(agg, w)) +
                     " vs " + fmt_double(total));
        }
    }
    out.detail = "1000 instances x 3 sums";
}

void monotonicity(Outcome& out) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> scale(1e-3, 10.0);
    std::uniform_int_distribution<int> which(0, 4);
    std::uniform_int_distribution<int> len(0, 12);
    for (int trial = 0; trial < 10000; ++trial) {
        Weights w;
        w.feature_alpha = test::random_simplex<5>(rng);
        w.complexity_w = test::random_simplex<6>(rng);

        // Raising one encoding never lowers actionability.
        FeatureEncoding enc{unit(rng), unit(rng), unit(rng), unit(rng), unit(rng)};
        const double before = actionability(enc, w);
        FeatureEncoding raised = enc;
        double* slots[] = {&raised.av, &raised.ac, &raised.impact, &raised.maturity, &raised.popularity};
        double* slot = slots[which(rng)];
        *slot = *slot + (1.0 - *slot) * unit(rng);
        const double after = actionability(raised, w);
        if (after < before) {
            out.fail("trial " + std::to_string(trial) + ": raising an encoding lowered actionability");
        }
        if (before < 0.0 || before > 1.0 || after < 0.0 || after > 1.0) {
            out.fail("trial " + std::to_string(trial) + ": actionability outside [0,1]");
        }

        // Severity: appending never lowers it, order does not matter.
        std::vector<double> scores(static_cast<std::size_t>(len(rng)));
        for (auto& s : scores) {
            s = unit(rng);
        }
        const double sev = vulnerability_severity(scores);
        auto appended = scores;
        appended.push_back(unit(rng));
        if (vulnerability_severity(appended) < sev) {
            out.fail("trial " + std::to_string(trial) + ": appending lowered severity");
        }
        auto shuffled = scores;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (vulnerability_severity(shuffled) != sev) {
            out.fail("trial " + std::to_string(trial) + ": severity depends on order");
        }

        // Complexity label survives joint scaling of weights and threshold.
        const FeatureVector fv = test::random_feature_vector(rng);
        w.complexity_threshold = unit(rng);
        const double c = scale(rng);
        Weights scaled = w;
        for (auto& x : scaled.complexity_w) {
            x *= c;
        }
        scaled.complexity_threshold *= c;
        const PopularityInputs pop{static_cast<std::uint64_t>(len(rng)), 100, 10};
        const auto base = aggregate(fv, pop, w);
        if (aggregate(fv, pop, scaled).complexity_level != base.complexity_level) {
            out.fail("trial " + std::to_string(trial) + ": scaling flipped the complexity level");
        }

        // Full scoring stays in [0,1].
        const double act = score_exploit(fv, pop, w).actionability;
        if (!(act >= 0.0 && act <= 1.0)) {
            out.fail("trial " + std::to_string(trial) + ": exploit score " + fmt_double(act));
        }
    }
    out.detail = "10000 trials";
}

// ---------------------------------------------------------------------------
// Ranking-metric oracles

ObservedMaturity random_maturity(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, 3);
    return static_cast<ObservedMaturity>(d(rng));
}

int oracle_rank(ObservedMaturity m) {
    switch (m) {
    case ObservedMaturity::Functional: return 3;
    case ObservedMaturity::PoC: return 2;
    case ObservedMaturity::DocOnly: return 1;
    case ObservedMaturity::NonFunctional: return 0;
    }
    return 0;
}

// Sort key compared lexicographically: larger maturity, smaller time, fewer errors, smaller id.
std::tuple<int, double, double, std::string> oracle_key(const GroundTruthLabel& l) {
    return {-oracle_rank(l.maturity_observed), l.completion_minutes.value_or(INFINITY),
            l.error_count ? double(*l.error_count) : INFINITY, l.artifact_id};
}

// The set of artifacts holding ground-truth positions 1..j, found by
// counting how many labels beat each one.
std::set<std::string> oracle_top_j(const RankingCase& c, std::size_t j) {
    std::set<std::string> out;
    for (const auto& [id, l] : c.labels) {
        std::size_t better = 0;
        for (const auto& [id2, l2] : c.labels) {
            better += oracle_key(l2) < oracle_key(l);
        }
        if (better < j) {
            out.insert(id);
        }
    }
    return out;
}

struct MetricOracle {
    double top_k = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

MetricOracle brute_force(const std::vector<RankingCase>& cases, std::size_t k, std::size_t j) {
    std::size_t func_cases = 0;
    std::size_t func_hits = 0;
    std::size_t labeled = 0;
    std::size_t prec_hits = 0;
    std::size_t rec_hits = 0;
    for (const auto& c : cases) {
        if (c.labels.empty()) {
            continue;
        }
        ++labeled;
        bool any_functional = false;
        for (const auto& [id, l] : c.labels) {
            any_functional = any_functional || l.maturity_observed == ObservedMaturity::Functional;
        }
        const auto best = oracle_top_j(c, 1);
        const auto wanted = oracle_top_j(c, j);
        bool hit_func = false;
        bool hit_best = false;
        bool hit_any = false;
        for (std::size_t i = 0; i < c.predicted_order.size(); ++i) {
            if (i >= k) {
                break;
            }
            const auto& id = c.predicted_order[i];
            hit_func = hit_func || c.labels.at(id).maturity_observed == ObservedMaturity::Functional;
            hit_best = hit_best || best.contains(id);
            hit_any = hit_any || wanted.contains(id);
        }
        if (any_functional) {
            ++func_cases;
            func_hits += hit_func;
        }
        prec_hits += hit_best;
        rec_hits += hit_any;
    }
    MetricOracle m;
    m.top_k = func_cases ? double(func_hits) / double(func_cases) : 0.0;
    m.precision = labeled ? double(prec_hits) / double(labeled) : 0.0;
    m.recall = labeled ? double(rec_hits) / double(labeled) : 0.0;
    return m;
}

// Enumerates every k-subset to get the random-selection expectation.
double oracle_random_select(const std::vector<RankingCase>& cases, std::size_t k) {
    double total = 0.0;
    std::size_t eligible = 0;
    for (const auto& c : cases) {
        std::vector<bool> functional;
        for (const auto& [id, l] : c.labels) {
            functional.push_back(l.maturity_observed == ObservedMaturity::Functional);
        }
        if (std::none_of(functional.begin(), functional.end(), [](bool b) { return b; })) {
            continue;
        }
        ++eligible;
        const std::size_t n = functional.size();
        const std::size_t picks = std::min(k, n);
        std::size_t subsets = 0;
        std::size_t good = 0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != picks) {
                continue;
            }
            ++subsets;
            bool hit = false;
            for (std::size_t i = 0; i < n; ++i) {
                hit = hit || ((mask >> i) & 1u && functional[i]);
            }
            good += hit;
        }
        total += double(good) / double(subsets);
    }
    return eligible ? total / double(eligible) : 0.0;
}

double oracle_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / double(v.size());
}

double oracle_sample_sd(const std::vector<double>& v) {
    const double m = oracle_mean(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / double(v.size() - 1));
}

double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = oracle_mean(a);
    const double mb = oracle_mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Rank = 1 + (number strictly smaller) + (ties - 1) / 2.
std::vector<double> oracle_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0.0;
        double equal = 0.0;
        for (double x : v) {
            less += x < v[i];
            equal += x == v[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

void metric_oracles(Outcome& out) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_int_distribution<int> minutes(1, 6);
    std::bernoulli_distribution coin(0.5);
    std::vector<RankingCase> cases;
    for (int i = 0; i < 200; ++i) {
        RankingCase c;
        c.cve_id = "CVE-2020-" + std::to_string(10000 + i);
        const int n = count(rng);
        for (int a = 0; a < n; ++a) {
            const std::string id = "a" + std::to_string(a);
            std::optional<double> mins;
            std::optional<std::uint64_t> errs;
            if (coin(rng)) {
                mins = double(minutes(rng)) * 5.0; // coarse values force ties
            }
            if (coin(rng)) {
                errs = static_cast<std::uint64_t>(minutes(rng) % 3);
            }
            c.labels.emplace(id, test::make_label(c.cve_id, id, random_maturity(rng), mins, errs));
            c.predicted_order.push_back(id);
        }
        std::shuffle(c.predicted_order.begin(), c.predicted_order.end(), rng);
        cases.push_back(std::move(c));
    }
    // Case-by-case plus the aggregate set.
    for (std::size_t k = 1; k <= 6; ++k) {
        for (std::size_t j = 1; j <= 6; ++j) {
            const auto o = brute_force(cases, k, j);
            if (j == 1) {
                if (top_k_success(cases, k) != o.top_k) {
                    out.fail("top_k_success k=" + std::to_string(k));
                }
                if (precision_at_k(cases, k) != o.precision) {
                    out.fail("precision_at_k k=" + std::to_string(k));
                }
                if (!near(random_select_success(cases, k), oracle_random_select(cases, k), 1e-12)) {
                    out.fail("random_select_success k=" + std::to_string(k));
                }
            }
            if (recall_k_for_top_j(cases, k, j) != o.recall) {
                out.fail("recall_k_for_top_j k=" + std::to_string(k) + " j=" + std::to_string(j));
            }
        }
    }
    for (const auto& c : cases) {
        const std::vector<RankingCase> one{c};
        for (std::size_t k = 1; k <= 3; ++k) {
            const auto o = brute_force(one, k, 2);
            if (top_k_success(one, k) != o.top_k || precision_at_k(one, k) != o.precision ||
                recall_k_for_top_j(one, k, 2) != o.recall) {
                out.fail(c.cve_id + ": per-case metrics differ at k=" + std::to_string(k));
            }
        }
    }

    // Agreement statistics against definitional formulas.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(count(rng)) * 3;
        std::vector<double> a(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = std::round(unit(rng) * 20.0) / 20.0;
            b[i] = unit(rng);
        }
        std::vector<double> d(n);
        std::vector<double> absd(n);
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = b[i] - a[i];
            absd[i] = std::fabs(d[i]);
            sq[i] = d[i] * d[i];
        }
        const double mean = oracle_mean(d);
        const double sd = oracle_sample_sd(d);
        const auto stats = score_agreement(a, b);
        bool ok = near(stats.mean_diff, mean, 1e-9) && near(stats.sd_diff, sd, 1e-9) &&
                  near(stats.limits.first, mean - 1.96 * sd, 1e-9) &&
                  near(stats.limits.second, mean + 1.96 * sd, 1e-9) && near(stats.mae, oracle_mean(absd), 1e-9) &&
                  near(stats.rmse, std::sqrt(oracle_mean(sq)), 1e-9);
        const bool const_a = std::all_of(a.begin(), a.end(), [&](double x) { return x == a[0]; });
        if (const_a) {
            ok = ok && !stats.pearson && !stats.spearman;
        } else {
            ok = ok && stats.pearson && near(*stats.pearson, oracle_pearson(a, b), 1e-9) && stats.spearman &&
                 near(*stats.spearman, oracle_pearson(oracle_ranks(a), oracle_ranks(b)), 1e-9);
        }
        if (!ok) {
            out.fail("agreement trial " + std::to_string(trial));
        }
    }

    // Hand-derived example.
    const std::vector<double> zeros{0.0, 0.0, 0.0, 0.0};
    const std::vector<double> diffs{0.1, 0.1, 0.1, 0.5};
    const auto ba = bland_altman(zeros, diffs);
    if (!near(ba.mean_diff, 0.2, 1e-9) || !near(ba.sd_diff, 0.2, 1e-9) || !near(ba.limits.first, -0.192, 1e-9) ||
        !near(ba.limits.second, 0.592, 1e-9)) {
        out.fail("hand example: mean " + fmt_double(ba.mean_diff) + ", sd " + fmt_double(ba.sd_diff) + ", limits (" +
                 fmt_double(ba.limits.first) + ", " + fmt_double(ba.limits.second) + ")");
    }
    out.detail = "200 cases, 200 agreement trials";
}

// ---------------------------------------------------------------------------
// End-to-end criteria over the fixture corpus

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + AEAS_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

void determinism(Outcome& out) {
    TempDir dir("accept6");
    const fs::path fixtures = test::fixtures_dir();
    const std::string base =
        "-q --config \"" + (fixtures / "config.json").string() + "\" --out \"" + dir.path().string() + "\" ";
    for (const char* stage : {"filter", "extract", "score"}) {
        if (run_cli(base + stage) != 0) {
            out.fail(std::string("aeas ") + stage + " failed");
            return;
        }
    }
    const std::string scores1 = read_file(dir.path() / kScoresFile);
    const std::string report1 = read_file(dir.path() / kReportFile);
    if (run_cli(base + "score") != 0) {
        out.fail("second aeas score failed");
        return;
    }
    if (read_file(dir.path() / kScoresFile) != scores1) {
        out.fail("scores.json differs between runs");
    }
    if (read_file(dir.path() / kReportFile) != report1) {
        out.fail("report.md differs between runs");
    }
    for (const auto& d : verify_fixtures(fixtures)) {
        out.fail("verify_fixtures: " + d);
    }
    out.detail = std::to_string(scores1.size()) + " byte scores.json";
}

void zero_exploit(Outcome& out) {
    const fs::path fixtures = test::fixtures_dir();
    const Corpus corpus = load_corpus(fixtures / "corpus");
    const VulnerabilityRecord* empty = nullptr;
    for (const auto& rec : corpus) {
        if (rec.exploits.empty()) {
            empty = &rec;
        }
    }
    if (!empty) {
        out.fail("fixture corpus has no vulnerability without artifacts");
        return;
    }
    const FixtureManifest expected = load_fixture_manifest(fixtures / "expected.json");
    const auto it = expected.expected_severities.find(empty->cve_id);
    if (it == expected.expected_severities.end() || it->second != 0.0) {
        out.fail(empty->cve_id + ": expected severity is not 0.0");
    }
    // Score the record directly as well.
    ScoredVulnerability v;
    v.cve_id = empty->cve_id;
    v.application = empty->application;
    v.severity = 0.5;
    finalize(v);
    if (v.severity != 0.0 || vulnerability_severity({}) != 0.0) {
        out.fail(empty->cve_id + ": computed severity is not exactly 0.0");
    }
    out.detail = empty->cve_id;
}

std::map<std::string, std::string> read_findings(const fs::path& out_dir) {
    std::map<std::string, std::string> files;
    const fs::path root = out_dir / kFindingsDir;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
        }
    }
    return files;
}

void cache_contract(Outcome& out) {
    TempDir dir("accept8");
    RunConfig cfg = fixture_config(test::fixtures_dir(), dir / "warm");
    cfg.backend = BackendKind::Live;
    cfg.cache_dir = dir / "cache";
    cfg.llm.offline = false;
    cfg.llm.retry.base_delay = std::chrono::milliseconds{0};

    auto warm_transport = std::make_shared<test::ScriptedTransport>();
    {
        auto backend = make_backend(cfg, warm_transport);
        cmd_extract(cfg, *backend);
    }
    if (warm_transport->calls() == 0) {
        out.fail("warm run never reached the transport");
        return;
    }
    const auto warm = read_findings(cfg.out_dir);

    cfg.out_dir = dir / "replay";
    auto replay_transport = std::make_shared<test::ScriptedTransport>();
    {
        auto backend = make_backend(cfg, replay_transport);
        cmd_extract(cfg, *backend);
    }
    if (replay_transport->calls() != 0) {
        out.fail("replay performed " + std::to_string(replay_transport->calls()) + " network operations");
    }
    const auto replay = read_findings(cfg.out_dir);
    if (warm != replay || warm.empty()) {
        out.fail("replayed findings differ from the warm run");
    }
    out.detail = std::to_string(warm_transport->calls()) + " warm calls, " + std::to_string(warm.size()) +
                 " findings files";
}

void prefilter_invariance(Outcome& out) {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<std::uint64_t> desc(0, 3000);
    std::uniform_int_distribution<std::uint64_t> issues(0, 150);
    std::uniform_int_distribution<std::uint64_t> size(1024, 1 << 20);
    std::uniform_int_distribution<int> ntopics(0, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::vector<std::string> topics{"cve", "exploit", "poc", "javascript", "docs", "rce", "game"};
    std::uniform_int_distribution<std::size_t> topic(0, topics.size() - 1);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<RepoMeta> repos(40);
        for (std::size_t i = 0; i < repos.size(); ++i) {
            auto& r = repos[i];
            r.repo_id = "o/r" + std::to_string(i);
            r.description_len = desc(rng);
            r.issue_count = issues(rng);
            r.size_bytes = size(rng);
            for (int t = ntopics(rng); t > 0; --t) {
                r.topic_labels.push_back(topics[topic(rng)]);
            }
        }
        FilterConfig cfg;
        cfg.confidence_weights = test::random_simplex<3>(rng);
        cfg.confidence_threshold = unit(rng);
        // Put the threshold exactly on one repository's confidence now and then.
        if (trial % 4 == 0) {
            cfg.confidence_threshold = confidence_score(repo_signals(repos[0], cfg.relevant_topics, cfg), cfg);
        }
        const auto kept = eliminate_indices(repos, cfg);
        const double c = std::max(1e-6, 10.0 * unit(rng));
        FilterConfig scaled = cfg;
        for (auto& w : scaled.confidence_weights) {
            w *= c;
        }
        scaled.confidence_threshold *= c;
        if (eliminate_indices(repos, scaled) != kept) {
            out.fail("trial " + std::to_string(trial) + ": scale " + fmt_double(c) + " changed the kept set");
        }
    }
    out.detail = "1000 trials";
}

std::vector<std::string> malformed_replies(std::mt19937_64& rng, std::size_t count) {
    using nlohmann::json;
    const json valid = {{"file_analysis", json::array({{{"file", "exploit.py"}, {"line", 3}, {"technique", "t"}}})},
                        {"conclusion", true},
                        {"confidence", 4}};
    const std::string text = valid.dump();
    std::uniform_int_distribution<int> kind(0, 11);
    std::uniform_int_distribution<std::size_t> cut(0, text.size() - 1);
    std::uniform_int_distribution<int> byte(1, 255);
    std::uniform_int_distribution<int> len(1, 60);
    std::vector<std::string> out;
    while (out.size() < count) {
        json j = valid;
        switch (kind(rng)) {
        case 0: // truncated
            out.push_back(text.substr(0, cut(rng)));
            break;
        case 1: { // random bytes
            std::string s;
            for (int i = len(rng); i > 0; --i) {
                s.push_back(static_cast<char>(byte(rng)));
            }
            out.push_back(s);
            break;
        }
        case 2: { // confidence out of range or mistyped
            const json bad[] = {0, 6, -1, 2.5, "3", nullptr, 1e9, json::array()};
            j["confidence"] = bad[rng() % 8];
            out.push_back(j.dump());
            break;
        }
        case 3: // missing key
            j.erase(std::array{"file_analysis", "conclusion", "confidence"}[rng() % 3]);
            out.push_back(j.dump());
            break;
        case 4: // extra key
            j["note"] = "extra";
            out.push_back(j.dump());
            break;
        case 5: { // conclusion no sub-feature accepts
            const json bad[] = {nullptr, 3.7, json::array(), json::object(), "perhaps", -1};
            j["conclusion"] = bad[rng() % 6];
            out.push_back(j.dump());
            break;
        }
        case 6: { // evidence entries broken
            json e = j["file_analysis"][0];
            switch (rng() % 6) {
            case 0: e.erase("file"); break;
            case 1: e["line"] = 0; break;
            case 2: e["line"] = "x"; break;
            case 3: e.erase("technique"); break;
            case 4: e["extra"] = 1; break;
            default: e["file"] = ""; break;
            }
            j["file_analysis"] = json::array({e});
            out.push_back(j.dump());
            break;
        }
        case 7: // evidence pointing outside the artifact
            j["file_analysis"][0]["file"] = "missing_" + std::to_string(rng() % 100) + ".py";
            out.push_back(j.dump());
            break;
        case 8: // line past the end of the file
            j["file_analysis"][0]["line"] = 500 + rng() % 1000;
            out.push_back(j.dump());
            break;
        case 9: // not an object
            out.push_back(std::array<std::string, 5>{"[]", "42", "\"text\"", "null", "true"}[rng() % 5]);
            break;
        case 10: // two documents or trailing junk
            out.push_back(text + (rng() % 2 ? text : std::string(" trailing")));
            break;
        default: { // deep nesting
            const std::size_t depth = 50 + rng() % 400;
            out.push_back(std::string(depth, '[') + std::string(depth, ']'));
            break;
        }
        }
    }
    return out;
}

void structured_output(Outcome& out) {
    std::mt19937_64 rng(31337);
    const auto replies = malformed_replies(rng, 500);

    PreparedArtifact artifact;
    artifact.artifact_id = "fuzz";
    artifact.repo_id = "o/fuzz";
    artifact.files.push_back({"exploit.py", "import requests\nrequests.post(url)\npayload = 'x'\n"});
    artifact.source_paths.insert("exploit.py");
    const AnalysisContext ctx{"CVE-2023-41001", "FlowBoard"};
    AnalyzerConfig cfg;

    std::size_t typed = 0;
    for (std::size_t i = 0; i < replies.size(); ++i) {
        const std::string& reply = replies[i];
        for (SubFeature f : kAllSubFeatures) {
            try {
                validate_evidence(parse_finding(reply, f), artifact);
                out.fail("reply " + std::to_string(i) + " accepted for " + std::string(to_string(f)));
            } catch (const FindingError&) {
                ++typed;
            } catch (const std::exception& e) {
                out.fail("reply " + std::to_string(i) + ": untyped error " + e.what());
            }
        }
        test::QueueBackend backend({}, reply);
        ExtractionStats stats;
        FeatureVector fv;
        try {
            fv = extract_features(artifact, ctx, backend, cfg, &stats);
        } catch (const std::exception& e) {
            out.fail("reply " + std::to_string(i) + ": extraction threw " + e.what());
            continue;
        }
        if (stats.defaulted != kSubFeatureCount ||
            backend.prompts.size() != kSubFeatureCount * static_cast<std::size_t>(cfg.retries + 1)) {
            out.fail("reply " + std::to_string(i) + ": " + std::to_string(stats.defaulted) + " defaults after " +
                     std::to_string(backend.prompts.size()) + " prompts");
        }
        for (SubFeature f : kAllSubFeatures) {
            const auto& got = fv[f];
            if (!(got == conservative_default(f)) || got.confidence != 1 ||
                !fv.defaulted[static_cast<std::size_t>(f)]) {
                out.fail("reply " + std::to_string(i) + ": " + std::string(to_string(f)) + " is not the default");
            }
        }
    }
    out.detail = "500 replies, " + std::to_string(typed) + " typed rejections";
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::off);
    const std::vector<Criterion> criteria{
        {1, "maturity truth table", 1.0, maturity_truth_table},
        {2, "impact hierarchy", 1.0, impact_hierarchy},
        {3, "weighted-sum arithmetic", 5.0, weighted_sums},
        {4, "scoring monotonicity", 30.0, monotonicity},
        {5, "metric oracles", 30.0, metric_oracles},
        {6, "determinism golden", 60.0, determinism},
        {7, "zero-exploit severity", 1.0, zero_exploit},
        {8, "cache replay", 10.0, cache_contract},
        {9, "prefilter scale invariance", 5.0, prefilter_invariance},
        {10, "structured-output robustness", 10.0, structured_output},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome outcome;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(outcome);
        } catch (const std::exception& e) {
            outcome.fail(std::string("threw: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.limit_seconds) {
            outcome.fail("took " + fmt_double(secs) + " s, limit " + fmt_double(c.limit_seconds) + " s");
        }
        std::printf("%s criterion %2d: %-30s %8.3f s / %5.0f s  %s\n", outcome.ok() ? "PASS" : "FAIL", c.number,
                    c.name.c_str(), secs, c.limit_seconds, outcome.detail.c_str());
        for (const auto& f : outcome.failures) {
            std::printf("       %s\n", f.c_str());
        }
        failed += !outcome.ok();
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
