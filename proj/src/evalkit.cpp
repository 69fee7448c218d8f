#include "aeas/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

namespace aeas {

namespace {

int maturity_rank(ObservedMaturity m) {
    switch (m) {
    case ObservedMaturity::Functional:
        return 3;
    case ObservedMaturity::PoC:
        return 2;
    case ObservedMaturity::DocOnly:
        return 1;
    case ObservedMaturity::NonFunctional:
        return 0;
    }
    return 0;
}

void require_k(std::size_t k, const char* name) {
    if (k < 1) {
        throw EvalError(std::string(name) + " must be at least 1");
    }
}

std::vector<std::string> top(const std::vector<std::string>& order, std::size_t k) {
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(k, order.size()))};
}

bool has_functional(const RankingCase& c) {
    return std::any_of(c.labels.begin(), c.labels.end(), [](const auto& kv) {
        return kv.second.maturity_observed == ObservedMaturity::Functional;
    });
}

void require_pair(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw EvalError("score lists differ in length (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) {
        throw EvalError("agreement statistics need at least two pairs");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw EvalError("agreement statistics need finite scores");
        }
    }
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    const auto e = s.find_last_not_of(" \t\r\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

bool label_better(const GroundTruthLabel& a, const GroundTruthLabel& b) {
    const int ra = maturity_rank(a.maturity_observed);
    const int rb = maturity_rank(b.maturity_observed);
    if (ra != rb) {
        return ra > rb;
    }
    const double ta = a.completion_minutes.value_or(std::numeric_limits<double>::infinity());
    const double tb = b.completion_minutes.value_or(std::numeric_limits<double>::infinity());
    if (ta != tb) {
        return ta < tb;
    }
    const auto ea = a.error_count.value_or(std::numeric_limits<std::uint64_t>::max());
    const auto eb = b.error_count.value_or(std::numeric_limits<std::uint64_t>::max());
    if (ea != eb) {
        return ea < eb;
    }
    return a.artifact_id < b.artifact_id;
}

std::vector<std::string> ground_truth_order(const RankingCase& c) {
    std::vector<const GroundTruthLabel*> labels;
    for (const auto& [id, label] : c.labels) {
        labels.push_back(&label);
    }
    std::sort(labels.begin(), labels.end(),
              [](const GroundTruthLabel* a, const GroundTruthLabel* b) { return label_better(*a, *b); });
    std::vector<std::string> out;
    for (const auto* l : labels) {
        out.push_back(l->artifact_id);
    }
    return out;
}

void validate_case(const RankingCase& c) {
    std::set<std::string> seen;
    for (const auto& id : c.predicted_order) {
        if (!seen.insert(id).second) {
            throw EvalError(c.cve_id + ": artifact " + id + " appears twice in the ranking");
        }
        if (!c.labels.contains(id)) {
            throw EvalError(c.cve_id + ": ranked artifact " + id + " has no label");
        }
    }
    if (seen.size() != c.labels.size()) {
        throw EvalError(c.cve_id + ": ranking omits labeled artifacts");
    }
    for (const auto& [id, label] : c.labels) {
        if (label.artifact_id != id) {
            throw EvalError(c.cve_id + ": label map key " + id + " does not match its label");
        }
    }
}

double top_k_success(std::span<const RankingCase> cases, std::size_t k) {
    require_k(k, "k");
    std::size_t eligible = 0;
    std::size_t hits = 0;
    for (const auto& c : cases) {
        validate_case(c);
        if (!has_functional(c)) {
            continue;
        }
        ++eligible;
        for (const auto& id : top(c.predicted_order, k)) {
            if (c.labels.at(id).maturity_observed == ObservedMaturity::Functional) {
                ++hits;
                break;
            }
        }
    }
    return eligible == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(eligible);
}

double precision_at_k(std::span<const RankingCase> cases, std::size_t k) {
    return recall_k_for_top_j(cases, k, 1);
}

double recall_k_for_top_j(std::span<const RankingCase> cases, std::size_t k, std::size_t j) {
    require_k(k, "k");
    require_k(j, "j");
    std::size_t eligible = 0;
    std::size_t hits = 0;
    for (const auto& c : cases) {
        validate_case(c);
        if (c.labels.empty()) {
            continue;
        }
        ++eligible;
        const auto truth = top(ground_truth_order(c), j);
        const std::set<std::string> wanted(truth.begin(), truth.end());
        for (const auto& id : top(c.predicted_order, k)) {
            if (wanted.contains(id)) {
                ++hits;
                break;
            }
        }
    }
    return eligible == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(eligible);
}

double random_select_success(std::span<const RankingCase> cases, std::size_t k) {
    require_k(k, "k");
    std::size_t eligible = 0;
    double expected = 0.0;
    for (const auto& c : cases) {
        validate_case(c);
        if (!has_functional(c)) {
            continue;
        }
        ++eligible;
        const std::size_t n = c.labels.size();
        const auto f = static_cast<std::size_t>(std::count_if(c.labels.begin(), c.labels.end(), [](const auto& kv) {
            return kv.second.maturity_observed == ObservedMaturity::Functional;
        }));
        const std::size_t picks = std::min(k, n);
        // P(no functional among the picks) = C(n-f, picks) / C(n, picks)
        double miss = 1.0;
        for (std::size_t i = 0; i < picks; ++i) {
            miss *= static_cast<double>(n - f - std::min(n - f, i)) / static_cast<double>(n - i);
        }
        expected += 1.0 - miss;
    }
    return eligible == 0 ? 0.0 : expected / static_cast<double>(eligible);
}

AgreementStats bland_altman(std::span<const double> a, std::span<const double> b) {
    require_pair(a, b);
    const std::size_t n = a.size();
    std::vector<double> diffs(n);
    for (std::size_t i = 0; i < n; ++i) {
        diffs[i] = b[i] - a[i];
    }
    AgreementStats s;
    s.n = n;
    s.mean_diff = mean_of(diffs);
    double ss = 0.0;
    for (double d : diffs) {
        ss += (d - s.mean_diff) * (d - s.mean_diff);
    }
    s.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
    s.limits = {s.mean_diff - 1.96 * s.sd_diff, s.mean_diff + 1.96 * s.sd_diff};
    // Points sitting on a limit up to rounding are inside.
    double scale = 0.0;
    for (double d : diffs) {
        scale = std::max(scale, std::fabs(d));
    }
    const double tol = 1e-12 * std::max(1.0, scale);
    for (double d : diffs) {
        if (d < s.limits.first - tol || d > s.limits.second + tol) {
            ++s.n_outside;
        }
    }
    s.pct_outside = 100.0 * static_cast<double>(s.n_outside) / static_cast<double>(n);
    return s;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    require_pair(a, b);
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::nullopt;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[idx[t]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    require_pair(a, b);
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

AgreementStats score_agreement(std::span<const double> a, std::span<const double> b) {
    AgreementStats s = bland_altman(a, b);
    s.pearson = pearson(a, b);
    s.spearman = spearman(a, b);
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        abs_sum += std::fabs(d);
        sq_sum += d * d;
    }
    const auto n = static_cast<double>(a.size());
    s.mae = abs_sum / n;
    s.rmse = std::sqrt(sq_sum / n);
    // sqrt rounding can leave rmse a hair under mae when all |d| are equal.
    s.rmse = std::max(s.rmse, s.mae);
    return s;
}

std::map<std::string, double> load_baseline_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CorpusError(path, "baseline", "cannot open file");
    }
    std::map<std::string, double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw CorpusError(path, "line " + std::to_string(line_no), "expected cve_id,score");
        }
        const std::string id = trim(line.substr(0, comma));
        const std::string value = trim(line.substr(comma + 1));
        double score = 0.0;
        try {
            std::size_t used = 0;
            score = std::stod(value, &used);
            if (used != value.size()) {
                throw std::invalid_argument(value);
            }
        } catch (const std::exception&) {
            if (line_no == 1 && out.empty()) {
                continue; // header row
            }
            throw CorpusError(path, "line " + std::to_string(line_no), "score is not a number");
        }
        if (!std::isfinite(score)) {
            throw CorpusError(path, "line " + std::to_string(line_no), "score is not finite");
        }
        if (!is_valid_cve_id(id)) {
            throw CorpusError(path, "line " + std::to_string(line_no), "invalid cve_id '" + id + "'");
        }
        if (!out.emplace(id, score).second) {
            throw CorpusError(path, "line " + std::to_string(line_no), "duplicate cve_id " + id);
        }
    }
    return out;
}

BlandAltmanPlot bland_altman_plot(std::span<const std::string> ids, std::span<const double> a,
                                  std::span<const double> b) {
    if (ids.size() != a.size()) {
        throw EvalError("plot ids and scores differ in length");
    }
    const AgreementStats s = bland_altman(a, b);
    BlandAltmanPlot plot;
    plot.mean_diff = s.mean_diff;
    plot.lo = s.limits.first;
    plot.hi = s.limits.second;
    for (std::size_t i = 0; i < a.size(); ++i) {
        plot.points.push_back({ids[i], (a[i] + b[i]) / 2.0, b[i] - a[i]});
    }
    return plot;
}

} // namespace aeas
