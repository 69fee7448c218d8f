#include "aeas/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace aeas {

namespace {

template <std::size_t N>
void check_weights(const std::array<double, N>& w, const char* name, bool normalized) {
    double sum = 0.0;
    for (double x : w) {
        if (!std::isfinite(x) || x < 0.0) {
            throw ConfigError(std::string(name) + " must be finite and non-negative");
        }
        sum += x;
    }
    if (normalized && std::fabs(sum - 1.0) > 1e-9) {
        throw ConfigError(std::string(name) + " must sum to 1");
    }
}

template <std::size_t N>
double sum_of(const std::array<double, N>& w) {
    return std::accumulate(w.begin(), w.end(), 0.0);
}

std::string format_number(double v, int precision) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(precision);
    out << v;
    return out.str();
}

constexpr const char* kNoEvidence = "no supporting evidence; conservative default";

Justification justify(std::string feature, std::string value, const FeatureVector& fv,
                      std::initializer_list<SubFeature> sources) {
    Justification j{std::move(feature), std::move(value), {}};
    std::set<std::string> seen;
    for (SubFeature f : sources) {
        for (const auto& e : fv[f].evidence) {
            std::string line = e.file + ":" + std::to_string(e.line) + " - " + e.technique;
            if (seen.insert(line).second) {
                j.lines.push_back(std::move(line));
            }
        }
    }
    if (j.lines.empty()) {
        j.lines.emplace_back(kNoEvidence);
    }
    return j;
}

} // namespace

void Weights::validate() const {
    check_weights(complexity_w, "complexity weights", true);
    check_weights(popularity_w, "popularity weights", false);
    check_weights(feature_alpha, "feature weights", true);
    if (!std::isfinite(complexity_threshold) || !std::isfinite(popularity_threshold)) {
        throw ConfigError("thresholds must be finite");
    }
}

std::string_view to_string(AttackVector v) {
    return v == AttackVector::Remote ? "Remote" : "NotRemote";
}

std::string_view to_string(ComplexityLevel v) {
    return v == ComplexityLevel::Low ? "Low" : "High";
}

std::string_view to_string(Impact v) {
    switch (v) {
    case Impact::CodeExec:
        return "CodeExec";
    case Impact::PrivEsc:
        return "PrivEsc";
    case Impact::InfoLeak:
        return "InfoLeak";
    case Impact::Bypass:
        return "Bypass";
    case Impact::None:
        return "None";
    }
    return "None";
}

std::string_view to_string(Maturity v) {
    switch (v) {
    case Maturity::None:
        return "None";
    case Maturity::PoC:
        return "PoC";
    case Maturity::Exploit:
        return "Exploit";
    }
    return "None";
}

std::string_view to_string(PopularityLevel v) {
    return v == PopularityLevel::High ? "High" : "Low";
}

double favorability(const FeatureVector& fv, SubFeature f) {
    if (f == SubFeature::PrivilegeRequired) {
        switch (fv.privilege()) {
        case Privilege::None:
            return 1.0;
        case Privilege::User:
            return 0.5;
        case Privilege::Admin:
            return 0.0;
        }
    }
    return fv.flag(f) ? 0.0 : 1.0;
}

std::array<double, 6> complexity_inputs(const FeatureVector& fv) {
    std::array<double, 6> f{};
    for (std::size_t i = 0; i < kComplexitySubFeatures.size(); ++i) {
        f[i] = favorability(fv, kComplexitySubFeatures[i]);
    }
    return f;
}

double complexity_score(const FeatureVector& fv, const Weights& w) {
    const auto f = complexity_inputs(fv);
    double score = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        score += w.complexity_w[i] * f[i];
    }
    return score;
}

double popularity_score(const PopularityInputs& pop, const Weights& w) {
    return w.popularity_w[0] * static_cast<double>(pop.n_exploits) +
           w.popularity_w[1] * static_cast<double>(pop.stars) +
           w.popularity_w[2] * static_cast<double>(pop.forks);
}

Maturity maturity_level(bool relevance, bool availability, bool flexibility, bool functionality) {
    if (!relevance) {
        return Maturity::None;
    }
    if ((availability || flexibility) && functionality) {
        return Maturity::Exploit;
    }
    return Maturity::PoC;
}

Impact primary_impact(bool code_exec, bool priv_escalation, bool info_leak, bool bypass) {
    if (code_exec) {
        return Impact::CodeExec;
    }
    if (priv_escalation) {
        return Impact::PrivEsc;
    }
    if (info_leak) {
        return Impact::InfoLeak;
    }
    if (bypass) {
        return Impact::Bypass;
    }
    return Impact::None;
}

AggregatedFeatures aggregate(const FeatureVector& fv, const PopularityInputs& pop, const Weights& w) {
    AggregatedFeatures agg;
    agg.attack_vector = fv.flag(SubFeature::IsRemote) ? AttackVector::Remote : AttackVector::NotRemote;

    agg.complexity_score = complexity_score(fv, w);
    const double c_tol = 1e-12 * sum_of(w.complexity_w);
    agg.complexity_level = agg.complexity_score > w.complexity_threshold + c_tol ? ComplexityLevel::Low
                                                                                 : ComplexityLevel::High;

    agg.primary_impact = primary_impact(fv.flag(SubFeature::CodeExec), fv.flag(SubFeature::PrivEscalation),
                                        fv.flag(SubFeature::InfoLeak), fv.flag(SubFeature::Bypass));
    agg.dos = fv.flag(SubFeature::Dos);

    agg.maturity = maturity_level(fv.flag(SubFeature::Relevance), fv.flag(SubFeature::Availability),
                                  fv.flag(SubFeature::Flexibility), fv.flag(SubFeature::Functionality));

    agg.popularity_score = popularity_score(pop, w);
    const double p_tol = 1e-12 * std::max(1.0, std::fabs(w.popularity_threshold));
    agg.popularity_level = agg.popularity_score > w.popularity_threshold + p_tol ? PopularityLevel::High
                                                                                 : PopularityLevel::Low;
    return agg;
}

FeatureEncoding encode(const AggregatedFeatures& agg) {
    FeatureEncoding e;
    e.av = agg.attack_vector == AttackVector::Remote ? 1.0 : 0.2;
    e.ac = agg.complexity_level == ComplexityLevel::Low ? 1.0 : 0.3;
    switch (agg.primary_impact) {
    case Impact::CodeExec:
        e.impact = 1.0;
        break;
    case Impact::PrivEsc:
        e.impact = 0.8;
        break;
    case Impact::InfoLeak:
        e.impact = 0.6;
        break;
    case Impact::Bypass:
        e.impact = 0.4;
        break;
    case Impact::None:
        e.impact = 0.0;
        break;
    }
    if (agg.dos) {
        e.impact = std::max(e.impact, 0.3);
    }
    switch (agg.maturity) {
    case Maturity::Exploit:
        e.maturity = 1.0;
        break;
    case Maturity::PoC:
        e.maturity = 0.4;
        break;
    case Maturity::None:
        e.maturity = 0.0;
        break;
    }
    e.popularity = agg.popularity_level == PopularityLevel::High ? 1.0 : 0.5;
    return e;
}

double actionability(const FeatureEncoding& enc, const Weights& w) {
    const auto& a = w.feature_alpha;
    const double total = a[0] * enc.av + a[1] * enc.ac + a[2] * enc.impact + a[3] * enc.maturity +
                         a[4] * enc.popularity;
    return std::clamp(total, 0.0, 1.0);
}

double actionability(const AggregatedFeatures& agg, const Weights& w) {
    return actionability(encode(agg), w);
}

double vulnerability_severity(std::span<const double> scores) {
    double best = 0.0;
    for (double s : scores) {
        best = std::max(best, s);
    }
    return best;
}

ExploitScore score_exploit(const FeatureVector& fv, const PopularityInputs& pop, const Weights& w) {
    ExploitScore out;
    out.features = aggregate(fv, pop, w);
    out.actionability = actionability(out.features, w);
    const AggregatedFeatures& a = out.features;

    out.justifications.push_back(
        justify("Attack Vector", std::string(to_string(a.attack_vector)), fv, {SubFeature::IsRemote}));
    out.justifications.push_back(justify(
        "Attack Complexity",
        std::string(to_string(a.complexity_level)) + " (score " + format_number(a.complexity_score, 4) + ")",
        fv,
        {SubFeature::InfoDependency, SubFeature::AttackCondition, SubFeature::ProbabilityDep,
         SubFeature::UserInteraction, SubFeature::PrivilegeRequired, SubFeature::Evasion}));

    std::string impact(to_string(a.primary_impact));
    if (a.dos) {
        impact += " + DoS";
    }
    switch (a.primary_impact) {
    case Impact::CodeExec:
        out.justifications.push_back(justify("Impact", impact, fv, {SubFeature::CodeExec, SubFeature::Dos}));
        break;
    case Impact::PrivEsc:
        out.justifications.push_back(
            justify("Impact", impact, fv, {SubFeature::PrivEscalation, SubFeature::Dos}));
        break;
    case Impact::InfoLeak:
        out.justifications.push_back(justify("Impact", impact, fv, {SubFeature::InfoLeak, SubFeature::Dos}));
        break;
    case Impact::Bypass:
        out.justifications.push_back(justify("Impact", impact, fv, {SubFeature::Bypass, SubFeature::Dos}));
        break;
    case Impact::None:
        out.justifications.push_back(justify("Impact", impact, fv, {SubFeature::Dos}));
        break;
    }

    out.justifications.push_back(justify("Exploit Maturity", std::string(to_string(a.maturity)), fv,
                                         {SubFeature::Relevance, SubFeature::Availability,
                                          SubFeature::Flexibility, SubFeature::Functionality}));

    Justification pop_j{"Popularity",
                        std::string(to_string(a.popularity_level)) + " (score " +
                            format_number(a.popularity_score, 3) + ")",
                        {}};
    pop_j.lines.push_back(std::to_string(pop.n_exploits) + " exploit repositories, " +
                          std::to_string(pop.stars) + " stars, " + std::to_string(pop.forks) + " forks");
    out.justifications.push_back(std::move(pop_j));
    return out;
}

} // namespace aeas
