#include "aeas/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace aeas {

using nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
Enum enum_from(const json& j, const char* field, const std::array<Enum, N>& values) {
    const std::string text = j.at(field).get<std::string>();
    for (Enum v : values) {
        if (to_string(v) == text) {
            return v;
        }
    }
    throw Error(std::string("scores.json: unknown ") + field + " '" + text + "'");
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* field) {
    if (!j.contains(field) || j[field].is_null()) {
        return std::nullopt;
    }
    return j[field].get<double>();
}

} // namespace

std::string format_score(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

void finalize(ScoredVulnerability& v) {
    std::sort(v.exploits.begin(), v.exploits.end(), [](const ScoredExploit& a, const ScoredExploit& b) {
        if (a.score.actionability != b.score.actionability) {
            return a.score.actionability > b.score.actionability;
        }
        return a.artifact_id < b.artifact_id;
    });
    std::vector<double> scores;
    for (const auto& e : v.exploits) {
        scores.push_back(e.score.actionability);
    }
    v.severity = vulnerability_severity(scores);
    std::sort(v.dropped.begin(), v.dropped.end());
}

std::vector<const ScoredVulnerability*> severity_order(const ScoreReport& report) {
    std::vector<const ScoredVulnerability*> out;
    for (const auto& v : report.vulnerabilities) {
        out.push_back(&v);
    }
    std::stable_sort(out.begin(), out.end(), [](const ScoredVulnerability* a, const ScoredVulnerability* b) {
        if (a->severity != b->severity) {
            return a->severity > b->severity;
        }
        return a->cve_id < b->cve_id;
    });
    return out;
}

std::string scores_to_json(const ScoreReport& report) {
    json vulns = json::array();
    for (const auto& v : report.vulnerabilities) {
        json exploits = json::array();
        for (const auto& e : v.exploits) {
            const AggregatedFeatures& f = e.score.features;
            json justifications = json::array();
            for (const auto& j : e.score.justifications) {
                justifications.push_back({{"feature", j.feature}, {"value", j.value}, {"evidence", j.lines}});
            }
            exploits.push_back({{"artifact_id", e.artifact_id},
                                {"repo_id", e.repo_id},
                                {"actionability", e.score.actionability},
                                {"defaulted_subfeatures", e.defaulted_subfeatures},
                                {"features",
                                 {{"attack_vector", to_string(f.attack_vector)},
                                  {"complexity_level", to_string(f.complexity_level)},
                                  {"complexity_score", f.complexity_score},
                                  {"primary_impact", to_string(f.primary_impact)},
                                  {"dos", f.dos},
                                  {"maturity", to_string(f.maturity)},
                                  {"popularity_level", to_string(f.popularity_level)},
                                  {"popularity_score", f.popularity_score}}},
                                {"justifications", justifications}});
        }
        vulns.push_back({{"cve_id", v.cve_id},
                         {"application", v.application},
                         {"cvss", optional_number(v.cvss)},
                         {"epss", optional_number(v.epss)},
                         {"severity", v.severity},
                         {"exploits", exploits},
                         {"dropped", v.dropped}});
    }
    const json doc = {{"backend", report.backend}, {"vulnerabilities", vulns}};
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

ScoreReport scores_from_json(std::string_view text) {
    ScoreReport report;
    try {
        const json doc = json::parse(text);
        report.backend = doc.at("backend").get<std::string>();
        for (const auto& jv : doc.at("vulnerabilities")) {
            ScoredVulnerability v;
            v.cve_id = jv.at("cve_id").get<std::string>();
            v.application = jv.at("application").get<std::string>();
            v.cvss = read_optional(jv, "cvss");
            v.epss = read_optional(jv, "epss");
            v.severity = jv.at("severity").get<double>();
            v.dropped = jv.at("dropped").get<std::vector<std::string>>();
            for (const auto& je : jv.at("exploits")) {
                ScoredExploit e;
                e.artifact_id = je.at("artifact_id").get<std::string>();
                e.repo_id = je.at("repo_id").get<std::string>();
                e.score.actionability = je.at("actionability").get<double>();
                e.defaulted_subfeatures = je.at("defaulted_subfeatures").get<std::size_t>();
                const json& jf = je.at("features");
                AggregatedFeatures& f = e.score.features;
                f.attack_vector = enum_from(jf, "attack_vector",
                                            std::array{AttackVector::Remote, AttackVector::NotRemote});
                f.complexity_level = enum_from(jf, "complexity_level",
                                               std::array{ComplexityLevel::Low, ComplexityLevel::High});
                f.complexity_score = jf.at("complexity_score").get<double>();
                f.primary_impact =
                    enum_from(jf, "primary_impact",
                              std::array{Impact::CodeExec, Impact::PrivEsc, Impact::InfoLeak, Impact::Bypass,
                                         Impact::None});
                f.dos = jf.at("dos").get<bool>();
                f.maturity =
                    enum_from(jf, "maturity", std::array{Maturity::None, Maturity::PoC, Maturity::Exploit});
                f.popularity_level = enum_from(jf, "popularity_level",
                                               std::array{PopularityLevel::Low, PopularityLevel::High});
                f.popularity_score = jf.at("popularity_score").get<double>();
                for (const auto& jj : je.at("justifications")) {
                    e.score.justifications.push_back({jj.at("feature").get<std::string>(),
                                                      jj.at("value").get<std::string>(),
                                                      jj.at("evidence").get<std::vector<std::string>>()});
                }
                v.exploits.push_back(std::move(e));
            }
            report.vulnerabilities.push_back(std::move(v));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("scores.json is malformed: ") + e.what());
    }
    return report;
}

std::string render_report_markdown(const ScoreReport& report) {
    std::ostringstream out;
    out << "# Exploit actionability report\n\n"
        << "Backend: `" << report.backend << "`\n\n"
        << "| Rank | CVE | Application | Severity | Exploits |\n"
        << "|---:|---|---|---:|---:|\n";
    const auto ordered = severity_order(report);
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto* v = ordered[i];
        out << "| " << (i + 1) << " | " << v->cve_id << " | " << v->application << " | "
            << format_score(v->severity) << " | " << v->exploits.size() << " |\n";
    }
    for (const auto* v : ordered) {
        out << "\n## " << v->cve_id << " (" << v->application << ")\n\n"
            << "Severity score of the vulnerability: **" << format_score(v->severity) << "**\n";
        if (v->exploits.empty()) {
            out << "\nNo usable exploit; default score applied.\n";
        }
        for (std::size_t i = 0; i < v->exploits.size(); ++i) {
            const auto& e = v->exploits[i];
            out << "\n### Exploit " << (i + 1) << ": " << e.artifact_id << " (" << e.repo_id << ")\n\n"
                << "Actionability score: **" << format_score(e.score.actionability) << "**";
            if (e.defaulted_subfeatures > 0) {
                out << " (" << e.defaulted_subfeatures << " sub-features at conservative defaults)";
            }
            out << "\n\n";
            for (const auto& j : e.score.justifications) {
                out << "- **" << j.feature << "**: " << j.value << "\n";
                for (const auto& line : j.lines) {
                    out << "  - " << line << "\n";
                }
            }
        }
        if (!v->dropped.empty()) {
            out << "\nFiltered out: ";
            for (std::size_t i = 0; i < v->dropped.size(); ++i) {
                out << (i ? ", " : "") << v->dropped[i];
            }
            out << "\n";
        }
    }
    return out.str();
}

} // namespace aeas
