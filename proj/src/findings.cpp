#include "aeas/analyzer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace aeas {

using nlohmann::json;

namespace {

struct SubFeatureInfo {
    const char* key;
    const char* display;
};

constexpr std::array<SubFeatureInfo, kSubFeatureCount> kInfo{{
    {"is_remote", "IsRemote"},
    {"info_dependency", "Information Dependency"},
    {"attack_condition", "Attack Condition"},
    {"probability_dep", "Probability Dependency"},
    {"user_interaction", "User Interaction"},
    {"privilege_required", "Privilege Required"},
    {"evasion", "Attack Evasion"},
    {"code_exec", "Code Execution"},
    {"priv_escalation", "Privilege Escalation"},
    {"info_leak", "Information Leak"},
    {"bypass", "Bypass"},
    {"dos", "Denial of Service"},
    {"relevance", "Relevance"},
    {"availability", "Availability"},
    {"flexibility", "Flexibility"},
    {"functionality", "Functionality"},
}};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view strip_fence(std::string_view raw) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
            s.remove_prefix(1);
        }
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
            s.remove_suffix(1);
        }
        return s;
    };
    std::string_view s = trim(raw);
    if (s.starts_with("```") && s.size() >= 6 && s.ends_with("```")) {
        s.remove_suffix(3);
        const auto nl = s.find('\n');
        if (nl == std::string_view::npos) {
            return raw;
        }
        s.remove_prefix(nl + 1);
        return trim(s);
    }
    return s;
}

bool is_complexity(SubFeature f) {
    return std::find(kComplexitySubFeatures.begin(), kComplexitySubFeatures.end(), f) !=
           kComplexitySubFeatures.end();
}

Conclusion coerce_conclusion(const json& value, SubFeature f) {
    if (f == SubFeature::PrivilegeRequired) {
        if (value.is_string()) {
            const std::string v = lower(value.get<std::string>());
            if (v == "none" || v == "no" || v == "unauthenticated") {
                return Privilege::None;
            }
            if (v == "user" || v == "low" || v == "authenticated") {
                return Privilege::User;
            }
            if (v == "admin" || v == "administrator" || v == "root" || v == "high") {
                return Privilege::Admin;
            }
            throw SchemaError("privilege_required conclusion must be none, user or admin");
        }
        if (value.is_number_integer()) {
            const auto v = value.get<std::int64_t>();
            if (v < 0 || v > 2) {
                throw RangeError("privilege_required ordinal must be 0, 1 or 2");
            }
            return static_cast<Privilege>(v);
        }
        throw SchemaError("privilege_required conclusion must be a string");
    }
    if (value.is_boolean()) {
        return value.get<bool>();
    }
    if (value.is_string()) {
        const std::string v = lower(value.get<std::string>());
        if (v == "true") {
            return true;
        }
        if (v == "false") {
            return false;
        }
    }
    throw SchemaError(std::string(to_string(f)) + " conclusion must be a boolean");
}

json finding_to_json(const SubFeatureFinding& finding) {
    json evidence = json::array();
    for (const auto& e : finding.evidence) {
        evidence.push_back({{"file", e.file}, {"line", e.line}, {"technique", e.technique}});
    }
    json conclusion;
    if (const auto* b = std::get_if<bool>(&finding.conclusion)) {
        conclusion = *b;
    } else {
        conclusion = std::string(to_string(std::get<Privilege>(finding.conclusion)));
    }
    return {{"file_analysis", evidence}, {"conclusion", conclusion}, {"confidence", finding.confidence}};
}

SubFeatureFinding finding_from_json(const json& j, SubFeature subfeature) {
    if (!j.is_object()) {
        throw SchemaError("reply must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "file_analysis" && key != "conclusion" && key != "confidence") {
            throw SchemaError("unknown field '" + key + "'");
        }
    }
    for (const char* required : {"file_analysis", "conclusion", "confidence"}) {
        if (!j.contains(required)) {
            throw SchemaError(std::string("missing field '") + required + "'");
        }
    }

    SubFeatureFinding finding;
    finding.subfeature = subfeature;

    const json& conf = j["confidence"];
    if (conf.is_number_integer()) {
        const auto v = conf.get<std::int64_t>();
        if (v < 1 || v > 5) {
            throw RangeError("confidence " + std::to_string(v) + " outside 1..5");
        }
        finding.confidence = static_cast<int>(v);
    } else if (conf.is_number_float()) {
        const double v = conf.get<double>();
        if (!std::isfinite(v) || v != std::floor(v)) {
            throw SchemaError("confidence must be an integer");
        }
        if (v < 1.0 || v > 5.0) {
            throw RangeError("confidence outside 1..5");
        }
        finding.confidence = static_cast<int>(v);
    } else {
        throw SchemaError("confidence must be an integer");
    }

    finding.conclusion = coerce_conclusion(j["conclusion"], subfeature);

    const json& analysis = j["file_analysis"];
    if (!analysis.is_array()) {
        throw SchemaError("file_analysis must be an array");
    }
    for (const auto& item : analysis) {
        if (!item.is_object()) {
            throw SchemaError("file_analysis entries must be objects");
        }
        for (const auto& [key, value] : item.items()) {
            if (key != "file" && key != "line" && key != "technique") {
                throw SchemaError("unknown file_analysis field '" + key + "'");
            }
        }
        if (!item.contains("file") || !item["file"].is_string() ||
            item["file"].get<std::string>().empty()) {
            throw SchemaError("file_analysis entry needs a non-empty 'file'");
        }
        if (!item.contains("line") || !item["line"].is_number_integer()) {
            throw SchemaError("file_analysis entry needs an integer 'line'");
        }
        if (!item.contains("technique") || !item["technique"].is_string()) {
            throw SchemaError("file_analysis entry needs a 'technique' string");
        }
        const auto line = item["line"].get<std::int64_t>();
        if (line < 1 || line > std::numeric_limits<std::uint32_t>::max()) {
            throw RangeError("file_analysis line must be a positive line number");
        }
        finding.evidence.push_back(Evidence{item["file"].get<std::string>(),
                                            static_cast<std::uint32_t>(line),
                                            item["technique"].get<std::string>()});
    }
    return finding;
}

} // namespace

std::string_view to_string(SubFeature f) {
    return kInfo[static_cast<std::size_t>(f)].key;
}

std::string_view display_name(SubFeature f) {
    return kInfo[static_cast<std::size_t>(f)].display;
}

std::optional<SubFeature> subfeature_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kInfo.size(); ++i) {
        if (text == kInfo[i].key) {
            return static_cast<SubFeature>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(Privilege p) {
    switch (p) {
    case Privilege::None:
        return "none";
    case Privilege::User:
        return "user";
    case Privilege::Admin:
        return "admin";
    }
    return "admin";
}

SubFeatureFinding conservative_default(SubFeature f) {
    SubFeatureFinding finding;
    finding.subfeature = f;
    finding.confidence = 1;
    if (f == SubFeature::PrivilegeRequired) {
        finding.conclusion = Privilege::Admin;
    } else {
        finding.conclusion = is_complexity(f);
    }
    return finding;
}

FeatureVector::FeatureVector() {
    for (SubFeature f : kAllSubFeatures) {
        findings[static_cast<std::size_t>(f)] = conservative_default(f);
        defaulted[static_cast<std::size_t>(f)] = true;
    }
}

bool FeatureVector::flag(SubFeature f) const {
    const auto* b = std::get_if<bool>(&(*this)[f].conclusion);
    if (!b) {
        throw Error(std::string(to_string(f)) + " does not carry a boolean conclusion");
    }
    return *b;
}

Privilege FeatureVector::privilege() const {
    const auto* p = std::get_if<Privilege>(&(*this)[SubFeature::PrivilegeRequired].conclusion);
    if (!p) {
        throw Error("privilege_required does not carry an ordinal conclusion");
    }
    return *p;
}

bool FeatureVector::complete() const {
    for (SubFeature f : kAllSubFeatures) {
        const auto& finding = (*this)[f];
        if (finding.subfeature != f || finding.confidence < 1 || finding.confidence > 5) {
            return false;
        }
        const bool wants_ordinal = f == SubFeature::PrivilegeRequired;
        if (wants_ordinal != std::holds_alternative<Privilege>(finding.conclusion)) {
            return false;
        }
    }
    return true;
}

SubFeatureFinding parse_finding(std::string_view raw, SubFeature subfeature) {
    const std::string_view body = strip_fence(raw);
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("reply is not valid JSON: ") + e.what());
    }
    return finding_from_json(j, subfeature);
}

std::string serialize_finding(const SubFeatureFinding& finding) {
    return finding_to_json(finding).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string serialize_feature_vector(const FeatureVector& fv, std::string_view cve_id,
                                     std::string_view artifact_id, std::string_view backend) {
    json findings = json::object();
    for (SubFeature f : kAllSubFeatures) {
        findings[std::string(to_string(f))] = {
            {"finding", finding_to_json(fv[f])},
            {"defaulted", fv.defaulted[static_cast<std::size_t>(f)]}};
    }
    const json doc = {{"cve_id", cve_id},
                      {"artifact_id", artifact_id},
                      {"backend", backend},
                      {"findings", findings}};
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

FeatureVector parse_feature_vector(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("findings file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("findings") || !doc["findings"].is_object()) {
        throw SchemaError("findings file lacks a 'findings' object");
    }
    FeatureVector fv;
    for (SubFeature f : kAllSubFeatures) {
        const std::string key(to_string(f));
        if (!doc["findings"].contains(key)) {
            throw SchemaError("findings file lacks sub-feature '" + key + "'");
        }
        const json& entry = doc["findings"][key];
        if (!entry.is_object() || !entry.contains("finding")) {
            throw SchemaError("findings entry '" + key + "' is malformed");
        }
        fv[f] = finding_from_json(entry["finding"], f);
        fv.defaulted[static_cast<std::size_t>(f)] = entry.value("defaulted", false);
    }
    return fv;
}

} // namespace aeas
