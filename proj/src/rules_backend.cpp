#include "aeas/analyzer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

namespace aeas {

namespace {

enum class Scope { Any, SourceOnly };

struct Rule {
    std::regex pattern;
    std::string technique;
    Scope scope = Scope::Any;
};

Rule rule(const char* pattern, const char* technique, Scope scope = Scope::Any) {
    return Rule{std::regex(pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize),
                technique, scope};
}

using RuleTable = std::vector<Rule>;

// One table per boolean sub-feature (privilege and relevance are handled
// separately, availability is structural).
std::map<SubFeature, RuleTable> build_tables() {
    std::map<SubFeature, RuleTable> t;
    t[SubFeature::IsRemote] = {
        rule(R"(\bremote(ly)?\b)", "Describes remote exploitation"),
        rule(R"(\bover (the )?network\b)", "Attack delivered over the network"),
        rule(R"(\bvia https?\b)", "Attack delivered via HTTP"),
        rule(R"(requests\.(get|post|put|patch|delete)\s*\()", "Issues HTTP requests to the target",
             Scope::SourceOnly),
        rule(R"(\bsocket\.(connect|create_connection)\b)", "Opens a network socket to the target",
             Scope::SourceOnly),
        rule(R"(\b(urllib\.request|http\.client|httplib)\b)", "Uses an HTTP client library",
             Scope::SourceOnly),
        rule(R"(\b(rhost|target_url|target_host)\b)", "Takes a remote host as the target",
             Scope::SourceOnly),
    };
    t[SubFeature::InfoDependency] = {
        rule(R"(\b(password|passwd|pwd)\s*[:=]\s*['"][^'"]+['"])", "Hardcoded credentials"),
        rule(R"(\b(api[_-]?key|access[_-]?token|secret[_-]?key)\s*[:=])", "Requires an API key or token"),
        rule(R"(--(username|password|token|cookie|session)\b)", "Operator must supply credentials"),
        rule(R"(\bvalid (credentials|session cookie|api key|token)\b)", "Requires known credentials"),
    };
    t[SubFeature::AttackCondition] = {
        rule(R"(\bmust be (enabled|configured|installed|running|exposed)\b)",
             "Depends on a specific target configuration"),
        rule(R"(\brequires? (the )?[\w-]+( [\w-]+)? (to be )?(enabled|configured|installed)\b)",
             "Depends on an optional component being enabled"),
        rule(R"(\bnon-default\b)", "Needs a non-default setting"),
        rule(R"(\bdebug mode\b)", "Needs debug mode on the target"),
    };
    t[SubFeature::ProbabilityDep] = {
        rule(R"(\brace condition\b|\btoctou\b)", "Race-dependent execution"),
        rule(R"(\bbrute[- ]?forc)", "Brute forcing until success"),
        rule(R"(\bheap spray)", "Heap spraying"),
        rule(R"(\b(unreliable|not always reliable|several attempts|multiple attempts)\b)",
             "Success is probabilistic"),
    };
    t[SubFeature::UserInteraction] = {
        rule(R"(\b(victim|user|administrator|admin) (must|needs to|has to) (click|open|visit|upload|log ?in|view)\b)",
             "Requires a victim action"),
        rule(R"(\bphishing\b|\bsocial engineering\b)", "Relies on social engineering"),
        rule(R"(\btricks? (the|a) (user|victim)\b)", "Relies on tricking a user"),
    };
    t[SubFeature::Evasion] = {
        rule(R"(\bobfuscat)", "Obfuscates the payload"),
        rule(R"(\bevad(e|es|ing)\b|\bevasion\b)", "Evades detection"),
        rule(R"(\bbypass(es|ing)? (the )?(waf|ids|ips|antivirus|av|edr)\b)", "Bypasses a protection layer"),
    };
    t[SubFeature::CodeExec] = {
        rule(R"(\bremote code execution\b|\brce\b)", "Remote code execution"),
        rule(R"(\b(arbitrary )?code execution\b)", "Code execution"),
        rule(R"(\bcommand (execution|injection)\b)", "OS command execution"),
        rule(R"(\bexecutes? (arbitrary )?(commands?|code)\b)", "Executes attacker-chosen commands"),
        rule(R"(\breverse[ _-]?shell\b|\bweb ?shell\b)", "Spawns a shell on the target"),
    };
    t[SubFeature::PrivEscalation] = {
        rule(R"(\bprivilege escalation\b|\blpe\b)", "Privilege escalation"),
        rule(R"(\bescalates? (privileges|to root)\b)", "Escalates privileges"),
        rule(R"(\bgain(s|ed)? (root|admin|administrator|system) (privileges|access)\b)",
             "Gains elevated access"),
        rule(R"(\bcreates? (a |an )?(new )?admin(istrator)? (account|user)\b)",
             "Creates an administrator account"),
    };
    t[SubFeature::InfoLeak] = {
        rule(R"(\binformation (disclosure|leak)\b)", "Information disclosure"),
        rule(R"(\b(arbitrary file read|read arbitrary files)\b)", "Arbitrary file read"),
        rule(R"(\b(path|directory) traversal\b)", "Path traversal"),
        rule(R"(/etc/passwd)", "Reads system files"),
        rule(R"(\bdumps? (the )?(database|credentials|hashes|memory)\b)", "Dumps sensitive data"),
    };
    t[SubFeature::Bypass] = {
        rule(R"(\b(authentication|auth) bypass\b)", "Authentication bypass"),
        rule(R"(\bbypass(es|ing)? (the )?(auth|authentication|login|csrf|2fa|access control)\b)",
             "Bypasses a security control"),
    };
    t[SubFeature::Dos] = {
        rule(R"(\bdenial[ -]of[ -]service\b)", "Denial of service"),
        rule(R"(\bcrash(es)? the (server|service|application|process|daemon)\b)", "Crashes the service"),
        rule(R"(\bresource exhaustion\b|\binfinite loop\b)", "Exhausts target resources"),
    };
    t[SubFeature::Flexibility] = {
        rule(R"(\bargparse\b|\bgetopt\b|\bsys\.argv\b|\bProcess\.argv\b)",
             "Command-line parameters control the exploit", Scope::SourceOnly),
        rule(R"(add_argument\(\s*['"]--?(target|url|host|rhost|lhost|port|cmd|command|payload)\b)",
             "Target or payload is configurable", Scope::SourceOnly),
    };
    t[SubFeature::Functionality] = {
        rule(R"(\breverse[ _-]?shell\b|/bin/(ba)?sh\b)", "Delivers a shell", Scope::SourceOnly),
        rule(R"(\b(payload|cmd|command)\s*=)", "Builds and sends an attack payload", Scope::SourceOnly),
        rule(R"(\b(create|add)_(admin|user|account)\b)", "Creates an account on the target",
             Scope::SourceOnly),
        rule(R"(\bdef exploit\s*\(|\bfunction exploit\s*\()", "Implements the exploitation step",
             Scope::SourceOnly),
    };
    return t;
}

const std::map<SubFeature, RuleTable>& tables() {
    static const std::map<SubFeature, RuleTable> t = build_tables();
    return t;
}

const RuleTable& unauthenticated_rules() {
    static const RuleTable t = {
        rule(R"(\bunauthenticated\b|\bpre-?auth(entication)?\b)", "Works without authentication"),
        rule(R"(\bwithout (any )?(authentication|credentials|login)\b|\bno (authentication|credentials) (is )?(needed|required)\b)",
             "Works without authentication"),
    };
    return t;
}

const RuleTable& admin_rules() {
    static const RuleTable t = {
        rule(R"(\b(admin|administrator|root) (credentials|account|privileges|access|session)\b.{0,20}\b(required|needed)\b)",
             "Requires administrative access"),
        rule(R"(\brequires? (an )?(admin|administrator|root)\b)", "Requires administrative access"),
        rule(R"(\b(logged in|authenticated) as (an )?(admin|administrator|root)\b)",
             "Runs as an administrator"),
    };
    return t;
}

const RuleTable& user_rules() {
    static const RuleTable t = {
        rule(R"(\bauthenticated (user|attacker|session)\b)", "Requires an authenticated user"),
        rule(R"(\blow[- ]privileged? (user|account)\b)", "Requires a low-privileged account"),
        rule(R"(\brequires? (a )?valid (user )?(account|credentials|session)\b)",
             "Requires a valid user account"),
    };
    return t;
}

constexpr std::size_t kMaxEvidence = 5;

struct Scan {
    std::vector<Evidence> evidence;
    std::size_t matches = 0;
};

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::uint32_t line = 1;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        fn(line, text.substr(pos, end - pos));
        if (nl == std::string_view::npos) {
            break;
        }
        pos = nl + 1;
        ++line;
    }
}

Scan scan(const RuleTable& table, const PreparedArtifact& artifact) {
    Scan result;
    auto visit = [&](const SourceDocument& doc, bool is_source) {
        for_each_line(doc.text, [&](std::uint32_t line, std::string_view text) {
            for (const Rule& r : table) {
                if (r.scope == Scope::SourceOnly && !is_source) {
                    continue;
                }
                if (std::regex_search(text.begin(), text.end(), r.pattern)) {
                    ++result.matches;
                    if (result.evidence.size() < kMaxEvidence) {
                        result.evidence.push_back({doc.source, line, r.technique});
                    }
                    break; // one hit per line is enough
                }
            }
        });
    };
    for (const auto& f : artifact.files) {
        visit(f, artifact.is_source(f.source));
    }
    for (const auto& d : artifact.docs) {
        visit(d, false);
    }
    return result;
}

int confidence_for(std::size_t matches) {
    return matches == 0 ? 3 : static_cast<int>(std::min<std::size_t>(5, 2 + matches));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

Scan scan_relevance(const PreparedArtifact& artifact, const AnalysisContext& ctx) {
    Scan result;
    const std::string cve = lower(ctx.cve_id);
    const std::string app = lower(ctx.application);
    auto visit = [&](const SourceDocument& doc) {
        for_each_line(doc.text, [&](std::uint32_t line, std::string_view text) {
            const std::string l = lower(text);
            const char* technique = nullptr;
            if (!cve.empty() && l.find(cve) != std::string::npos) {
                technique = "Names the CVE identifier";
            } else if (app.size() >= 3 && l.find(app) != std::string::npos) {
                technique = "Targets the affected application";
            }
            if (technique) {
                ++result.matches;
                if (result.evidence.size() < kMaxEvidence) {
                    result.evidence.push_back({doc.source, line, technique});
                }
            }
        });
    };
    for (const auto& f : artifact.files) {
        visit(f);
    }
    for (const auto& d : artifact.docs) {
        visit(d);
    }
    return result;
}

SubFeatureFinding boolean_finding(SubFeature f, Scan s) {
    SubFeatureFinding finding;
    finding.subfeature = f;
    finding.conclusion = s.matches > 0;
    finding.confidence = confidence_for(s.matches);
    finding.evidence = std::move(s.evidence);
    return finding;
}

SubFeatureFinding privilege_finding(const PreparedArtifact& artifact) {
    SubFeatureFinding finding;
    finding.subfeature = SubFeature::PrivilegeRequired;
    if (Scan s = scan(unauthenticated_rules(), artifact); s.matches > 0) {
        finding.conclusion = Privilege::None;
        finding.confidence = confidence_for(s.matches);
        finding.evidence = std::move(s.evidence);
    } else if (Scan a = scan(admin_rules(), artifact); a.matches > 0) {
        finding.conclusion = Privilege::Admin;
        finding.confidence = confidence_for(a.matches);
        finding.evidence = std::move(a.evidence);
    } else if (Scan u = scan(user_rules(), artifact); u.matches > 0) {
        finding.conclusion = Privilege::User;
        finding.confidence = confidence_for(u.matches);
        finding.evidence = std::move(u.evidence);
    } else {
        finding.conclusion = Privilege::None;
        finding.confidence = 3;
    }
    return finding;
}

SubFeatureFinding availability_finding(const PreparedArtifact& artifact) {
    SubFeatureFinding finding;
    finding.subfeature = SubFeature::Availability;
    for (const auto& f : artifact.files) {
        if (artifact.is_source(f.source) && !f.text.empty()) {
            finding.evidence.push_back({f.source, 1, "Exploit source code is included"});
            if (finding.evidence.size() == kMaxEvidence) {
                break;
            }
        }
    }
    finding.conclusion = !finding.evidence.empty();
    finding.confidence = finding.evidence.empty() ? 4 : 5;
    return finding;
}

// Document triage -----------------------------------------------------------

bool has_code_signal(std::string_view text) {
    static const std::regex code(
        R"(^\s*(\$ |# |>>> |```|pip3? install\b|git clone\b|python3? |curl |wget |docker |\./|import |from \S+ import |def |class |#include|function |const |let |var |sudo |msfconsole|use exploit/))",
        std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    static const std::regex setup(
        R"(\b(steps to reproduce|usage:|installation|set ?up the|run the (exploit|script)|proof of concept)\b)",
        std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    bool found = false;
    for_each_line(text, [&](std::uint32_t, std::string_view line) {
        found = found || std::regex_search(line.begin(), line.end(), code);
    });
    const std::string s(text);
    return found || std::regex_search(s, setup);
}

bool looks_like_cve_summary(std::string_view text) {
    static const std::regex summary(
        R"(\b(allows? (remote |local )?(attackers?|users?) to|cvss|nvd|base score|published date|cwe-\d+)\b)",
        std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    const std::string s(text);
    return std::regex_search(s, summary);
}

class RulesBackend final : public AnalyzerBackend {
public:
    std::string_view name() const override { return "rules"; }

    std::string analyze(const FindingTask& task) override {
        const PreparedArtifact& artifact = task.artifact;
        switch (task.subfeature) {
        case SubFeature::PrivilegeRequired:
            return serialize_finding(privilege_finding(artifact));
        case SubFeature::Relevance:
            return serialize_finding(boolean_finding(SubFeature::Relevance, scan_relevance(artifact, task.context)));
        case SubFeature::Availability:
            return serialize_finding(availability_finding(artifact));
        default:
            return serialize_finding(
                boolean_finding(task.subfeature, scan(tables().at(task.subfeature), artifact)));
        }
    }

    std::string classify_document(const DocumentTask& task) override {
        const std::string_view text = task.document.text;
        bool keep = false;
        std::string reason;
        if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
            reason = "document is empty";
        } else if (has_code_signal(text)) {
            keep = true;
            reason = "contains code or setup instructions";
        } else if (looks_like_cve_summary(text)) {
            reason = "restates a vulnerability database summary";
        } else {
            reason = "no exploitation detail";
        }
        return nlohmann::json{{"keep", keep}, {"reason", reason}}.dump();
    }
};

} // namespace

std::unique_ptr<AnalyzerBackend> make_rules_backend() {
    tables(); // compile the tables before any concurrent use
    return std::make_unique<RulesBackend>();
}

} // namespace aeas
