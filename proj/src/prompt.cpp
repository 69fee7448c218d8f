#include "aeas/analyzer.hpp"

#include <algorithm>

#include <sstream>

namespace aeas {

namespace {

struct Guidance {
    const char* question;
    std::array<const char*, 3> steps;
    const char* query;
    const char* conclusion_type;
    const char* example_technique;
};

// Indexed by SubFeature.
const std::array<Guidance, kSubFeatureCount> kGuidance{{
    {"Can the exploit reach the target over a network, without local or physical access?",
     {"Find where the exploit opens connections, sends HTTP requests or names a target host.",
      "Check whether the target must be reached locally (local shell, physical device, same machine).",
      "Answer true only if the attack is delivered over the network."},
     "remote network http https request url host target port socket connect rhost",
     "boolean", "Sends the payload with an HTTP POST to a user-supplied URL"},
    {"Does the exploit need prior knowledge such as credentials, tokens, keys or internal identifiers?",
     {"Look for hardcoded or required usernames, passwords, API tokens, session cookies and keys.",
      "Separate values the exploit obtains by itself from values the operator must already know.",
      "Answer true if any piece of secret or hard-to-obtain information is required."},
     "password passwd credential credentials token api key cookie session username login secret",
     "boolean", "Hardcoded credentials passed to the login endpoint"},
    {"Does the exploit only work under a specific, non-default configuration of the target?",
     {"List the settings, plugins, modules or versions the exploit assumes.",
      "Decide whether those assumptions hold on a default installation.",
      "Answer true if a non-default condition must hold on the target."},
     "requires enabled configured configuration installed plugin module version default setting debug",
     "boolean", "Requires the debug endpoint to be enabled"},
    {"Does success depend on factors the attacker cannot control, such as races or randomness?",
     {"Look for race windows, retries, brute forcing, heap grooming or timing assumptions.",
      "Check whether randomness in the exploit changes the outcome or is cosmetic.",
      "Answer true only if success is probabilistic."},
     "race condition random brute force timing retry attempts reliable spray",
     "boolean", "Loops until a race window is won"},
    {"Does the exploit need a victim to act, for example opening a file or clicking a link?",
     {"Find any step where a person other than the attacker has to do something.",
      "Ignore actions performed by the attacker running the script.",
      "Answer true if a victim action is required."},
     "victim user click open visit upload interaction phishing link email",
     "boolean", "Victim must open the crafted document"},
    {"What level of access does the attacker need on the target before running the exploit?",
     {"Check whether the exploit logs in and with which kind of account.",
      "Distinguish unauthenticated access, ordinary user accounts and administrative accounts.",
      "Answer none, user or admin."},
     "authenticated unauthenticated admin administrator root privilege login account user role",
     "one of none, user, admin", "Authenticates as an ordinary user before the request"},
    {"Does the exploit have to evade detection or protection mechanisms?",
     {"Look for obfuscation, encoding of payloads, WAF or antivirus bypass tricks.",
      "Check whether these steps are needed for the exploit to succeed.",
      "Answer true if evasion is part of the attack."},
     "obfuscate obfuscation evade evasion waf antivirus edr encode encoded bypass detection",
     "boolean", "Base64-encodes the payload to slip past the WAF"},
    {"Can the exploit execute attacker-chosen code or commands on the target?",
     {"Follow the payload to where it is evaluated or executed on the target.",
      "Check whether the attacker controls the executed code or command.",
      "Answer true if arbitrary code or command execution is achieved."},
     "execute execution command code rce shell reverse payload eval system",
     "boolean", "Injects an OS command through the vulnerable parameter"},
    {"Does the exploit raise the attacker's privileges beyond what they started with?",
     {"Identify the privileges before and after the exploit runs.",
      "Look for account creation, role changes, token theft or root shells.",
      "Answer true if privileges are escalated."},
     "privilege escalation escalate root admin administrator account token role elevate",
     "boolean", "Creates a new administrator account"},
    {"Does the exploit expose data the attacker should not be able to read?",
     {"Look for file reads, path traversal, memory disclosure or database dumps.",
      "Check whether the disclosed data is sensitive.",
      "Answer true if unauthorized information is disclosed."},
     "leak disclosure read file traversal passwd dump sensitive memory information",
     "boolean", "Reads /etc/passwd through path traversal"},
    {"Does the exploit circumvent an authentication or security control?",
     {"Find the control the exploit sidesteps (login, CSRF token, 2FA, access checks).",
      "Confirm the control is skipped rather than satisfied with valid credentials.",
      "Answer true if a security mechanism is bypassed."},
     "bypass authentication auth login csrf 2fa access control check skip",
     "boolean", "Skips authentication by calling the internal endpoint directly"},
    {"Can the exploit make the target unavailable, for example by crashing it?",
     {"Look for crashes, resource exhaustion, infinite loops or service restarts.",
      "Check whether the outage is a goal or a side effect.",
      "Answer true if denial of service is possible."},
     "denial service dos crash exhaustion hang loop restart outage memory cpu",
     "boolean", "Sends an oversized header that crashes the worker"},
    {"Does the material actually target this vulnerability and at least verify it exists?",
     {"Compare the code and documentation against the CVE identifier and affected application.",
      "Check that the described behaviour matches the vulnerability rather than a different bug.",
      "Answer true if the artifact is about this vulnerability."},
     "cve vulnerability vulnerable exploit poc proof concept affected version application check",
     "boolean", "Script header names the CVE and the affected application"},
    {"Is usable exploit code present in the artifact, rather than only a description?",
     {"Check whether runnable source code is included.",
      "Ignore code that is only quoted in a write-up without being complete.",
      "Answer true if exploit code is available."},
     "import def main function class usage run python script code",
     "boolean", "Complete exploit script is included"},
    {"Can the operator adapt the exploit, for example by choosing the target, command or payload?",
     {"Look for command-line arguments, configuration variables or prompts.",
      "Check whether targets and payloads are parameters or hardcoded.",
      "Answer true if the exploit can be customized."},
     "argparse argv argument option target url host port payload command parameter",
     "boolean", "Target URL and command are taken from argparse options"},
    {"Does the exploit achieve a goal beyond verifying the vulnerability?",
     {"Determine what the exploit does once the vulnerability is triggered.",
      "Separate detection-only checks from attacks that deliver an outcome (shell, account, data).",
      "Answer true if the exploit achieves an attack goal."},
     "shell payload execute upload exploit account dump command output result",
     "boolean", "Spawns a reverse shell after triggering the bug"},
}};

const Guidance& guidance(SubFeature f) {
    return kGuidance[static_cast<std::size_t>(f)];
}

std::string schema_text(SubFeature f) {
    std::ostringstream out;
    out << "{\n"
        << "  \"file_analysis\": [ {\"file\": string, \"line\": integer >= 1, \"technique\": string} ],\n"
        << "  \"conclusion\": " << guidance(f).conclusion_type << ",\n"
        << "  \"confidence\": integer from 1 (guess) to 5 (certain)\n"
        << "}\n"
        << "Every \"file\" must be one of the artifact files listed above. No other fields are allowed.";
    return out.str();
}

std::string example_text(SubFeature f, const PreparedArtifact& artifact) {
    std::string file = "exploit.py";
    std::uint32_t line = 12;
    const SourceDocument* cited = nullptr;
    for (const auto& doc : artifact.files) {
        if (artifact.is_source(doc.source)) {
            cited = &doc;
            break;
        }
    }
    if (!cited && !artifact.files.empty()) {
        cited = &artifact.files.front();
    } else if (!cited && !artifact.docs.empty()) {
        cited = &artifact.docs.front();
    }
    if (cited) {
        // Keep the sample citation inside the file so it is a valid reply.
        const auto lines = static_cast<std::uint32_t>(
            std::count(cited->text.begin(), cited->text.end(), '\n') + (!cited->text.empty() && cited->text.back() != '\n'));
        file = cited->source;
        line = std::clamp<std::uint32_t>(lines, 1, line);
    }
    SubFeatureFinding example;
    example.subfeature = f;
    example.evidence.push_back({file, line, guidance(f).example_technique});
    if (f == SubFeature::PrivilegeRequired) {
        example.conclusion = Privilege::User;
    } else {
        example.conclusion = true;
    }
    example.confidence = 4;
    return serialize_finding(example);
}

} // namespace

bool PreparedArtifact::references(std::string_view source) const {
    return find(source) != nullptr;
}

const SourceDocument* PreparedArtifact::find(std::string_view source) const {
    for (const auto& f : files) {
        if (f.source == source) {
            return &f;
        }
    }
    for (const auto& d : docs) {
        if (d.source == source) {
            return &d;
        }
    }
    return nullptr;
}

std::string PromptSpec::render() const {
    if (role_preamble.empty() || cot_steps.empty() || output_schema.empty() || output_example.empty()) {
        throw Error("prompt spec has an empty section");
    }
    std::ostringstream out;
    out << "### Role-play\n" << role_preamble << "\n";
    if (!task_header.empty()) {
        out << "\n" << task_header << "\n";
    }
    out << "\n### CoT\nWork through these steps before answering:\n";
    for (std::size_t i = 0; i < cot_steps.size(); ++i) {
        out << (i + 1) << ". " << cot_steps[i] << "\n";
    }
    out << "\n### RAG\n";
    if (rag_snippets.empty()) {
        out << "(no additional context was retrieved for this artifact)\n";
    } else {
        out << "Excerpts from the artifact, most relevant first:\n";
        for (std::size_t i = 0; i < rag_snippets.size(); ++i) {
            out << "\n" << rag_snippets[i] << "\n";
        }
    }
    out << "\n### Structured Output\n"
        << "Reply with one JSON object and nothing else, using exactly these fields:\n"
        << output_schema << "\n"
        << "Example reply:\n"
        << output_example << "\n";
    return out.str();
}

std::string retrieval_query(SubFeature f) {
    return guidance(f).query;
}

PromptSpec prompt_spec(SubFeature f, const AnalysisContext& ctx, const PreparedArtifact& artifact,
                       std::span<const Chunk> snippets) {
    const Guidance& g = guidance(f);
    PromptSpec spec;
    spec.role_preamble =
        "Act as a senior penetration tester who reviews public exploit code for a red team. "
        "Base every statement on the artifact content below and cite file and line.";

    std::ostringstream task;
    task << "Vulnerability: " << ctx.cve_id << " in " << ctx.application << "\n"
         << "Artifact: " << artifact.artifact_id << " (" << artifact.repo_id << ")\n"
         << "Sub-feature: " << to_string(f) << " (" << display_name(f) << ")\n"
         << "Question: " << g.question << "\n"
         << "Artifact files:";
    if (artifact.files.empty() && artifact.docs.empty()) {
        task << " (none)";
    }
    for (const auto& file : artifact.files) {
        task << "\n- " << file.source;
    }
    for (const auto& doc : artifact.docs) {
        task << "\n- " << doc.source << " (web document)";
    }
    spec.task_header = task.str();

    spec.cot_steps.assign(g.steps.begin(), g.steps.end());
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        const Chunk& c = snippets[i];
        std::ostringstream s;
        s << "--- [" << (i + 1) << "] " << c.source << " (from line " << c.first_line << ") ---\n"
          << c.text;
        spec.rag_snippets.push_back(s.str());
    }
    spec.output_schema = schema_text(f);
    spec.output_example = example_text(f, artifact);
    return spec;
}

std::string build_prompt(SubFeature f, const AnalysisContext& ctx, const PreparedArtifact& artifact,
                         std::span<const Chunk> snippets) {
    return prompt_spec(f, ctx, artifact, snippets).render();
}

std::string build_document_prompt(const SourceDocument& doc, const AnalyzerConfig& cfg) {
    std::string text = doc.text;
    if (text.size() > cfg.max_document_chars) {
        text.resize(cfg.max_document_chars);
        // Do not leave a split UTF-8 sequence at the cut.
        while (!text.empty() && (static_cast<unsigned char>(text.back()) & 0xC0) == 0x80) {
            text.pop_back();
        }
        if (!text.empty() && static_cast<unsigned char>(text.back()) >= 0xC0) {
            text.pop_back();
        }
        text += "\n[truncated]";
    }
    std::ostringstream out;
    out << "### Role-play\n"
        << "Act as a senior penetration tester triaging web pages collected for an exploit.\n\n"
        << "### Task\n"
        << "Decide whether the document below helps someone reproduce the exploit. Keep pages "
           "with exploit code, commands or setup instructions. Drop pages that only restate a "
           "vulnerability database entry or carry no exploitation detail.\n\n"
        << "Source: " << doc.source << "\n"
        << "----- document -----\n"
        << text << "\n"
        << "----- end -----\n\n"
        << "### Structured Output\n"
        << "Reply with one JSON object and nothing else: {\"keep\": boolean, \"reason\": string}\n"
        << "Example reply:\n"
        << "{\"keep\":true,\"reason\":\"contains the exploit invocation and setup steps\"}\n";
    return out.str();
}

std::string retry_prompt(std::string_view prompt, std::string_view error) {
    std::string out(prompt);
    out += "\n### Correction\nYour previous reply was rejected: ";
    out += error;
    out += "\nReply again with only the JSON object described above.\n";
    return out;
}

} // namespace aeas
