#pragma once

#include "aeas/corpus.hpp"
#include "aeas/errors.hpp"
#include "aeas/prefilter.hpp"
#include "aeas/retrieval.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aeas {

// Every sub-feature the analyzer extracts. Popularity inputs are counted
// from repository metadata rather than extracted.
enum class SubFeature {
    IsRemote,
    InfoDependency,
    AttackCondition,
    ProbabilityDep,
    UserInteraction,
    PrivilegeRequired,
    Evasion,
    CodeExec,
    PrivEscalation,
    InfoLeak,
    Bypass,
    Dos,
    Relevance,
    Availability,
    Flexibility,
    Functionality,
};

inline constexpr std::size_t kSubFeatureCount = 16;

inline constexpr std::array<SubFeature, kSubFeatureCount> kAllSubFeatures{
    SubFeature::IsRemote,        SubFeature::InfoDependency, SubFeature::AttackCondition,
    SubFeature::ProbabilityDep,  SubFeature::UserInteraction, SubFeature::PrivilegeRequired,
    SubFeature::Evasion,         SubFeature::CodeExec,       SubFeature::PrivEscalation,
    SubFeature::InfoLeak,        SubFeature::Bypass,         SubFeature::Dos,
    SubFeature::Relevance,       SubFeature::Availability,   SubFeature::Flexibility,
    SubFeature::Functionality};

// The six attack-complexity prerequisites, in weight order.
inline constexpr std::array<SubFeature, 6> kComplexitySubFeatures{
    SubFeature::InfoDependency, SubFeature::AttackCondition, SubFeature::ProbabilityDep,
    SubFeature::UserInteraction, SubFeature::PrivilegeRequired, SubFeature::Evasion};

std::string_view to_string(SubFeature f);
std::optional<SubFeature> subfeature_from_string(std::string_view text);
std::string_view display_name(SubFeature f);

enum class Privilege { None, User, Admin };

std::string_view to_string(Privilege p);

using Conclusion = std::variant<bool, Privilege>;

struct Evidence {
    std::string file;
    std::uint32_t line = 1;
    std::string technique;

    bool operator==(const Evidence&) const = default;
};

struct SubFeatureFinding {
    SubFeature subfeature = SubFeature::IsRemote;
    std::vector<Evidence> evidence;
    Conclusion conclusion = false;
    int confidence = 1; // 1..5

    bool operator==(const SubFeatureFinding&) const = default;
};

/// The value reported when extraction fails: the least actionable reading.
/// Complexity prerequisites are assumed present, capabilities absent,
/// privilege administrative. Confidence 1, no evidence.
SubFeatureFinding conservative_default(SubFeature f);

/// One finding per sub-feature, indexed by SubFeature.
struct FeatureVector {
    std::array<SubFeatureFinding, kSubFeatureCount> findings{};
    std::array<bool, kSubFeatureCount> defaulted{};

    FeatureVector();

    const SubFeatureFinding& operator[](SubFeature f) const {
        return findings[static_cast<std::size_t>(f)];
    }
    SubFeatureFinding& operator[](SubFeature f) { return findings[static_cast<std::size_t>(f)]; }

    /// Boolean conclusion; throws for PrivilegeRequired.
    bool flag(SubFeature f) const;
    Privilege privilege() const;

    /// Exactly one well-typed finding per sub-feature with confidence in range.
    bool complete() const;

    bool operator==(const FeatureVector&) const = default;
};

// ---------------------------------------------------------------------------
// Structured-output errors. All of them mark a retry-eligible backend reply.

class FindingError : public Error {
public:
    using Error::Error;
};

class ParseError : public FindingError {
public:
    using FindingError::FindingError;
};

class RangeError : public FindingError {
public:
    using FindingError::FindingError;
};

class SchemaError : public FindingError {
public:
    using FindingError::FindingError;
};

/// Strict parse of a backend reply: an object with exactly `file_analysis`,
/// `conclusion` and `confidence`. A single surrounding ``` fence is
/// tolerated. The conclusion is coerced to the sub-feature's type.
SubFeatureFinding parse_finding(std::string_view raw, SubFeature subfeature);

/// Compact JSON in the same schema parse_finding accepts.
std::string serialize_finding(const SubFeatureFinding& finding);

/// Findings file payload (one artifact).
std::string serialize_feature_vector(const FeatureVector& fv, std::string_view cve_id,
                                     std::string_view artifact_id, std::string_view backend);
FeatureVector parse_feature_vector(std::string_view text);

// ---------------------------------------------------------------------------
// Analysis inputs

struct AnalysisContext {
    std::string cve_id;
    std::string application;
};

/// Artifact content after file filtering and document cleanup.
struct PreparedArtifact {
    std::string artifact_id;
    std::string repo_id;
    std::vector<SourceDocument> files; // kept textual files
    std::vector<SourceDocument> docs;  // cleaned and retained web documents
    std::set<std::string, std::less<>> source_paths; // files of kind source

    bool empty() const { return files.empty() && docs.empty(); }
    bool references(std::string_view source) const;
    const SourceDocument* find(std::string_view source) const;
    bool is_source(std::string_view path) const { return source_paths.contains(path); }
};

struct FindingTask {
    SubFeature subfeature;
    std::string_view prompt;
    const AnalysisContext& context;
    const PreparedArtifact& artifact;
    int attempt = 0;
};

struct DocumentTask {
    std::string_view prompt;
    const SourceDocument& document;
    int attempt = 0;
};

/// Produces raw replies; the analyzer parses and validates them. Must be
/// callable from several threads at once.
class AnalyzerBackend {
public:
    virtual ~AnalyzerBackend() = default;
    virtual std::string_view name() const = 0;
    virtual std::string analyze(const FindingTask& task) = 0;
    /// Reply schema: {"keep": bool, "reason": string}.
    virtual std::string classify_document(const DocumentTask& task) = 0;
};

/// Deterministic keyword/pattern backend. Replies are JSON in the
/// parse_finding schema; it never fails.
std::unique_ptr<AnalyzerBackend> make_rules_backend();

class LlmClient;

struct LiveBackendConfig {
    std::string model_name = "gpt-4o";
    std::uint32_t max_output_tokens = 1024;
    double temperature = 0.0;
};

/// Sends each prompt through the chat-completion client (and its cache).
std::unique_ptr<AnalyzerBackend> make_live_backend(std::shared_ptr<LlmClient> client,
                                                   LiveBackendConfig cfg = {});

struct AnalyzerConfig {
    int retries = 2; // re-prompts after the first failed reply
    std::size_t snippets_per_prompt = 4;
    std::size_t chunk_words = 400;
    std::size_t chunk_overlap = 50;
    std::size_t max_document_chars = 12000;
};

// ---------------------------------------------------------------------------
// Prompting

struct PromptSpec {
    std::string role_preamble;
    std::vector<std::string> cot_steps;
    std::vector<std::string> rag_snippets;
    std::string output_schema;
    std::string output_example;
    std::string task_header;

    std::string render() const;
};

/// Terms used to retrieve context for a sub-feature.
std::string retrieval_query(SubFeature f);

PromptSpec prompt_spec(SubFeature f, const AnalysisContext& ctx, const PreparedArtifact& artifact,
                       std::span<const Chunk> snippets);

/// Role-play, CoT, RAG and Structured Output sections, in that order.
std::string build_prompt(SubFeature f, const AnalysisContext& ctx, const PreparedArtifact& artifact,
                         std::span<const Chunk> snippets);

std::string build_document_prompt(const SourceDocument& doc, const AnalyzerConfig& cfg);

/// Appends the rejection reason to a prompt for a re-ask.
std::string retry_prompt(std::string_view prompt, std::string_view error);

// ---------------------------------------------------------------------------
// Operations

enum class DocumentDecision { Keep, Drop };

/// Backend-judged noise filter; unparseable replies after retries drop the document.
DocumentDecision filter_document(const SourceDocument& doc, AnalyzerBackend& backend,
                                 const AnalyzerConfig& cfg = {});

/// Applies file_filter to files and extract_main_content + filter_document to web documents.
PreparedArtifact prepare_artifact(const ExploitArtifact& artifact, AnalyzerBackend& backend,
                                  const FilterConfig& filter, const AnalyzerConfig& cfg = {});

struct ExtractionStats {
    std::size_t backend_calls = 0;
    std::size_t failed_replies = 0;
    std::size_t defaulted = 0;
};

/// One finding per sub-feature. Backend failures are retried `cfg.retries`
/// times, then replaced by conservative_default. Never throws for backend
/// trouble.
FeatureVector extract_features(const PreparedArtifact& artifact, const AnalysisContext& ctx,
                               AnalyzerBackend& backend, const AnalyzerConfig& cfg = {},
                               ExtractionStats* stats = nullptr);

/// Throws SchemaError if evidence names a file the artifact does not hold.
void validate_evidence(const SubFeatureFinding& finding, const PreparedArtifact& artifact);

} // namespace aeas
