#include "aeas/analyzer.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>

namespace aeas {

using nlohmann::json;

namespace {

bool blank(std::string_view text) {
    return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

std::size_t line_count(std::string_view text) {
    if (text.empty()) {
        return 0;
    }
    const auto n = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    return text.back() == '\n' ? n : n + 1;
}

DocumentDecision parse_document_reply(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("reply is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw SchemaError("reply must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "keep" && key != "reason") {
            throw SchemaError("unknown field '" + key + "'");
        }
    }
    if (!j.contains("keep") || !j["keep"].is_boolean()) {
        throw SchemaError("'keep' must be a boolean");
    }
    if (j.contains("reason") && !j["reason"].is_string()) {
        throw SchemaError("'reason' must be a string");
    }
    return j["keep"].get<bool>() ? DocumentDecision::Keep : DocumentDecision::Drop;
}

std::vector<SourceDocument> all_sources(const PreparedArtifact& artifact) {
    std::vector<SourceDocument> out = artifact.files;
    out.insert(out.end(), artifact.docs.begin(), artifact.docs.end());
    return out;
}

} // namespace

void validate_evidence(const SubFeatureFinding& finding, const PreparedArtifact& artifact) {
    for (const auto& e : finding.evidence) {
        const SourceDocument* doc = artifact.find(e.file);
        if (!doc) {
            throw SchemaError("evidence cites '" + e.file + "', which is not in the artifact");
        }
        if (e.line > line_count(doc->text)) {
            throw RangeError("evidence cites " + e.file + ":" + std::to_string(e.line) +
                             " past the end of the file");
        }
    }
}

DocumentDecision filter_document(const SourceDocument& doc, AnalyzerBackend& backend,
                                 const AnalyzerConfig& cfg) {
    if (blank(doc.text)) {
        return DocumentDecision::Drop;
    }
    const std::string prompt = build_document_prompt(doc, cfg);
    std::string current = prompt;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        try {
            return parse_document_reply(backend.classify_document({current, doc, attempt}));
        } catch (const FindingError& e) {
            spdlog::warn("document filter reply for {} rejected (attempt {}): {}", doc.source,
                         attempt + 1, e.what());
            current = retry_prompt(prompt, e.what());
        } catch (const std::exception& e) {
            spdlog::warn("document filter for {} failed (attempt {}): {}", doc.source, attempt + 1,
                         e.what());
        }
    }
    spdlog::warn("dropping {} after {} failed document filter attempts", doc.source, cfg.retries + 1);
    return DocumentDecision::Drop;
}

PreparedArtifact prepare_artifact(const ExploitArtifact& artifact, AnalyzerBackend& backend,
                                  const FilterConfig& filter, const AnalyzerConfig& cfg) {
    PreparedArtifact out;
    out.artifact_id = artifact.artifact_id;
    out.repo_id = artifact.repo.repo_id;
    for (const auto& file : artifact.files) {
        if (!file.content || file_filter(file.path, file.kind, filter) == FileDecision::Drop) {
            continue;
        }
        out.files.push_back({file.path, *file.content});
        if (file.kind == FileKind::Source) {
            out.source_paths.insert(file.path);
        }
    }
    for (const auto& doc : artifact.docs) {
        SourceDocument cleaned{doc.path, extract_main_content(doc.text)};
        if (filter_document(cleaned, backend, cfg) == DocumentDecision::Keep) {
            out.docs.push_back(std::move(cleaned));
        } else {
            spdlog::debug("dropped document {} ({})", doc.path, doc.source_url);
        }
    }
    return out;
}

FeatureVector extract_features(const PreparedArtifact& artifact, const AnalysisContext& ctx,
                               AnalyzerBackend& backend, const AnalyzerConfig& cfg,
                               ExtractionStats* stats) {
    ExtractionStats local;
    FeatureVector fv;
    if (artifact.empty()) {
        // Nothing to read: relevance cannot be established and everything
        // else stays at its conservative value.
        local.defaulted = kSubFeatureCount;
        if (stats) {
            *stats = local;
        }
        return fv;
    }

    const std::vector<SourceDocument> sources = all_sources(artifact);
    const LexicalIndex index(chunk_documents(sources, cfg.chunk_words, cfg.chunk_overlap));

    for (SubFeature f : kAllSubFeatures) {
        std::vector<Chunk> snippets;
        for (const auto& hit : index.search(retrieval_query(f), cfg.snippets_per_prompt)) {
            snippets.push_back(index.chunks()[hit.chunk]);
        }
        const std::string prompt = build_prompt(f, ctx, artifact, snippets);
        std::string current = prompt;
        bool ok = false;
        for (int attempt = 0; attempt <= cfg.retries && !ok; ++attempt) {
            ++local.backend_calls;
            try {
                const std::string reply = backend.analyze({f, current, ctx, artifact, attempt});
                SubFeatureFinding finding = parse_finding(reply, f);
                validate_evidence(finding, artifact);
                fv[f] = std::move(finding);
                fv.defaulted[static_cast<std::size_t>(f)] = false;
                ok = true;
            } catch (const FindingError& e) {
                ++local.failed_replies;
                spdlog::warn("{} {}: {} reply rejected (attempt {}): {}", ctx.cve_id, artifact.artifact_id,
                             to_string(f), attempt + 1, e.what());
                current = retry_prompt(prompt, e.what());
            } catch (const std::exception& e) {
                ++local.failed_replies;
                spdlog::warn("{} {}: {} backend call failed (attempt {}): {}", ctx.cve_id,
                             artifact.artifact_id, to_string(f), attempt + 1, e.what());
            }
        }
        if (!ok) {
            ++local.defaulted;
            spdlog::warn("{} {}: {} falls back to the conservative default", ctx.cve_id,
                         artifact.artifact_id, to_string(f));
        }
    }
    if (stats) {
        *stats = local;
    }
    return fv;
}

} // namespace aeas
