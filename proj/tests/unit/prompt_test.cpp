#include "aeas/analyzer.hpp"
#include "aeas/corpus.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>

namespace aeas {
namespace {

const Timestamp kIngest = *parse_rfc3339("2025-06-01T00:00:00Z");

PreparedArtifact fixture_artifact(const std::string& cve, const std::string& id) {
    static const Corpus corpus = load_corpus(test::fixtures_dir() / "corpus", kIngest);
    const VulnerabilityRecord* rec = find_record(corpus, cve);
    EXPECT_NE(rec, nullptr);
    const ExploitArtifact* art = rec->find_artifact(id);
    EXPECT_NE(art, nullptr);
    auto rules = make_rules_backend();
    return prepare_artifact(*art, *rules, FilterConfig{});
}

std::vector<Chunk> snippets_for(SubFeature f, const PreparedArtifact& a, const AnalyzerConfig& cfg = {}) {
    std::vector<SourceDocument> sources = a.files;
    sources.insert(sources.end(), a.docs.begin(), a.docs.end());
    const LexicalIndex index(chunk_documents(sources, cfg.chunk_words, cfg.chunk_overlap));
    std::vector<Chunk> out;
    for (const auto& hit : index.search(retrieval_query(f), cfg.snippets_per_prompt)) {
        out.push_back(index.chunks()[hit.chunk]);
    }
    return out;
}

std::size_t at(const std::string& text, const std::string& needle) {
    const auto pos = text.find(needle);
    EXPECT_NE(pos, std::string::npos) << "missing: " << needle;
    return pos;
}

TEST(Prompt, SectionsAppearInOrderForEverySubFeature) {
    const auto artifact = fixture_artifact("CVE-2022-38112", "mailvault-authrce");
    const AnalysisContext ctx{"CVE-2022-38112", "Mailvault"};
    for (SubFeature f : kAllSubFeatures) {
        const auto snippets = snippets_for(f, artifact);
        const std::string p = build_prompt(f, ctx, artifact, snippets);
        const auto role = at(p, "### Role-play");
        const auto cot = at(p, "### CoT");
        const auto rag = at(p, "### RAG");
        const auto out = at(p, "### Structured Output");
        EXPECT_LT(role, cot);
        EXPECT_LT(cot, rag);
        EXPECT_LT(rag, out);
        EXPECT_NE(p.find("Sub-feature: " + std::string(to_string(f)) + " ("), std::string::npos);
        const std::string schema = p.substr(out);
        EXPECT_NE(schema.find("conclusion"), std::string::npos);
        EXPECT_NE(schema.find("confidence"), std::string::npos);
        EXPECT_NE(schema.find("file_analysis"), std::string::npos);
        EXPECT_NE(p.find("mailvault_exploit.py"), std::string::npos);
    }
}

TEST(Prompt, ExampleReplyParsesForItsSubFeature) {
    const auto artifact = fixture_artifact("CVE-2022-38112", "mailvault-authrce");
    const AnalysisContext ctx{"CVE-2022-38112", "Mailvault"};
    for (SubFeature f : kAllSubFeatures) {
        const PromptSpec spec = prompt_spec(f, ctx, artifact, {});
        const SubFeatureFinding parsed = parse_finding(spec.output_example, f);
        EXPECT_EQ(parsed.subfeature, f);
        EXPECT_NO_THROW(validate_evidence(parsed, artifact)) << to_string(f);
    }
}

TEST(Prompt, EmptyRetrievalSaysSo) {
    const auto artifact = fixture_artifact("CVE-2022-38112", "mailvault-authrce");
    const std::string p = build_prompt(SubFeature::Evasion, {"CVE-2022-38112", "Mailvault"}, artifact, {});
    const std::string rag = p.substr(at(p, "### RAG"), at(p, "### Structured Output") - at(p, "### RAG"));
    EXPECT_NE(rag.find("no additional context"), std::string::npos);
}

TEST(Prompt, SnippetsAreNumberedWithTheirSource) {
    PreparedArtifact a;
    a.artifact_id = "x";
    a.repo_id = "o/x";
    a.files.push_back({"run.py", "import os\nos.system('id')\n"});
    Chunk c;
    c.source = "run.py";
    c.first_line = 2;
    c.text = "os.system('id')";
    const std::vector<Chunk> snippets{c};
    const std::string p = build_prompt(SubFeature::CodeExec, {"CVE-2024-0001", "App"}, a, snippets);
    EXPECT_NE(p.find("--- [1] run.py (from line 2) ---\nos.system('id')"), std::string::npos);
}

TEST(Prompt, RenderRejectsEmptySections) {
    PromptSpec spec;
    spec.role_preamble = "r";
    spec.cot_steps = {"s"};
    spec.output_schema = "{}";
    EXPECT_THROW(spec.render(), Error);
    spec.output_example = "{}";
    EXPECT_NO_THROW(spec.render());
}

TEST(Prompt, MatchesGoldenText) {
    const auto artifact = fixture_artifact("CVE-2022-38112", "mailvault-authrce");
    const AnalysisContext ctx{"CVE-2022-38112", "Mailvault"};
    const auto snippets = snippets_for(SubFeature::InfoDependency, artifact);
    const std::string p = build_prompt(SubFeature::InfoDependency, ctx, artifact, snippets);
    const auto golden = std::filesystem::path(AEAS_GOLDEN_DIR) / "prompt_info_dependency.txt";
    if (std::getenv("AEAS_UPDATE_GOLDEN")) {
        write_file(golden, p);
    }
    ASSERT_TRUE(std::filesystem::exists(golden)) << "run with AEAS_UPDATE_GOLDEN=1 to create " << golden;
    EXPECT_EQ(p, read_file(golden));
}

TEST(DocumentPrompt, ContainsTheDocumentAndSchema) {
    const SourceDocument doc{"https://example.test/post", "Steps to reproduce:\n$ curl -X POST http://host/"};
    const std::string p = build_document_prompt(doc, {});
    EXPECT_NE(p.find("Source: https://example.test/post"), std::string::npos);
    EXPECT_NE(p.find("$ curl -X POST http://host/"), std::string::npos);
    EXPECT_NE(p.find("\"keep\""), std::string::npos);
    EXPECT_EQ(p.find("[truncated]"), std::string::npos);
}

TEST(DocumentPrompt, TruncatesOnACharacterBoundary) {
    AnalyzerConfig cfg;
    cfg.max_document_chars = 10;
    // Each "é" is two bytes; a cut at byte 10 would land inside the sixth.
    const SourceDocument doc{"d", "aé" + std::string("éééééééé")};
    const std::string p = build_document_prompt(doc, cfg);
    const auto begin = at(p, "----- document -----\n") + 21;
    const auto end = at(p, "\n[truncated]");
    const std::string kept = p.substr(begin, end - begin);
    EXPECT_LE(kept.size(), 10u);
    EXPECT_EQ(utf8_length(kept) * 2 - 1, kept.size());
}

TEST(RetryPrompt, AppendsTheRejection) {
    const std::string r = retry_prompt("base prompt", "confidence 9 out of range");
    EXPECT_EQ(r.rfind("base prompt", 0), 0u);
    EXPECT_NE(r.find("### Correction"), std::string::npos);
    EXPECT_NE(r.find("confidence 9 out of range"), std::string::npos);
}

TEST(RetrievalQuery, NonEmptyAndDistinct) {
    std::set<std::string> seen;
    for (SubFeature f : kAllSubFeatures) {
        const std::string q = retrieval_query(f);
        EXPECT_FALSE(q.empty());
        seen.insert(q);
    }
    EXPECT_EQ(seen.size(), kSubFeatureCount);
}

} // namespace
} // namespace aeas
