#pragma once

#include "aeas/errors.hpp"
#include "aeas/time.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aeas {

enum class FileKind { Source, Readme, Doc, Binary, Media, Config };

std::string_view to_string(FileKind kind);
std::optional<FileKind> file_kind_from_string(std::string_view text);

// Source, readme, doc and config files carry text; binary and media do not.
bool is_textual(FileKind kind);

/// Classifies a repository-relative path by file name and extension.
FileKind infer_file_kind(std::string_view relative_path);

bool is_valid_cve_id(std::string_view id);

struct RepoMeta {
    std::string repo_id;
    std::string description;
    std::uint64_t description_len = 0;
    std::uint64_t issue_count = 0;
    std::vector<std::string> topic_labels;
    std::uint64_t size_bytes = 0;
    std::uint64_t stars = 0;
    std::uint64_t forks = 0;
    Timestamp created_at{};

    bool operator==(const RepoMeta&) const = default;
};

struct ArtifactFile {
    std::string path; // relative to the artifact root, '/' separated
    FileKind kind = FileKind::Source;
    std::optional<std::string> content; // present iff is_textual(kind)

    bool operator==(const ArtifactFile&) const = default;
};

struct WebDocument {
    std::string source_url;
    std::string path; // where the raw page lives inside the artifact directory
    std::string text;

    bool operator==(const WebDocument&) const = default;
};

struct ExploitArtifact {
    std::string artifact_id;
    RepoMeta repo;
    std::vector<ArtifactFile> files;
    std::vector<WebDocument> docs;

    const ArtifactFile* find_file(std::string_view path) const;

    bool operator==(const ExploitArtifact&) const = default;
};

struct VulnerabilityRecord {
    std::string cve_id;
    std::string application;
    Date published{};
    std::optional<double> cvss;
    std::optional<double> epss;
    std::vector<ExploitArtifact> exploits;

    const ExploitArtifact* find_artifact(std::string_view artifact_id) const;

    bool operator==(const VulnerabilityRecord&) const = default;
};

using Corpus = std::vector<VulnerabilityRecord>;

const VulnerabilityRecord* find_record(const Corpus& corpus, std::string_view cve_id);

enum class ObservedMaturity { NonFunctional, DocOnly, PoC, Functional };

std::string_view to_string(ObservedMaturity m);
std::optional<ObservedMaturity> observed_maturity_from_string(std::string_view text);

struct GroundTruthLabel {
    std::string cve_id;
    std::string artifact_id;
    ObservedMaturity maturity_observed = ObservedMaturity::NonFunctional;
    std::optional<double> completion_minutes;
    std::optional<std::uint64_t> error_count;

    bool operator==(const GroundTruthLabel&) const = default;
};

/// Loads `<root>/<CVE-ID>/meta.json` plus `artifacts/<id>/repo.json` and the
/// files beneath each artifact. Records come back sorted by cve_id, artifacts
/// by artifact_id and files by path, independent of directory enumeration
/// order. Throws CorpusError naming the offending file and field.
Corpus load_corpus(const std::filesystem::path& root, Timestamp ingestion_time = now_seconds());

/// Writes the corpus in the layout read by load_corpus.
void write_corpus(const Corpus& corpus, const std::filesystem::path& root);

/// Single artifact directory (`repo.json` plus files); the directory name is the artifact_id.
ExploitArtifact load_artifact_directory(const std::filesystem::path& dir,
                                        Timestamp ingestion_time = now_seconds());
void write_artifact_directory(const ExploitArtifact& artifact, const std::filesystem::path& dir);

/// JSON Lines, one label object per line. Blank lines are skipped.
std::vector<GroundTruthLabel> parse_labels(std::istream& in, const std::filesystem::path& source);
std::vector<GroundTruthLabel> load_labels(const std::filesystem::path& path);

/// Throws CorpusError when a label references an artifact not in the corpus.
void resolve_labels(const std::vector<GroundTruthLabel>& labels, const Corpus& corpus,
                    const std::filesystem::path& source);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::size_t utf8_length(std::string_view text);

} // namespace aeas
