#include "aeas/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace aeas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array kKindNames{"source", "readme", "doc", "binary", "media", "config"};
constexpr std::array kMaturityNames{"NonFunctional", "DocOnly", "PoC", "Functional"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

const std::set<std::string, std::less<>> kSourceExt{
    ".py", ".rb", ".pl", ".pm", ".php", ".js", ".mjs", ".ts", ".go", ".rs", ".c", ".h",
    ".cc", ".cpp", ".cxx", ".hpp", ".hh", ".java", ".kt", ".scala", ".cs", ".vb", ".vbs",
    ".sh", ".bash", ".zsh", ".ps1", ".psm1", ".bat", ".cmd", ".lua", ".swift", ".nse",
    ".erl", ".ex", ".exs", ".r", ".jl", ".groovy", ".asm", ".s", ".sql"};
const std::set<std::string, std::less<>> kDocExt{".md", ".markdown", ".txt", ".rst", ".adoc",
                                                 ".html", ".htm", ".org"};
const std::set<std::string, std::less<>> kMediaExt{".png", ".jpg", ".jpeg", ".gif", ".bmp",
                                                   ".ico", ".svg", ".webp", ".tif", ".tiff",
                                                   ".mp4", ".avi", ".mov", ".mkv", ".webm",
                                                   ".mp3", ".wav", ".ogg", ".flac"};
const std::set<std::string, std::less<>> kConfigExt{
    ".xml", ".json", ".yaml", ".yml", ".toml", ".ini", ".cfg", ".conf", ".properties",
    ".lock", ".plist", ".env", ".gradle", ".csproj", ".sln", ".iml"};
const std::set<std::string, std::less<>> kConfigNames{
    "dockerfile", "makefile", "cmakelists.txt", "requirements.txt", ".gitignore",
    ".gitattributes", "docker-compose.yml", "package-lock.json", "go.sum", "go.mod"};

[[noreturn]] void fail(const fs::path& file, const std::string& field, const std::string& msg) {
    throw CorpusError(file, field, msg);
}

json parse_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "file", "cannot open");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(path, "json", e.what());
    }
}

std::string require_string(const json& j, const char* key, const fs::path& file) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        fail(file, key, "missing or not a string");
    }
    return it->get<std::string>();
}

std::uint64_t count_field(const json& j, const char* key, const fs::path& file,
                          std::uint64_t fallback = 0) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    if (!it->is_number_unsigned()) {
        fail(file, key, "must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

std::optional<double> ranged_real(const json& j, const char* key, double lo, double hi,
                                  const fs::path& file) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number()) {
        fail(file, key, "must be a number");
    }
    const double v = it->get<double>();
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "value " << v << " outside [" << lo << ", " << hi << "]";
        fail(file, key, os.str());
    }
    return v;
}

std::string generic_relative(const fs::path& p, const fs::path& base) {
    return p.lexically_relative(base).generic_string();
}

ExploitArtifact load_artifact(const fs::path& dir, Timestamp ingestion_time) {
    const fs::path repo_file = dir / "repo.json";
    if (!fs::is_regular_file(repo_file)) {
        fail(repo_file, "repo.json", "missing");
    }
    const json j = parse_json_file(repo_file);
    if (!j.is_object()) {
        fail(repo_file, "repo.json", "must be a JSON object");
    }

    ExploitArtifact artifact;
    artifact.artifact_id = dir.filename().string();
    if (const auto it = j.find("artifact_id"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != artifact.artifact_id) {
            fail(repo_file, "artifact_id", "must match the artifact directory name");
        }
    }

    RepoMeta& repo = artifact.repo;
    repo.repo_id = require_string(j, "repo_id", repo_file);
    if (const auto it = j.find("description"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) {
            fail(repo_file, "description", "must be a string");
        }
        repo.description = it->get<std::string>();
    }
    repo.description_len = count_field(j, "description_len", repo_file, utf8_length(repo.description));
    repo.issue_count = count_field(j, "issue_count", repo_file);
    repo.size_bytes = count_field(j, "size_bytes", repo_file);
    repo.stars = count_field(j, "stars", repo_file);
    repo.forks = count_field(j, "forks", repo_file);
    if (const auto it = j.find("topics"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            fail(repo_file, "topics", "must be an array of strings");
        }
        for (const auto& t : *it) {
            if (!t.is_string()) {
                fail(repo_file, "topics", "must be an array of strings");
            }
            repo.topic_labels.push_back(t.get<std::string>());
        }
    }
    const auto created = parse_rfc3339(require_string(j, "created_at", repo_file));
    if (!created) {
        fail(repo_file, "created_at", "not an RFC 3339 date-time");
    }
    if (*created > ingestion_time) {
        fail(repo_file, "created_at", "lies after the ingestion time");
    }
    repo.created_at = *created;

    std::map<std::string, FileKind, std::less<>> overrides;
    if (const auto it = j.find("kinds"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) {
            fail(repo_file, "kinds", "must map paths to kind names");
        }
        for (const auto& [path, kind] : it->items()) {
            const auto parsed = kind.is_string() ? file_kind_from_string(kind.get<std::string>())
                                                 : std::nullopt;
            if (!parsed) {
                fail(repo_file, "kinds", "unknown kind for " + path);
            }
            overrides.emplace(path, *parsed);
        }
    }

    std::set<std::string, std::less<>> doc_paths;
    if (const auto it = j.find("docs"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            fail(repo_file, "docs", "must be an array");
        }
        for (const auto& d : *it) {
            if (!d.is_object()) {
                fail(repo_file, "docs", "entries must be objects");
            }
            WebDocument doc;
            doc.source_url = require_string(d, "url", repo_file);
            doc.path = require_string(d, "path", repo_file);
            const fs::path on_disk = dir / doc.path;
            if (!fs::is_regular_file(on_disk)) {
                fail(repo_file, "docs", "document file missing: " + doc.path);
            }
            doc.text = read_file(on_disk);
            doc_paths.insert(doc.path);
            artifact.docs.push_back(std::move(doc));
        }
    }

    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string rel = generic_relative(entry.path(), dir);
        if (rel == "repo.json" || doc_paths.contains(rel)) {
            continue;
        }
        ArtifactFile file;
        const auto ov = overrides.find(rel);
        file.kind = ov != overrides.end() ? ov->second : infer_file_kind(rel);
        if (is_textual(file.kind)) {
            file.content = read_file(entry.path());
        }
        file.path = std::move(rel);
        artifact.files.push_back(std::move(file));
    }
    for (const auto& [path, kind] : overrides) {
        if (!artifact.find_file(path)) {
            fail(repo_file, "kinds", "override names a missing file: " + path);
        }
    }
    std::sort(artifact.files.begin(), artifact.files.end(),
              [](const ArtifactFile& a, const ArtifactFile& b) { return a.path < b.path; });
    return artifact;
}

VulnerabilityRecord load_record(const fs::path& dir, Timestamp ingestion_time) {
    const fs::path meta_file = dir / "meta.json";
    if (!fs::is_regular_file(meta_file)) {
        fail(meta_file, "meta.json", "missing");
    }
    const json j = parse_json_file(meta_file);
    if (!j.is_object()) {
        fail(meta_file, "meta.json", "must be a JSON object");
    }
    VulnerabilityRecord rec;
    rec.cve_id = require_string(j, "cve_id", meta_file);
    if (!is_valid_cve_id(rec.cve_id)) {
        fail(meta_file, "cve_id", "does not match CVE-YYYY-NNNN");
    }
    rec.application = require_string(j, "application", meta_file);
    const auto published = parse_date(require_string(j, "published", meta_file));
    if (!published) {
        fail(meta_file, "published", "not an RFC 3339 date");
    }
    rec.published = *published;
    rec.cvss = ranged_real(j, "cvss", 0.0, 10.0, meta_file);
    rec.epss = ranged_real(j, "epss", 0.0, 1.0, meta_file);

    const fs::path artifacts_dir = dir / "artifacts";
    if (fs::is_directory(artifacts_dir)) {
        for (const auto& entry : fs::directory_iterator(artifacts_dir)) {
            if (entry.is_directory() && entry.path().filename().string().front() != '.') {
                rec.exploits.push_back(load_artifact(entry.path(), ingestion_time));
            }
        }
    }
    std::sort(rec.exploits.begin(), rec.exploits.end(),
              [](const ExploitArtifact& a, const ExploitArtifact& b) {
                  return a.artifact_id < b.artifact_id;
              });
    return rec;
}

} // namespace

std::string_view to_string(FileKind kind) {
    return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<FileKind> file_kind_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (text == kKindNames[i]) {
            return static_cast<FileKind>(i);
        }
    }
    return std::nullopt;
}

bool is_textual(FileKind kind) {
    return kind != FileKind::Binary && kind != FileKind::Media;
}

FileKind infer_file_kind(std::string_view relative_path) {
    const fs::path p{std::string(relative_path)};
    const std::string name = lower(p.filename().string());
    const std::string ext = lower(p.extension().string());
    if (name.starts_with("readme")) {
        return FileKind::Readme;
    }
    if (kConfigNames.contains(name) || kConfigExt.contains(ext)) {
        return FileKind::Config;
    }
    if (kSourceExt.contains(ext)) {
        return FileKind::Source;
    }
    if (kDocExt.contains(ext)) {
        return FileKind::Doc;
    }
    if (kMediaExt.contains(ext)) {
        return FileKind::Media;
    }
    if (ext.empty() && (name == "license" || name == "copying" || name == "notice" ||
                        name == "changelog" || name == "authors")) {
        return FileKind::Doc;
    }
    // Unknown extensions are treated as opaque payloads unless repo.json overrides them.
    return FileKind::Binary;
}

bool is_valid_cve_id(std::string_view id) {
    static const std::regex pattern{R"(CVE-\d{4}-\d{4,})"};
    return std::regex_match(id.begin(), id.end(), pattern);
}

const ArtifactFile* ExploitArtifact::find_file(std::string_view path) const {
    const auto it = std::find_if(files.begin(), files.end(),
                                 [&](const ArtifactFile& f) { return f.path == path; });
    return it == files.end() ? nullptr : &*it;
}

const ExploitArtifact* VulnerabilityRecord::find_artifact(std::string_view artifact_id) const {
    const auto it = std::find_if(exploits.begin(), exploits.end(), [&](const ExploitArtifact& a) {
        return a.artifact_id == artifact_id;
    });
    return it == exploits.end() ? nullptr : &*it;
}

const VulnerabilityRecord* find_record(const Corpus& corpus, std::string_view cve_id) {
    const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const VulnerabilityRecord& r) {
        return r.cve_id == cve_id;
    });
    return it == corpus.end() ? nullptr : &*it;
}

std::string_view to_string(ObservedMaturity m) {
    return kMaturityNames[static_cast<std::size_t>(m)];
}

std::optional<ObservedMaturity> observed_maturity_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kMaturityNames.size(); ++i) {
        if (text == kMaturityNames[i]) {
            return static_cast<ObservedMaturity>(i);
        }
    }
    return std::nullopt;
}

Corpus load_corpus(const fs::path& root, Timestamp ingestion_time) {
    if (!fs::is_directory(root)) {
        fail(root, "root", "corpus root is not a directory");
    }
    Corpus corpus;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory() || entry.path().filename().string().front() == '.') {
            continue;
        }
        corpus.push_back(load_record(entry.path(), ingestion_time));
    }
    std::sort(corpus.begin(), corpus.end(),
              [](const VulnerabilityRecord& a, const VulnerabilityRecord& b) {
                  return a.cve_id < b.cve_id;
              });
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        if (corpus[i].cve_id == corpus[i - 1].cve_id) {
            fail(root / corpus[i].cve_id, "cve_id", "duplicate cve_id " + corpus[i].cve_id);
        }
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, const fs::path& root) {
    fs::create_directories(root);
    for (const auto& rec : corpus) {
        const fs::path dir = root / rec.cve_id;
        fs::create_directories(dir);
        json meta = {{"cve_id", rec.cve_id},
                     {"application", rec.application},
                     {"published", format_date(rec.published)}};
        if (rec.cvss) {
            meta["cvss"] = *rec.cvss;
        }
        if (rec.epss) {
            meta["epss"] = *rec.epss;
        }
        write_file(dir / "meta.json", meta.dump(2) + "\n");

        for (const auto& art : rec.exploits) {
            write_artifact_directory(art, dir / "artifacts" / art.artifact_id);
        }
    }
}

ExploitArtifact load_artifact_directory(const fs::path& dir, Timestamp ingestion_time) {
    return load_artifact(dir, ingestion_time);
}

void write_artifact_directory(const ExploitArtifact& art, const fs::path& adir) {
    fs::create_directories(adir);
    json repo = {{"repo_id", art.repo.repo_id},
                 {"description", art.repo.description},
                 {"description_len", art.repo.description_len},
                 {"issue_count", art.repo.issue_count},
                 {"topics", art.repo.topic_labels},
                 {"size_bytes", art.repo.size_bytes},
                 {"stars", art.repo.stars},
                 {"forks", art.repo.forks},
                 {"created_at", format_rfc3339(art.repo.created_at)}};
    json kinds = json::object();
    for (const auto& f : art.files) {
        if (infer_file_kind(f.path) != f.kind) {
            kinds[f.path] = std::string(to_string(f.kind));
        }
        const fs::path target = adir / fs::path(f.path);
        fs::create_directories(target.parent_path());
        // Non-textual payloads are not retained; an empty placeholder keeps the entry.
        write_file(target, f.content.value_or(std::string{}));
    }
    if (!kinds.empty()) {
        repo["kinds"] = kinds;
    }
    json docs = json::array();
    for (const auto& d : art.docs) {
        docs.push_back({{"url", d.source_url}, {"path", d.path}});
        const fs::path target = adir / fs::path(d.path);
        fs::create_directories(target.parent_path());
        write_file(target, d.text);
    }
    if (!docs.empty()) {
        repo["docs"] = docs;
    }
    write_file(adir / "repo.json", repo.dump(2) + "\n");
}

std::vector<GroundTruthLabel> parse_labels(std::istream& in, const fs::path& source) {
    std::vector<GroundTruthLabel> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = source.string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(where, "json", e.what());
        }
        if (!j.is_object()) {
            fail(where, "label", "must be a JSON object");
        }
        GroundTruthLabel label;
        label.cve_id = require_string(j, "cve_id", where);
        label.artifact_id = require_string(j, "artifact_id", where);
        const auto maturity =
            observed_maturity_from_string(require_string(j, "maturity_observed", where));
        if (!maturity) {
            fail(where, "maturity_observed", "unknown maturity literal");
        }
        label.maturity_observed = *maturity;
        if (const auto it = j.find("completion_minutes"); it != j.end() && !it->is_null()) {
            if (!it->is_number() || it->get<double>() < 0.0) {
                fail(where, "completion_minutes", "must be a non-negative number");
            }
            label.completion_minutes = it->get<double>();
        }
        if (const auto it = j.find("error_count"); it != j.end() && !it->is_null()) {
            label.error_count = count_field(j, "error_count", where);
        }
        labels.push_back(std::move(label));
    }
    return labels;
}

std::vector<GroundTruthLabel> load_labels(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "file", "cannot open");
    }
    return parse_labels(in, path);
}

void resolve_labels(const std::vector<GroundTruthLabel>& labels, const Corpus& corpus,
                    const fs::path& source) {
    for (const auto& label : labels) {
        const auto* rec = find_record(corpus, label.cve_id);
        if (!rec || !rec->find_artifact(label.artifact_id)) {
            fail(source, "artifact_id",
                 "label references unknown artifact " + label.cve_id + "/" + label.artifact_id);
        }
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::size_t utf8_length(std::string_view text) {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

} // namespace aeas
