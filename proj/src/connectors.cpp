#include "aeas/connectors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace aeas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
    thread_local std::mt19937 rng{std::random_device{}()};
    const double base = static_cast<double>(policy.base_delay.count()) * std::pow(2.0, attempt - 1);
    std::uniform_real_distribution<double> jitter(1.0 - policy.jitter, 1.0 + policy.jitter);
    return std::chrono::milliseconds{static_cast<long long>(base * jitter(rng))};
}

std::string header_value(const HttpResponse& res, const std::string& name) {
    const auto it = res.headers.find(name);
    return it == res.headers.end() ? std::string{} : it->second;
}

std::chrono::seconds retry_after_of(const HttpResponse& res) {
    const std::string retry_after = header_value(res, "retry-after");
    if (!retry_after.empty()) {
        return std::chrono::seconds{std::strtoll(retry_after.c_str(), nullptr, 10)};
    }
    const std::string reset = header_value(res, "x-ratelimit-reset");
    if (!reset.empty()) {
        const auto reset_at = std::strtoll(reset.c_str(), nullptr, 10);
        const auto now = now_seconds().time_since_epoch().count();
        return std::chrono::seconds{std::max<long long>(0, reset_at - now)};
    }
    return std::chrono::seconds{60};
}

bool is_rate_limited(const HttpResponse& res) {
    return res.status == 429 ||
           (res.status == 403 && header_value(res, "x-ratelimit-remaining") == "0");
}

class PermitGuard {
public:
    explicit PermitGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
    ~PermitGuard() { sem_.release(); }
    PermitGuard(const PermitGuard&) = delete;
    PermitGuard& operator=(const PermitGuard&) = delete;

private:
    std::counting_semaphore<>& sem_;
};

} // namespace

void LlmClientConfig::apply_environment() {
    if (const char* key = std::getenv("AEAS_API_KEY"); key && *key) {
        api_key = key;
    }
    if (const char* url = std::getenv("AEAS_API_BASE_URL"); url && *url) {
        base_url = url;
    }
    if (const char* off = std::getenv("AEAS_OFFLINE"); off && std::string_view(off) == "1") {
        offline = true;
    }
}

std::string completion_request_body(const CompletionRequest& req) {
    const json body = {{"model", req.model_name},
                       {"messages", json::array({{{"role", "user"}, {"content", req.prompt_text}}})},
                       {"max_tokens", req.max_output_tokens},
                       {"temperature", req.temperature}};
    return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string parse_completion_response(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw PayloadError(std::string("completion response is not JSON: ") + e.what());
    }
    const json* content = nullptr;
    if (j.is_object() && j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& choice = j["choices"][0];
        if (choice.is_object() && choice.contains("message") && choice["message"].is_object()) {
            const auto& msg = choice["message"];
            if (msg.contains("content") && msg["content"].is_string()) {
                content = &msg["content"];
            }
        }
    }
    if (!content) {
        throw PayloadError("completion response lacks choices[0].message.content");
    }
    return content->get<std::string>();
}

LlmClient::LlmClient(LlmClientConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(config_.cache_dir),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight))) {}

std::string LlmClient::complete(const CompletionRequest& req) {
    if (req.prompt_text.empty()) {
        throw ConnectorError("completion request has an empty prompt");
    }
    const std::string key = cache_key(req);
    if (auto hit = cache_.get(key)) {
        ++cache_hits_;
        return std::move(hit->response_text);
    }
    if (config_.offline) {
        throw OfflineUncachedError();
    }
    std::string text = call_remote(req);
    cache_.put(req, text);
    return text;
}

std::string LlmClient::call_remote(const CompletionRequest& req) {
    if (!transport_) {
        throw ConnectorError("no transport configured");
    }
    PermitGuard permit(in_flight_);

    HttpRequest http;
    http.method = "POST";
    std::string base = config_.base_url;
    while (!base.empty() && base.back() == '/') {
        base.pop_back();
    }
    http.url = base + "/chat/completions";
    http.headers["Content-Type"] = "application/json";
    if (!config_.api_key.empty()) {
        http.headers["Authorization"] = "Bearer " + config_.api_key;
    }
    http.body = completion_request_body(req);

    const int attempts = std::max(1, config_.retry.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        std::chrono::milliseconds wait{0};
        std::optional<HttpResponse> res;
        try {
            ++network_calls_;
            res = transport_->send(http);
        } catch (const ConnectorError& e) {
            last_error = e.what();
        }
        if (res) {
            if (res->status >= 200 && res->status < 300) {
                return parse_completion_response(res->body);
            }
            last_error = "HTTP " + std::to_string(res->status);
            if (res->status == 404) {
                throw NotFoundError("completion endpoint not found: " + http.url);
            }
            if (is_rate_limited(*res)) {
                wait = std::chrono::duration_cast<std::chrono::milliseconds>(retry_after_of(*res));
            } else if (res->status < 500) {
                throw ConnectorError("completion request rejected: " + last_error + " " + res->body);
            }
        }
        if (attempt < attempts) {
            const auto delay = std::max(wait, backoff_delay(config_.retry, attempt));
            spdlog::warn("completion attempt {}/{} failed ({}); retrying in {} ms", attempt, attempts,
                         last_error, delay.count());
            std::this_thread::sleep_for(delay);
        }
    }
    throw TransportError("completion request failed: " + last_error, attempts);
}

// ---------------------------------------------------------------------------

RepoClient::RepoClient(RepoClientConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

FetchedRepo RepoClient::fetch_repo(const std::string& repo_id) {
    const auto slash = repo_id.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == repo_id.size() ||
        repo_id.find('/', slash + 1) != std::string::npos || repo_id.find("..") != std::string::npos) {
        throw ConnectorError("repository id must look like owner/name: " + repo_id);
    }
    return config_.offline ? fetch_offline(repo_id) : fetch_online(repo_id);
}

FetchedRepo RepoClient::fetch_offline(const std::string& repo_id) const {
    const fs::path dir = config_.fixture_dir / repo_id;
    if (config_.fixture_dir.empty() || !fs::is_regular_file(dir / "repo.json")) {
        throw NotFoundError("repository not found in fixtures: " + repo_id);
    }
    ExploitArtifact artifact = load_artifact_directory(dir);
    return FetchedRepo{std::move(artifact.repo), std::move(artifact.files)};
}

HttpResponse RepoClient::get(const std::string& path_and_query) {
    if (!transport_) {
        throw ConnectorError("no transport configured");
    }
    HttpRequest req;
    req.method = "GET";
    std::string base = config_.api_base_url;
    while (!base.empty() && base.back() == '/') {
        base.pop_back();
    }
    req.url = base + path_and_query;
    req.headers["Accept"] = "application/vnd.github+json";
    req.headers["User-Agent"] = "aeas";
    if (!config_.token.empty()) {
        req.headers["Authorization"] = "Bearer " + config_.token;
    }

    const int attempts = std::max(1, config_.retry.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        std::optional<HttpResponse> res;
        try {
            ++network_calls_;
            res = transport_->send(req);
        } catch (const ConnectorError& e) {
            last_error = e.what();
        }
        if (res) {
            if (res->status == 404) {
                throw NotFoundError("not found: " + req.url);
            }
            if (is_rate_limited(*res)) {
                throw RateLimitError("rate limited by " + base, retry_after_of(*res));
            }
            if (res->status >= 200 && res->status < 300) {
                return std::move(*res);
            }
            if (res->status < 500) {
                throw ConnectorError("HTTP " + std::to_string(res->status) + " for " + req.url);
            }
            last_error = "HTTP " + std::to_string(res->status);
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff_delay(config_.retry, attempt));
        }
    }
    throw TransportError("GET " + req.url + " failed: " + last_error, attempts);
}

FetchedRepo RepoClient::fetch_online(const std::string& repo_id) {
    auto parse = [](const HttpResponse& res, const std::string& what) {
        try {
            return json::parse(res.body);
        } catch (const json::parse_error& e) {
            throw PayloadError(what + " is not JSON: " + e.what());
        }
    };

    const json meta = parse(get("/repos/" + repo_id), "repository metadata");
    FetchedRepo out;
    RepoMeta& repo = out.meta;
    try {
        repo.repo_id = meta.value("full_name", repo_id);
        if (meta.contains("description") && meta["description"].is_string()) {
            repo.description = meta["description"].get<std::string>();
        }
        repo.description_len = utf8_length(repo.description);
        repo.issue_count = meta.value("open_issues_count", std::uint64_t{0});
        repo.stars = meta.value("stargazers_count", std::uint64_t{0});
        repo.forks = meta.value("forks_count", std::uint64_t{0});
        repo.size_bytes = meta.value("size", std::uint64_t{0}) * 1024; // API reports KiB
        if (meta.contains("topics") && meta["topics"].is_array()) {
            for (const auto& t : meta["topics"]) {
                if (t.is_string()) {
                    repo.topic_labels.push_back(t.get<std::string>());
                }
            }
        }
        const auto created = parse_rfc3339(meta.at("created_at").get<std::string>());
        if (!created) {
            throw PayloadError("created_at is not RFC 3339");
        }
        repo.created_at = *created;
    } catch (const json::exception& e) {
        throw PayloadError(std::string("unexpected repository metadata: ") + e.what());
    }

    const std::string branch = meta.value("default_branch", std::string{"main"});
    const json tree = parse(get("/repos/" + repo_id + "/git/trees/" + branch + "?recursive=1"),
                            "repository tree");
    if (!tree.contains("tree") || !tree["tree"].is_array()) {
        throw PayloadError("repository tree lacks a 'tree' array");
    }
    for (const auto& node : tree["tree"]) {
        if (node.value("type", std::string{}) != "blob") {
            continue;
        }
        ArtifactFile file;
        file.path = node.value("path", std::string{});
        if (file.path.empty()) {
            continue;
        }
        file.kind = infer_file_kind(file.path);
        const auto size = node.value("size", std::uint64_t{0});
        if (is_textual(file.kind)) {
            if (size > config_.max_file_bytes) {
                spdlog::info("{}: {} exceeds {} bytes; recorded as binary", repo_id, file.path,
                             config_.max_file_bytes);
                file.kind = FileKind::Binary;
            } else {
                const json content = parse(
                    get("/repos/" + repo_id + "/contents/" + file.path + "?ref=" + branch),
                    "file contents");
                if (content.value("encoding", std::string{}) != "base64" ||
                    !content.contains("content") || !content["content"].is_string()) {
                    throw PayloadError("unexpected contents payload for " + file.path);
                }
                file.content = base64_decode(content["content"].get<std::string>());
            }
        }
        out.files.push_back(std::move(file));
    }
    std::sort(out.files.begin(), out.files.end(),
              [](const ArtifactFile& a, const ArtifactFile& b) { return a.path < b.path; });
    return out;
}

void materialize_artifact(const FetchedRepo& repo, const fs::path& artifact_dir) {
    ExploitArtifact artifact;
    artifact.artifact_id = artifact_dir.filename().string();
    artifact.repo = repo.meta;
    artifact.files = repo.files;
    write_artifact_directory(artifact, artifact_dir);
}

std::string base64_decode(std::string_view encoded) {
    std::string clean;
    clean.reserve(encoded.size());
    for (char c : encoded) {
        if (c != '\n' && c != '\r' && c != ' ' && c != '\t') {
            clean.push_back(c);
        }
    }
    if (clean.size() % 4 != 0) {
        throw PayloadError("base64 payload length is not a multiple of 4");
    }
    std::string out(clean.size() / 4 * 3, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(clean.data()),
                                  static_cast<int>(clean.size()));
    if (n < 0) {
        throw PayloadError("invalid base64 payload");
    }
    std::size_t len = static_cast<std::size_t>(n);
    if (!clean.empty() && clean.back() == '=') {
        --len;
        if (clean.size() >= 2 && clean[clean.size() - 2] == '=') {
            --len;
        }
    }
    out.resize(len);
    return out;
}

} // namespace aeas
