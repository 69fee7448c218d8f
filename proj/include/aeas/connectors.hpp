#pragma once

#include "aeas/corpus.hpp"
#include "aeas/errors.hpp"
#include "aeas/time.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace aeas {

// ---------------------------------------------------------------------------
// Errors

class ConnectorError : public Error {
public:
    using Error::Error;
};

// HTTP 429 (or 403 with an exhausted rate-limit budget). Retryable.
class RateLimitError : public ConnectorError {
public:
    RateLimitError(const std::string& message, std::chrono::seconds retry_after)
        : ConnectorError(message), retry_after_(retry_after) {}
    std::chrono::seconds retry_after() const noexcept { return retry_after_; }

private:
    std::chrono::seconds retry_after_;
};

class NotFoundError : public ConnectorError {
public:
    using ConnectorError::ConnectorError;
};

// Transport-level failure that survived every retry.
class TransportError : public ConnectorError {
public:
    TransportError(const std::string& message, int attempts)
        : ConnectorError(message + " (after " + std::to_string(attempts) + " attempt" +
                         (attempts == 1 ? "" : "s") + ")"),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

// The response body was not the JSON document the wire format requires.
class PayloadError : public ConnectorError {
public:
    using ConnectorError::ConnectorError;
};

class OfflineUncachedError : public ConnectorError {
public:
    OfflineUncachedError() : ConnectorError("offline and uncached") {}
};

// ---------------------------------------------------------------------------
// Transport

struct HttpRequest {
    std::string method = "GET";
    std::string url;
    std::map<std::string, std::string> headers;
    std::string body;
};

struct HttpResponse {
    int status = 0;
    std::map<std::string, std::string> headers; // keys lower-cased
    std::string body;
};

/// One network exchange. Implementations throw ConnectorError (not
/// TransportError) when the exchange cannot complete at all; clients wrap
/// the final failure with the attempt count.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (http and https).
std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds{60});

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{500};
    double jitter = 0.25; // +/- fraction of each delay
};

// ---------------------------------------------------------------------------
// Completion cache

struct CompletionRequest {
    std::string model_name;
    std::string prompt_text;
    std::uint32_t max_output_tokens = 1024;
    double temperature = 0.0;
};

struct CacheEntry {
    std::string key;
    std::string response_text;
    Timestamp stored_at{};
};

/// Length-prefixed byte encoding of (model_name, prompt_text, temperature).
std::string canonical_request_encoding(const CompletionRequest& req);

/// Hex SHA-256 of canonical_request_encoding.
std::string cache_key(const CompletionRequest& req);

std::string sha256_hex(std::string_view data);

/// Write-once disk cache laid out as `<dir>/<key[0:2]>/<key>.json`.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CacheEntry> get(const std::string& key) const;

    /// Writes via temp file + rename. An existing entry is never replaced;
    /// returns false in that case.
    bool put(const CompletionRequest& req, const std::string& response_text,
             Timestamp stored_at = now_seconds()) const;

    std::filesystem::path path_for(const std::string& key) const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Chat-completion client

struct LlmClientConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    bool offline = false;
    std::filesystem::path cache_dir = ".aeas-cache";
    std::size_t max_in_flight = 4;
    RetryPolicy retry;

    /// Fills api_key, base_url and offline from AEAS_API_KEY,
    /// AEAS_API_BASE_URL and AEAS_OFFLINE=1 when they are set.
    void apply_environment();
};

/// Builds the JSON body POSTed to `<base_url>/chat/completions`.
std::string completion_request_body(const CompletionRequest& req);

/// Extracts choices[0].message.content; throws PayloadError otherwise.
std::string parse_completion_response(const std::string& body);

class LlmClient {
public:
    LlmClient(LlmClientConfig config, std::shared_ptr<Transport> transport);

    /// Cache hit: returns the stored text without touching the transport.
    /// Miss: one logical call (bounded retries), atomic cache write.
    std::string complete(const CompletionRequest& req);

    std::uint64_t network_calls() const noexcept { return network_calls_.load(); }
    std::uint64_t cache_hits() const noexcept { return cache_hits_.load(); }
    const LlmClientConfig& config() const noexcept { return config_; }

private:
    std::string call_remote(const CompletionRequest& req);

    LlmClientConfig config_;
    std::shared_ptr<Transport> transport_;
    ResponseCache cache_;
    std::counting_semaphore<> in_flight_;
    std::atomic<std::uint64_t> network_calls_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
};

// ---------------------------------------------------------------------------
// Code-hosting client

struct RepoClientConfig {
    std::string api_base_url = "https://api.github.com";
    std::string token;
    bool offline = false;
    std::filesystem::path fixture_dir; // offline source: <fixture_dir>/<owner>/<name>/repo.json
    std::uint64_t max_file_bytes = 1 << 20;
    RetryPolicy retry;
};

struct FetchedRepo {
    RepoMeta meta;
    std::vector<ArtifactFile> files;
};

class RepoClient {
public:
    RepoClient(RepoClientConfig config, std::shared_ptr<Transport> transport);

    /// Offline: reads the fixture directory for repo_id. Online: repository
    /// metadata, recursive tree, and contents of textual files.
    FetchedRepo fetch_repo(const std::string& repo_id);

    std::uint64_t network_calls() const noexcept { return network_calls_.load(); }

private:
    FetchedRepo fetch_offline(const std::string& repo_id) const;
    FetchedRepo fetch_online(const std::string& repo_id);
    HttpResponse get(const std::string& path_and_query);

    RepoClientConfig config_;
    std::shared_ptr<Transport> transport_;
    std::atomic<std::uint64_t> network_calls_{0};
};

/// Writes a fetched repository into a corpus artifact directory.
void materialize_artifact(const FetchedRepo& repo, const std::filesystem::path& artifact_dir);

std::string base64_decode(std::string_view encoded);

} // namespace aeas
