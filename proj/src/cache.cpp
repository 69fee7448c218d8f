#include "aeas/connectors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdio>
#include <system_error>
#include <thread>
#include <unistd.h>

namespace aeas {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0F]);
    }
    return out;
}

std::string canonical_request_encoding(const CompletionRequest& req) {
    char temp[40];
    std::snprintf(temp, sizeof temp, "%.17g", req.temperature);
    std::string out;
    out.reserve(req.model_name.size() + req.prompt_text.size() + 64);
    out += "model:" + std::to_string(req.model_name.size()) + ":" + req.model_name + "\n";
    out += "prompt:" + std::to_string(req.prompt_text.size()) + ":" + req.prompt_text + "\n";
    out += "temperature:" + std::string(temp) + "\n";
    return out;
}

std::string cache_key(const CompletionRequest& req) {
    return sha256_hex(canonical_request_encoding(req));
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CacheEntry> ResponseCache::get(const std::string& key) const {
    const fs::path path = path_for(key);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        return std::nullopt;
    }
    try {
        const json j = json::parse(read_file(path));
        CacheEntry entry;
        entry.key = j.at("key").get<std::string>();
        entry.response_text = j.at("response_text").get<std::string>();
        if (const auto ts = parse_rfc3339(j.at("stored_at").get<std::string>())) {
            entry.stored_at = *ts;
        }
        if (entry.key != key) {
            spdlog::warn("cache entry {} carries key {}; ignoring", path.string(), entry.key);
            return std::nullopt;
        }
        return entry;
    } catch (const std::exception& e) {
        spdlog::warn("unreadable cache entry {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

bool ResponseCache::put(const CompletionRequest& req, const std::string& response_text,
                        Timestamp stored_at) const {
    const std::string key = cache_key(req);
    const fs::path final_path = path_for(key);
    fs::create_directories(final_path.parent_path());
    if (fs::exists(final_path)) {
        return false;
    }

    static std::atomic<std::uint64_t> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    const fs::path tmp = final_path.parent_path() /
                         (key + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(tid) +
                          "." + std::to_string(counter.fetch_add(1)));

    const json entry = {{"key", key},
                        {"model_name", req.model_name},
                        {"temperature", req.temperature},
                        {"response_text", response_text},
                        {"stored_at", format_rfc3339(stored_at)}};
    write_file(tmp, entry.dump(2, ' ', false, json::error_handler_t::replace) + "\n");

    // A hard link publishes the entry atomically and fails if another writer won the race.
    std::error_code ec;
    fs::create_hard_link(tmp, final_path, ec);
    fs::remove(tmp);
    if (ec) {
        if (ec == std::errc::file_exists) {
            return false;
        }
        throw Error("cannot publish cache entry " + final_path.string() + ": " + ec.message());
    }
    return true;
}

} // namespace aeas
