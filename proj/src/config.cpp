#include "aeas/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <initializer_list>

namespace aeas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) {
        throw ConfigError(where + " must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ConfigError(where + " must be finite");
    }
    return v;
}

std::uint64_t count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) {
        throw ConfigError(where + " must be a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) {
        throw ConfigError(where + " must be true or false");
    }
    return j.get<bool>();
}

std::string string(const json& j, const std::string& where) {
    if (!j.is_string()) {
        throw ConfigError(where + " must be a string");
    }
    return j.get<std::string>();
}

template <std::size_t N>
std::array<double, N> number_array(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != N) {
        throw ConfigError(where + " must be an array of " + std::to_string(N) + " numbers");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = number(j[i], where);
    }
    return out;
}

std::set<std::string, std::less<>> string_set(const json& j, const std::string& where) {
    if (!j.is_array()) {
        throw ConfigError(where + " must be an array of strings");
    }
    std::set<std::string, std::less<>> out;
    for (const auto& s : j) {
        out.insert(string(s, where));
    }
    return out;
}

fs::path path_value(const json& j, const std::string& where, const fs::path& base) {
    fs::path p = string(j, where);
    if (p.is_relative() && !base.empty()) {
        p = base / p;
    }
    return p.lexically_normal();
}

template <std::size_t N>
void require_unit_sum(const std::array<double, N>& w, const std::string& where) {
    double sum = 0.0;
    for (double x : w) {
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        throw ConfigError(where + " must sum to 1");
    }
}

void parse_filter(const json& j, FilterConfig& f) {
    check_keys(j, "filter",
               {"confidence_weights", "confidence_threshold", "quality_lambda", "max_description_len",
                "max_issue_count", "min_size_bytes", "max_size_bytes", "top_n", "relevant_topics",
                "keep_extensions", "drop_extensions", "reference_time"});
    if (j.contains("confidence_weights")) {
        f.confidence_weights = number_array<3>(j["confidence_weights"], "filter.confidence_weights");
        require_unit_sum(f.confidence_weights, "filter.confidence_weights");
    }
    if (j.contains("confidence_threshold")) {
        f.confidence_threshold = number(j["confidence_threshold"], "filter.confidence_threshold");
    }
    if (j.contains("quality_lambda")) {
        f.quality_lambda = number(j["quality_lambda"], "filter.quality_lambda");
    }
    if (j.contains("max_description_len")) {
        f.max_description_len = number(j["max_description_len"], "filter.max_description_len");
    }
    if (j.contains("max_issue_count")) {
        f.max_issue_count = number(j["max_issue_count"], "filter.max_issue_count");
    }
    if (j.contains("min_size_bytes")) {
        f.min_size_bytes = count(j["min_size_bytes"], "filter.min_size_bytes");
    }
    if (j.contains("max_size_bytes")) {
        f.max_size_bytes = count(j["max_size_bytes"], "filter.max_size_bytes");
    }
    if (j.contains("top_n")) {
        f.top_n = count(j["top_n"], "filter.top_n");
    }
    if (j.contains("relevant_topics")) {
        f.relevant_topics = string_set(j["relevant_topics"], "filter.relevant_topics");
    }
    if (j.contains("keep_extensions")) {
        f.keep_extensions = string_set(j["keep_extensions"], "filter.keep_extensions");
    }
    if (j.contains("drop_extensions")) {
        f.drop_extensions = string_set(j["drop_extensions"], "filter.drop_extensions");
    }
    if (j.contains("reference_time") && !j["reference_time"].is_null()) {
        const auto ts = parse_rfc3339(string(j["reference_time"], "filter.reference_time"));
        if (!ts) {
            throw ConfigError("filter.reference_time is not an RFC 3339 date-time");
        }
        f.reference_time = *ts;
    }
}

void parse_weights(const json& j, Weights& w) {
    check_keys(j, "weights",
               {"complexity", "popularity", "alpha", "complexity_threshold", "popularity_threshold"});
    if (j.contains("complexity")) {
        w.complexity_w = number_array<6>(j["complexity"], "weights.complexity");
    }
    if (j.contains("popularity")) {
        w.popularity_w = number_array<3>(j["popularity"], "weights.popularity");
    }
    if (j.contains("alpha")) {
        w.feature_alpha = number_array<5>(j["alpha"], "weights.alpha");
    }
    if (j.contains("complexity_threshold")) {
        w.complexity_threshold = number(j["complexity_threshold"], "weights.complexity_threshold");
    }
    if (j.contains("popularity_threshold")) {
        w.popularity_threshold = number(j["popularity_threshold"], "weights.popularity_threshold");
    }
}

void parse_retry(const json& j, RetryPolicy& r, const std::string& where) {
    check_keys(j, where, {"max_attempts", "base_delay_ms", "jitter"});
    if (j.contains("max_attempts")) {
        r.max_attempts = static_cast<int>(count(j["max_attempts"], where + ".max_attempts"));
    }
    if (j.contains("base_delay_ms")) {
        r.base_delay = std::chrono::milliseconds(count(j["base_delay_ms"], where + ".base_delay_ms"));
    }
    if (j.contains("jitter")) {
        r.jitter = number(j["jitter"], where + ".jitter");
    }
}

void parse_connectors(const json& j, RunConfig& cfg, const fs::path& base) {
    check_keys(j, "connectors", {"llm", "github", "cache_dir"});
    if (j.contains("cache_dir")) {
        cfg.cache_dir = path_value(j["cache_dir"], "connectors.cache_dir", base);
    }
    if (j.contains("llm")) {
        const json& l = j["llm"];
        check_keys(l, "connectors.llm",
                   {"base_url", "model", "max_output_tokens", "temperature", "offline", "max_in_flight",
                    "retry"});
        if (l.contains("base_url")) {
            cfg.llm.base_url = string(l["base_url"], "connectors.llm.base_url");
        }
        if (l.contains("model")) {
            cfg.live.model_name = string(l["model"], "connectors.llm.model");
        }
        if (l.contains("max_output_tokens")) {
            cfg.live.max_output_tokens =
                static_cast<std::uint32_t>(count(l["max_output_tokens"], "connectors.llm.max_output_tokens"));
        }
        if (l.contains("temperature")) {
            cfg.live.temperature = number(l["temperature"], "connectors.llm.temperature");
        }
        if (l.contains("offline")) {
            cfg.llm.offline = boolean(l["offline"], "connectors.llm.offline");
        }
        if (l.contains("max_in_flight")) {
            cfg.llm.max_in_flight = count(l["max_in_flight"], "connectors.llm.max_in_flight");
        }
        if (l.contains("retry")) {
            parse_retry(l["retry"], cfg.llm.retry, "connectors.llm.retry");
        }
    }
    if (j.contains("github")) {
        const json& g = j["github"];
        check_keys(g, "connectors.github", {"api_base_url", "offline", "fixture_dir", "max_file_bytes", "retry"});
        if (g.contains("api_base_url")) {
            cfg.repo.api_base_url = string(g["api_base_url"], "connectors.github.api_base_url");
        }
        if (g.contains("offline")) {
            cfg.repo.offline = boolean(g["offline"], "connectors.github.offline");
        }
        if (g.contains("fixture_dir")) {
            cfg.repo.fixture_dir = path_value(g["fixture_dir"], "connectors.github.fixture_dir", base);
        }
        if (g.contains("max_file_bytes")) {
            cfg.repo.max_file_bytes = count(g["max_file_bytes"], "connectors.github.max_file_bytes");
        }
        if (g.contains("retry")) {
            parse_retry(g["retry"], cfg.repo.retry, "connectors.github.retry");
        }
    }
}

void parse_analyzer(const json& j, AnalyzerConfig& a) {
    check_keys(j, "analyzer", {"retries", "snippets_per_prompt", "chunk_words", "chunk_overlap",
                               "max_document_chars"});
    if (j.contains("retries")) {
        a.retries = static_cast<int>(count(j["retries"], "analyzer.retries"));
    }
    if (j.contains("snippets_per_prompt")) {
        a.snippets_per_prompt = count(j["snippets_per_prompt"], "analyzer.snippets_per_prompt");
    }
    if (j.contains("chunk_words")) {
        a.chunk_words = count(j["chunk_words"], "analyzer.chunk_words");
    }
    if (j.contains("chunk_overlap")) {
        a.chunk_overlap = count(j["chunk_overlap"], "analyzer.chunk_overlap");
    }
    if (j.contains("max_document_chars")) {
        a.max_document_chars = count(j["max_document_chars"], "analyzer.max_document_chars");
    }
}

} // namespace

std::string_view to_string(BackendKind b) {
    return b == BackendKind::Live ? "live" : "rules";
}

BackendKind backend_from_string(std::string_view text) {
    if (text == "rules") {
        return BackendKind::Rules;
    }
    if (text == "live") {
        return BackendKind::Live;
    }
    throw ConfigError("backend must be 'rules' or 'live', not '" + std::string(text) + "'");
}

void RunConfig::validate() const {
    if (concurrency_cap < 1) {
        throw ConfigError("concurrency must be at least 1");
    }
    if (top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }
    if (analyzer.retries < 0 || analyzer.chunk_words == 0 || analyzer.chunk_overlap >= analyzer.chunk_words) {
        throw ConfigError("analyzer chunking needs chunk_words > chunk_overlap and retries >= 0");
    }
    if (live.temperature < 0.0) {
        throw ConfigError("connectors.llm.temperature must be non-negative");
    }
    if (llm.max_in_flight < 1) {
        throw ConfigError("connectors.llm.max_in_flight must be at least 1");
    }
    filter.validate();
    weights.validate();
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"corpus", "out", "labels", "baselines", "backend", "concurrency", "top_k", "filter", "weights",
                "connectors", "analyzer"});
    RunConfig cfg;
    if (j.contains("corpus")) {
        cfg.corpus_root = path_value(j["corpus"], "corpus", base_dir);
    }
    if (j.contains("out")) {
        cfg.out_dir = path_value(j["out"], "out", base_dir);
    }
    if (j.contains("labels")) {
        cfg.labels = path_value(j["labels"], "labels", base_dir);
    }
    if (j.contains("baselines")) {
        if (!j["baselines"].is_object()) {
            throw ConfigError("baselines must map names to CSV paths");
        }
        for (const auto& [name, p] : j["baselines"].items()) {
            cfg.baselines[name] = path_value(p, "baselines." + name, base_dir);
        }
    }
    if (j.contains("backend")) {
        cfg.backend = backend_from_string(string(j["backend"], "backend"));
    }
    if (j.contains("concurrency")) {
        cfg.concurrency_cap = count(j["concurrency"], "concurrency");
    }
    if (j.contains("top_k")) {
        cfg.top_k = count(j["top_k"], "top_k");
    }
    if (j.contains("filter")) {
        parse_filter(j["filter"], cfg.filter);
    }
    if (j.contains("weights")) {
        parse_weights(j["weights"], cfg.weights);
    }
    if (j.contains("connectors")) {
        parse_connectors(j["connectors"], cfg, base_dir);
    }
    if (j.contains("analyzer")) {
        parse_analyzer(j["analyzer"], cfg.analyzer);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::is_regular_file(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    try {
        return parse_run_config(read_file(path), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace aeas
