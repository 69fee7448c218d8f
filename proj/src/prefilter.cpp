#include "aeas/prefilter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <numeric>

namespace aeas {

namespace {

double clamp01(double v) {
    return std::clamp(v, 0.0, 1.0);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool topic_is_relevant(const std::string& topic,
                       const std::set<std::string, std::less<>>& relevant_topics) {
    const std::string t = lower(topic);
    return relevant_topics.contains(t) || (t.starts_with("cve-") && t.size() > 4);
}

double weight_sum(const FilterConfig& cfg) {
    return std::accumulate(cfg.confidence_weights.begin(), cfg.confidence_weights.end(), 0.0);
}

} // namespace

void FilterConfig::validate() const {
    for (double w : confidence_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("filter.confidence_weights must be finite and non-negative");
        }
    }
    if (!(weight_sum(*this) > 0.0)) {
        throw ConfigError("filter.confidence_weights must not all be zero");
    }
    if (!std::isfinite(confidence_threshold)) {
        throw ConfigError("filter.confidence_threshold must be finite");
    }
    if (!(quality_lambda > 0.0) || !std::isfinite(quality_lambda)) {
        throw ConfigError("filter.quality_lambda must be positive");
    }
    if (!(max_description_len > 0.0) || !(max_issue_count > 0.0)) {
        throw ConfigError("filter.max_description_len and filter.max_issue_count must be positive");
    }
    if (min_size_bytes > max_size_bytes) {
        throw ConfigError("filter.min_size_bytes exceeds filter.max_size_bytes");
    }
}

RepoSignals repo_signals(const RepoMeta& meta, const std::set<std::string, std::less<>>& relevant_topics,
                         const FilterConfig& cfg) {
    RepoSignals s;
    s.d = clamp01(1.0 - static_cast<double>(meta.description_len) / cfg.max_description_len);
    s.i = clamp01(1.0 - static_cast<double>(meta.issue_count) / cfg.max_issue_count);
    if (meta.topic_labels.empty()) {
        s.t = 1.0;
    } else {
        const auto relevant =
            std::count_if(meta.topic_labels.begin(), meta.topic_labels.end(),
                          [&](const std::string& t) { return topic_is_relevant(t, relevant_topics); });
        s.t = static_cast<double>(relevant) / static_cast<double>(meta.topic_labels.size());
    }
    return s;
}

double confidence_score(const RepoSignals& s, const FilterConfig& cfg) {
    const auto& w = cfg.confidence_weights;
    return w[0] * s.d + w[1] * s.i + w[2] * s.t;
}

double quality_score(const RepoMeta& meta, Timestamp now, const FilterConfig& cfg) {
    if (meta.stars == 0) {
        return 0.0;
    }
    const double age_days = std::max(0.0, days_between(meta.created_at, now));
    const double forks = static_cast<double>(std::max<std::uint64_t>(meta.forks, 1));
    return static_cast<double>(meta.stars) * cfg.quality_lambda * age_days / forks;
}

bool within_size_bounds(const RepoMeta& meta, const FilterConfig& cfg) {
    return meta.size_bytes >= cfg.min_size_bytes && meta.size_bytes <= cfg.max_size_bytes;
}

ScreenResult screen_repo(const RepoMeta& meta, const FilterConfig& cfg) {
    ScreenResult r;
    r.confidence = confidence_score(repo_signals(meta, cfg.relevant_topics, cfg), cfg);
    if (!within_size_bounds(meta, cfg)) {
        r.outcome = ScreenOutcome::DroppedSize;
        return r;
    }
    const double tolerance = 1e-12 * weight_sum(cfg);
    if (r.confidence < cfg.confidence_threshold - tolerance) {
        r.outcome = ScreenOutcome::DroppedConfidence;
    }
    return r;
}

std::vector<std::size_t> eliminate_indices(std::span<const RepoMeta> repos, const FilterConfig& cfg) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < repos.size(); ++i) {
        if (screen_repo(repos[i], cfg).outcome == ScreenOutcome::Kept) {
            kept.push_back(i);
        }
    }
    return kept;
}

std::vector<RepoMeta> eliminate(std::span<const RepoMeta> repos, const FilterConfig& cfg) {
    std::vector<RepoMeta> out;
    for (std::size_t i : eliminate_indices(repos, cfg)) {
        out.push_back(repos[i]);
    }
    return out;
}

std::vector<std::size_t> prioritize_indices(std::span<const RepoMeta> repos, Timestamp now,
                                            const FilterConfig& cfg, std::size_t top_n) {
    std::vector<std::size_t> order = eliminate_indices(repos, cfg);
    std::vector<double> quality(repos.size(), 0.0);
    for (std::size_t i : order) {
        quality[i] = quality_score(repos[i], now, cfg);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (quality[a] != quality[b]) {
            return quality[a] > quality[b];
        }
        if (repos[a].stars != repos[b].stars) {
            return repos[a].stars > repos[b].stars;
        }
        if (repos[a].repo_id != repos[b].repo_id) {
            return repos[a].repo_id < repos[b].repo_id;
        }
        return a < b;
    });
    if (top_n > 0 && order.size() > top_n) {
        order.resize(top_n);
    }
    return order;
}

std::vector<RepoMeta> prioritize(std::span<const RepoMeta> repos, Timestamp now,
                                 const FilterConfig& cfg, std::size_t top_n) {
    std::vector<RepoMeta> out;
    for (std::size_t i : prioritize_indices(repos, now, cfg, top_n)) {
        out.push_back(repos[i]);
    }
    return out;
}

FileDecision file_filter(std::string_view path, FileKind kind, const FilterConfig& cfg) {
    const std::string ext = lower(std::filesystem::path(std::string(path)).extension().string());
    if (!ext.empty()) {
        if (cfg.drop_extensions.contains(ext)) {
            return FileDecision::Drop;
        }
        if (cfg.keep_extensions.contains(ext)) {
            return FileDecision::Keep;
        }
    }
    switch (kind) {
    case FileKind::Source:
    case FileKind::Readme:
    case FileKind::Doc:
        return FileDecision::Keep;
    case FileKind::Binary:
    case FileKind::Media:
    case FileKind::Config:
        return FileDecision::Drop;
    }
    return FileDecision::Drop;
}

} // namespace aeas
