// record_cache: fills a completion cache with rules-backend replies for every
// prompt the fixture pipeline issues, so `--backend live --offline` can replay
// the fixtures without a model endpoint.

#include "aeas/fixtures.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <iostream>

namespace {

class RecordingBackend final : public aeas::AnalyzerBackend {
public:
    RecordingBackend(aeas::ResponseCache cache, aeas::LiveBackendConfig live, aeas::Timestamp stamp)
        : inner_(aeas::make_rules_backend()), cache_(std::move(cache)), live_(std::move(live)), stamp_(stamp) {}

    std::string_view name() const override { return "live"; }

    std::string analyze(const aeas::FindingTask& task) override {
        return record(task.prompt, inner_->analyze(task));
    }

    std::string classify_document(const aeas::DocumentTask& task) override {
        return record(task.prompt, inner_->classify_document(task));
    }

    std::size_t written() const { return written_.load(); }

private:
    std::string record(std::string_view prompt, std::string reply) {
        aeas::CompletionRequest req;
        req.model_name = live_.model_name;
        req.prompt_text = std::string(prompt);
        req.max_output_tokens = live_.max_output_tokens;
        req.temperature = live_.temperature;
        if (cache_.put(req, reply, stamp_)) {
            ++written_;
        }
        return reply;
    }

    std::unique_ptr<aeas::AnalyzerBackend> inner_;
    aeas::ResponseCache cache_;
    aeas::LiveBackendConfig live_;
    aeas::Timestamp stamp_;
    std::atomic<std::size_t> written_{0};
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Record rules-backend replies into a completion cache"};
    std::string fixtures_dir = AEAS_DEFAULT_FIXTURES;
    std::string cache_dir;
    app.add_option("--fixtures", fixtures_dir, "Fixture directory")->check(CLI::ExistingDirectory);
    app.add_option("--cache", cache_dir, "Cache directory (default: the fixture config's cache_dir)");
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::warn);

    try {
        const auto scratch = std::filesystem::temp_directory_path() / "aeas-record-cache";
        std::filesystem::remove_all(scratch);
        aeas::RunConfig cfg = aeas::fixture_config(fixtures_dir, scratch);
        if (!cache_dir.empty()) {
            cfg.cache_dir = cache_dir;
        }
        const aeas::Timestamp stamp = cfg.filter.reference_time.value_or(aeas::Timestamp{});
        RecordingBackend backend(aeas::ResponseCache(cfg.cache_dir), cfg.live, stamp);
        aeas::cmd_filter(cfg);
        const auto summary = aeas::cmd_extract(cfg, backend);
        std::filesystem::remove_all(scratch);
        std::cout << summary.backend_calls << " finding prompts, " << backend.written()
                  << " new cache entries in " << cfg.cache_dir.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "record_cache: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
