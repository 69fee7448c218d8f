#include "aeas/analyzer.hpp"
#include "aeas/connectors.hpp"

namespace aeas {

namespace {

class LiveBackend final : public AnalyzerBackend {
public:
    LiveBackend(std::shared_ptr<LlmClient> client, LiveBackendConfig cfg)
        : client_(std::move(client)), cfg_(std::move(cfg)) {
        if (!client_) {
            throw ConfigError("live backend needs a completion client");
        }
    }

    std::string_view name() const override { return "live"; }

    std::string analyze(const FindingTask& task) override { return ask(task.prompt); }

    std::string classify_document(const DocumentTask& task) override { return ask(task.prompt); }

private:
    std::string ask(std::string_view prompt) {
        CompletionRequest req;
        req.model_name = cfg_.model_name;
        req.prompt_text = std::string(prompt);
        req.max_output_tokens = cfg_.max_output_tokens;
        req.temperature = cfg_.temperature;
        return client_->complete(req);
    }

    std::shared_ptr<LlmClient> client_;
    LiveBackendConfig cfg_;
};

} // namespace

std::unique_ptr<AnalyzerBackend> make_live_backend(std::shared_ptr<LlmClient> client, LiveBackendConfig cfg) {
    return std::make_unique<LiveBackend>(std::move(client), std::move(cfg));
}

} // namespace aeas
