// aeas: exploit actionability assessment from the command line.
//
//   aeas filter|extract|score|rank|eval|report [options]
//   aeas fetch <owner/name> --cve CVE-YYYY-NNNN [options]
//   aeas verify [--fixtures DIR] [--regenerate]

#include "aeas/fixtures.hpp"
#include "aeas/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string corpus;
    std::string out;
    std::string backend;
    std::string labels;
    std::vector<std::string> baselines;
    std::size_t top_k = 0;
    std::size_t concurrency = 0;
    bool offline = false;
    bool verbose = false;
    bool quiet = false;
};

aeas::RunConfig resolve_config(const Options& opt) {
    aeas::RunConfig cfg = opt.config.empty() ? aeas::RunConfig{} : aeas::load_run_config(opt.config);
    if (!opt.corpus.empty()) {
        cfg.corpus_root = opt.corpus;
    }
    if (!opt.out.empty()) {
        cfg.out_dir = opt.out;
    }
    if (!opt.backend.empty()) {
        cfg.backend = aeas::backend_from_string(opt.backend);
    }
    if (!opt.labels.empty()) {
        cfg.labels = opt.labels;
    }
    for (const auto& b : opt.baselines) {
        const auto eq = b.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == b.size()) {
            throw aeas::ConfigError("--baseline expects NAME=PATH, got '" + b + "'");
        }
        cfg.baselines[b.substr(0, eq)] = b.substr(eq + 1);
    }
    if (opt.top_k > 0) {
        cfg.top_k = opt.top_k;
    }
    if (opt.concurrency > 0) {
        cfg.concurrency_cap = opt.concurrency;
    }
    if (opt.offline) {
        cfg.llm.offline = true;
        cfg.repo.offline = true;
    }
    cfg.validate();
    return cfg;
}

void print_ranking(const aeas::ScoreReport& report) {
    const auto ordered = aeas::severity_order(report);
    std::cout << "rank  severity  cve_id            exploits  best\n";
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto* v = ordered[i];
        std::string best = v->exploits.empty() ? "-" : v->exploits.front().artifact_id;
        std::printf("%4zu  %8s  %-16s  %8zu  %s\n", i + 1, aeas::format_score(v->severity).c_str(),
                    v->cve_id.c_str(), v->exploits.size(), best.c_str());
    }
}

std::string artifact_id_for(const std::string& repo_id) {
    const auto slash = repo_id.find('/');
    return slash == std::string::npos ? repo_id : repo_id.substr(slash + 1);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exploit actionability assessment"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--corpus", opt.corpus, "Corpus root directory");
    app.add_option("--out", opt.out, "Output directory");
    app.add_option("--backend", opt.backend, "Analyzer backend")->check(CLI::IsMember({"rules", "live"}));
    app.add_option("--labels", opt.labels, "Ground-truth labels (JSON Lines)");
    app.add_option("--baseline", opt.baselines, "Extra baseline scores as NAME=PATH (cve_id,score CSV)");
    app.add_option("--top-k", opt.top_k, "Largest k (and j) reported by eval")->check(CLI::PositiveNumber);
    app.add_option("--concurrency", opt.concurrency, "Artifacts analyzed in parallel")->check(CLI::PositiveNumber);
    app.add_flag("--offline", opt.offline, "Never touch the network; serve from cache and fixtures");
    app.add_flag("-v,--verbose", opt.verbose, "Log progress");
    app.add_flag("-q,--quiet", opt.quiet, "Only log errors");

    auto* filter = app.add_subcommand("filter", "Screen and prioritize exploit repositories");
    auto* extract = app.add_subcommand("extract", "Extract sub-feature findings for kept artifacts");
    auto* score = app.add_subcommand("score", "Aggregate findings into actionability and severity");
    auto* rank = app.add_subcommand("rank", "Run filter, extract and score, then print the ranking");
    auto* eval = app.add_subcommand("eval", "Ranking metrics and baseline agreement");
    auto* report = app.add_subcommand("report", "Re-render report.md from scores.json");

    auto* fetch = app.add_subcommand("fetch", "Fetch a repository into the corpus as an artifact");
    std::string repo_id;
    std::string cve_id;
    std::string artifact_id;
    fetch->add_option("repo", repo_id, "Repository as owner/name")->required();
    fetch->add_option("--cve", cve_id, "Vulnerability the repository belongs to")->required();
    fetch->add_option("--artifact-id", artifact_id, "Artifact directory name (default: repository name)");

    auto* verify = app.add_subcommand("verify", "Check the bundled fixtures against their expectations");
    std::string fixtures_dir = AEAS_DEFAULT_FIXTURES;
    bool regenerate = false;
    verify->add_option("--fixtures", fixtures_dir, "Fixture directory")->check(CLI::ExistingDirectory);
    verify->add_flag("--regenerate", regenerate, "Rewrite expected.json from a fresh run");

    CLI11_PARSE(app, argc, argv);

    spdlog::set_level(opt.quiet ? spdlog::level::err : opt.verbose ? spdlog::level::info : spdlog::level::warn);
    spdlog::set_pattern("aeas: %l: %v");

    try {
        if (*verify) {
            if (regenerate) {
                const auto m = aeas::regenerate_fixture_manifest(fixtures_dir);
                std::cout << "wrote " << (fs::path(fixtures_dir) / "expected.json").string() << " ("
                          << m.expected_severities.size() << " vulnerabilities)\n";
                return 0;
            }
            const auto divergences = aeas::verify_fixtures(fixtures_dir);
            if (divergences.empty()) {
                std::cout << "fixtures: pass\n";
                return 0;
            }
            std::cout << "fixtures: " << divergences.size() << " divergence(s)\n";
            for (const auto& d : divergences) {
                std::cout << "  " << d << "\n";
            }
            return 1;
        }

        const aeas::RunConfig cfg = resolve_config(opt);

        if (*filter) {
            const auto manifest = aeas::cmd_filter(cfg);
            std::size_t kept = 0;
            std::size_t dropped = 0;
            for (const auto& c : manifest.cves) {
                kept += c.kept.size();
                dropped += c.dropped.size();
            }
            std::cout << manifest.cves.size() << " vulnerabilities, " << kept << " artifacts kept, " << dropped
                      << " dropped -> " << (cfg.out_dir / aeas::kManifestFile).string() << "\n";
        } else if (*extract) {
            const auto s = aeas::cmd_extract(cfg);
            std::cout << s.artifacts << " artifacts analyzed, " << s.backend_calls << " backend calls, "
                      << s.failed_replies << " rejected replies, " << s.defaulted << " defaulted findings\n";
        } else if (*score) {
            const auto r = aeas::cmd_score(cfg);
            print_ranking(r);
        } else if (*rank) {
            const auto r = aeas::cmd_rank(cfg);
            print_ranking(r);
        } else if (*eval) {
            const auto r = aeas::cmd_eval(cfg);
            std::cout << aeas::render_eval_tables(r);
        } else if (*report) {
            aeas::cmd_report(cfg);
            std::cout << (cfg.out_dir / aeas::kReportFile).string() << "\n";
        } else if (*fetch) {
            if (!aeas::is_valid_cve_id(cve_id)) {
                throw aeas::ConfigError("--cve must look like CVE-YYYY-NNNN");
            }
            if (cfg.corpus_root.empty()) {
                throw aeas::ConfigError("fetch needs --corpus");
            }
            const fs::path cve_dir = cfg.corpus_root / cve_id;
            if (!fs::is_regular_file(cve_dir / "meta.json")) {
                throw aeas::Error("create " + (cve_dir / "meta.json").string() + " before fetching artifacts");
            }
            aeas::RepoClientConfig rc = cfg.repo;
            if (const char* token = std::getenv("GITHUB_TOKEN"); token && *token) {
                rc.token = token;
            }
            if (const char* off = std::getenv("AEAS_OFFLINE"); off && std::string_view(off) == "1") {
                rc.offline = true;
            }
            aeas::RepoClient client(rc, rc.offline ? nullptr : aeas::make_http_transport());
            const auto fetched = client.fetch_repo(repo_id);
            const std::string id = artifact_id.empty() ? artifact_id_for(repo_id) : artifact_id;
            const fs::path dir = cve_dir / "artifacts" / id;
            aeas::materialize_artifact(fetched, dir);
            std::cout << repo_id << ": " << fetched.files.size() << " files -> " << dir.string() << "\n";
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
