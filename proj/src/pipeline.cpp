#include "aeas/pipeline.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace aeas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* status_for(ScreenOutcome o) {
    switch (o) {
    case ScreenOutcome::Kept:
        return "kept";
    case ScreenOutcome::DroppedSize:
        return "dropped_size";
    case ScreenOutcome::DroppedConfidence:
        return "dropped_confidence";
    }
    return "dropped_confidence";
}

json entry_to_json(const ManifestEntry& e) {
    json j = {{"artifact_id", e.artifact_id},
              {"repo_id", e.repo_id},
              {"confidence", e.confidence},
              {"quality", e.quality},
              {"status", e.status}};
    if (e.rank > 0) {
        j["rank"] = e.rank;
    }
    return j;
}

ManifestEntry entry_from_json(const json& j) {
    ManifestEntry e;
    e.artifact_id = j.at("artifact_id").get<std::string>();
    e.repo_id = j.at("repo_id").get<std::string>();
    e.confidence = j.at("confidence").get<double>();
    e.quality = j.at("quality").get<double>();
    e.status = j.at("status").get<std::string>();
    e.rank = j.value("rank", std::size_t{0});
    return e;
}

fs::path findings_path(const RunConfig& cfg, std::string_view cve_id, std::string_view artifact_id) {
    return cfg.out_dir / kFindingsDir / std::string(cve_id) / (std::string(artifact_id) + ".json");
}

Timestamp filter_time(const FilterConfig& f) {
    if (f.reference_time) {
        return *f.reference_time;
    }
    spdlog::warn("filter.reference_time is not set; quality scores use the current time and will "
                 "change between runs");
    return now_seconds();
}

FilterManifest read_manifest(const RunConfig& cfg) {
    const fs::path path = cfg.out_dir / kManifestFile;
    if (!fs::is_regular_file(path)) {
        throw Error("missing " + path.string() + "; run `aeas filter` first");
    }
    return manifest_from_json(read_file(path));
}

ScoreReport read_scores(const RunConfig& cfg) {
    const fs::path path = cfg.out_dir / kScoresFile;
    if (!fs::is_regular_file(path)) {
        throw Error("missing " + path.string() + "; run `aeas score` first");
    }
    return scores_from_json(read_file(path));
}

json stats_to_json(const AgreementStats& s) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"n", s.n},
            {"mean_diff", s.mean_diff},
            {"sd_diff", s.sd_diff},
            {"limits", {s.limits.first, s.limits.second}},
            {"n_outside", s.n_outside},
            {"pct_outside", s.pct_outside},
            {"pearson", opt(s.pearson)},
            {"spearman", opt(s.spearman)},
            {"mae", s.mae},
            {"rmse", s.rmse}};
}

std::string optional_cell(const std::optional<double>& v) {
    return v ? format_score(*v) : std::string("n/a");
}

} // namespace

// ---------------------------------------------------------------------------
// Manifest

FilterManifest build_manifest(const Corpus& corpus, const FilterConfig& cfg, Timestamp now) {
    FilterManifest manifest;
    manifest.reference_time = format_rfc3339(now);
    for (const auto& rec : corpus) {
        CveManifest cm;
        cm.cve_id = rec.cve_id;
        cm.candidates = rec.exploits.size();
        std::vector<RepoMeta> repos;
        for (const auto& a : rec.exploits) {
            repos.push_back(a.repo);
        }
        const auto order = prioritize_indices(repos, now, cfg, cfg.top_n);
        std::set<std::size_t> kept(order.begin(), order.end());
        for (std::size_t r = 0; r < order.size(); ++r) {
            const auto& a = rec.exploits[order[r]];
            ManifestEntry e{a.artifact_id, a.repo.repo_id, screen_repo(a.repo, cfg).confidence,
                            quality_score(a.repo, now, cfg), "kept", r + 1};
            cm.kept.push_back(std::move(e));
        }
        for (std::size_t i = 0; i < rec.exploits.size(); ++i) {
            if (kept.contains(i)) {
                continue;
            }
            const auto& a = rec.exploits[i];
            const ScreenResult sr = screen_repo(a.repo, cfg);
            const char* status = sr.outcome == ScreenOutcome::Kept ? "dropped_rank" : status_for(sr.outcome);
            cm.dropped.push_back(
                {a.artifact_id, a.repo.repo_id, sr.confidence, quality_score(a.repo, now, cfg), status, 0});
        }
        std::sort(cm.dropped.begin(), cm.dropped.end(),
                  [](const ManifestEntry& x, const ManifestEntry& y) { return x.artifact_id < y.artifact_id; });
        manifest.cves.push_back(std::move(cm));
    }
    return manifest;
}

std::string manifest_to_json(const FilterManifest& manifest) {
    json cves = json::array();
    for (const auto& cm : manifest.cves) {
        json kept = json::array();
        json dropped = json::array();
        for (const auto& e : cm.kept) {
            kept.push_back(entry_to_json(e));
        }
        for (const auto& e : cm.dropped) {
            dropped.push_back(entry_to_json(e));
        }
        cves.push_back({{"cve_id", cm.cve_id}, {"candidates", cm.candidates}, {"kept", kept}, {"dropped", dropped}});
    }
    const json doc = {{"reference_time", manifest.reference_time}, {"cves", cves}};
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

FilterManifest manifest_from_json(std::string_view text) {
    FilterManifest m;
    try {
        const json doc = json::parse(text);
        m.reference_time = doc.at("reference_time").get<std::string>();
        for (const auto& jc : doc.at("cves")) {
            CveManifest cm;
            cm.cve_id = jc.at("cve_id").get<std::string>();
            cm.candidates = jc.at("candidates").get<std::size_t>();
            for (const auto& e : jc.at("kept")) {
                cm.kept.push_back(entry_from_json(e));
            }
            for (const auto& e : jc.at("dropped")) {
                cm.dropped.push_back(entry_from_json(e));
            }
            m.cves.push_back(std::move(cm));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("manifest.json is malformed: ") + e.what());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Plumbing

std::unique_ptr<AnalyzerBackend> make_backend(const RunConfig& cfg, std::shared_ptr<Transport> transport) {
    if (cfg.backend == BackendKind::Rules) {
        return make_rules_backend();
    }
    LlmClientConfig llm = cfg.llm;
    llm.cache_dir = cfg.cache_dir;
    llm.apply_environment();
    if (!transport) {
        transport = make_http_transport();
    }
    auto client = std::make_shared<LlmClient>(std::move(llm), std::move(transport));
    return make_live_backend(std::move(client), cfg.live);
}

void parallel_for(std::size_t n, std::size_t cap, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(cap, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            {
                std::lock_guard lock(mu);
                if (first) {
                    return;
                }
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first) {
                    first = std::current_exception();
                }
            }
        }
    };
    if (workers == 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(run);
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }
}

Corpus load_run_corpus(const RunConfig& cfg) {
    if (cfg.corpus_root.empty()) {
        throw ConfigError("no corpus given; pass --corpus or set \"corpus\" in the config");
    }
    if (!fs::is_directory(cfg.corpus_root)) {
        throw Error("corpus directory not found: " + cfg.corpus_root.string());
    }
    return load_corpus(cfg.corpus_root);
}

// ---------------------------------------------------------------------------
// Commands

FilterManifest cmd_filter(const RunConfig& cfg) {
    const Corpus corpus = load_run_corpus(cfg);
    FilterManifest manifest = build_manifest(corpus, cfg.filter, filter_time(cfg.filter));
    write_file(cfg.out_dir / kManifestFile, manifest_to_json(manifest));
    return manifest;
}

ExtractSummary cmd_extract(const RunConfig& cfg, AnalyzerBackend& backend) {
    const Corpus corpus = load_run_corpus(cfg);
    FilterManifest manifest;
    if (fs::is_regular_file(cfg.out_dir / kManifestFile)) {
        manifest = read_manifest(cfg);
    } else {
        spdlog::info("no manifest yet; running the filter stage first");
        manifest = build_manifest(corpus, cfg.filter, filter_time(cfg.filter));
        write_file(cfg.out_dir / kManifestFile, manifest_to_json(manifest));
    }

    struct Job {
        const VulnerabilityRecord* record;
        const ExploitArtifact* artifact;
    };
    std::vector<Job> jobs;
    for (const auto& cm : manifest.cves) {
        const VulnerabilityRecord* rec = find_record(corpus, cm.cve_id);
        if (!rec) {
            throw Error("manifest names " + cm.cve_id + ", which is not in the corpus; re-run `aeas filter`");
        }
        for (const auto& e : cm.kept) {
            const ExploitArtifact* a = rec->find_artifact(e.artifact_id);
            if (!a) {
                throw Error("manifest names " + cm.cve_id + "/" + e.artifact_id +
                            ", which is not in the corpus; re-run `aeas filter`");
            }
            jobs.push_back({rec, a});
        }
    }

    std::error_code ec;
    fs::remove_all(cfg.out_dir / kFindingsDir, ec);

    std::mutex mu;
    ExtractSummary summary;
    parallel_for(jobs.size(), cfg.concurrency_cap, [&](std::size_t i) {
        const Job& job = jobs[i];
        const AnalysisContext ctx{job.record->cve_id, job.record->application};
        const PreparedArtifact prepared = prepare_artifact(*job.artifact, backend, cfg.filter, cfg.analyzer);
        ExtractionStats stats;
        const FeatureVector fv = extract_features(prepared, ctx, backend, cfg.analyzer, &stats);
        write_file(findings_path(cfg, ctx.cve_id, job.artifact->artifact_id),
                   serialize_feature_vector(fv, ctx.cve_id, job.artifact->artifact_id, backend.name()));
        std::lock_guard lock(mu);
        ++summary.artifacts;
        summary.backend_calls += stats.backend_calls;
        summary.failed_replies += stats.failed_replies;
        summary.defaulted += stats.defaulted;
    });
    if (summary.defaulted > 0) {
        spdlog::warn("{} sub-feature findings fell back to conservative defaults", summary.defaulted);
    }
    return summary;
}

ExtractSummary cmd_extract(const RunConfig& cfg) {
    auto backend = make_backend(cfg);
    return cmd_extract(cfg, *backend);
}

ScoreReport cmd_score(const RunConfig& cfg) {
    const Corpus corpus = load_run_corpus(cfg);
    const FilterManifest manifest = read_manifest(cfg);

    ScoreReport report;
    report.backend = std::string(to_string(cfg.backend));
    std::set<std::string> backends;
    for (const auto& cm : manifest.cves) {
        const VulnerabilityRecord* rec = find_record(corpus, cm.cve_id);
        if (!rec) {
            throw Error("manifest names " + cm.cve_id + ", which is not in the corpus; re-run `aeas filter`");
        }
        ScoredVulnerability v;
        v.cve_id = rec->cve_id;
        v.application = rec->application;
        v.cvss = rec->cvss;
        v.epss = rec->epss;
        for (const auto& e : cm.kept) {
            const ExploitArtifact* a = rec->find_artifact(e.artifact_id);
            if (!a) {
                throw Error("manifest names " + cm.cve_id + "/" + e.artifact_id + ", which is not in the corpus");
            }
            const fs::path path = findings_path(cfg, cm.cve_id, e.artifact_id);
            if (!fs::is_regular_file(path)) {
                throw Error("missing findings for " + cm.cve_id + "/" + e.artifact_id +
                            "; run `aeas extract` first");
            }
            const std::string text = read_file(path);
            const FeatureVector fv = parse_feature_vector(text);
            backends.insert(json::parse(text).value("backend", std::string()));
            const PopularityInputs pop{rec->exploits.size(), a->repo.stars, a->repo.forks};
            ScoredExploit se;
            se.artifact_id = a->artifact_id;
            se.repo_id = a->repo.repo_id;
            se.score = score_exploit(fv, pop, cfg.weights);
            se.defaulted_subfeatures =
                static_cast<std::size_t>(std::count(fv.defaulted.begin(), fv.defaulted.end(), true));
            v.exploits.push_back(std::move(se));
        }
        for (const auto& e : cm.dropped) {
            v.dropped.push_back(e.artifact_id);
        }
        finalize(v);
        report.vulnerabilities.push_back(std::move(v));
    }
    if (backends.size() == 1 && !backends.begin()->empty()) {
        report.backend = *backends.begin();
    }
    write_file(cfg.out_dir / kScoresFile, scores_to_json(report));
    write_file(cfg.out_dir / kReportFile, render_report_markdown(report));
    return report;
}

ScoreReport cmd_rank(const RunConfig& cfg) {
    cmd_filter(cfg);
    cmd_extract(cfg);
    return cmd_score(cfg);
}

std::string cmd_report(const RunConfig& cfg) {
    const ScoreReport report = read_scores(cfg);
    std::string md = render_report_markdown(report);
    write_file(cfg.out_dir / kReportFile, md);
    return md;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<RankingCase> build_ranking_cases(const ScoreReport& scores, const Corpus& corpus,
                                             const std::vector<GroundTruthLabel>& labels) {
    std::map<std::string, std::map<std::string, GroundTruthLabel>> by_cve;
    for (const auto& l : labels) {
        if (!by_cve[l.cve_id].emplace(l.artifact_id, l).second) {
            throw EvalError("duplicate label for " + l.cve_id + "/" + l.artifact_id);
        }
    }
    std::vector<RankingCase> cases;
    for (const auto& [cve_id, labeled] : by_cve) {
        const auto it = std::find_if(scores.vulnerabilities.begin(), scores.vulnerabilities.end(),
                                     [&](const ScoredVulnerability& v) { return v.cve_id == cve_id; });
        if (it == scores.vulnerabilities.end()) {
            throw EvalError("labels reference " + cve_id + ", which has no scores");
        }
        // Scored exploits by actionability, then the filtered-out ones by id;
        // anything else in the corpus (should not happen) after those.
        std::vector<std::string> order;
        for (const auto& e : it->exploits) {
            order.push_back(e.artifact_id);
        }
        order.insert(order.end(), it->dropped.begin(), it->dropped.end());
        if (const VulnerabilityRecord* rec = find_record(corpus, cve_id)) {
            for (const auto& a : rec->exploits) {
                if (std::find(order.begin(), order.end(), a.artifact_id) == order.end()) {
                    order.push_back(a.artifact_id);
                }
            }
        }
        RankingCase c;
        c.cve_id = cve_id;
        c.labels = labeled;
        for (const auto& id : order) {
            if (labeled.contains(id)) {
                c.predicted_order.push_back(id);
            }
        }
        validate_case(c);
        cases.push_back(std::move(c));
    }
    return cases;
}

EvalReport cmd_eval(const RunConfig& cfg) {
    if (cfg.labels.empty()) {
        throw ConfigError("eval needs ground-truth labels; pass --labels or set \"labels\" in the config");
    }
    const Corpus corpus = load_run_corpus(cfg);
    const ScoreReport scores = read_scores(cfg);
    const auto labels = load_labels(cfg.labels);
    resolve_labels(labels, corpus, cfg.labels);

    EvalReport report;
    const auto cases = build_ranking_cases(scores, corpus, labels);
    report.labeled_cases = cases.size();
    report.functional_cases = static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const RankingCase& c) {
        return std::any_of(c.labels.begin(), c.labels.end(), [](const auto& kv) {
            return kv.second.maturity_observed == ObservedMaturity::Functional;
        });
    }));
    for (std::size_t k = 1; k <= cfg.top_k; ++k) {
        report.ranking.push_back({"top_k_success", k, 0, top_k_success(cases, k)});
        report.ranking.push_back({"random_select", k, 0, random_select_success(cases, k)});
        report.ranking.push_back({"precision_at_k", k, 0, precision_at_k(cases, k)});
        for (std::size_t j = 1; j <= cfg.top_k; ++j) {
            report.ranking.push_back({"recall_k_for_top_j", k, j, recall_k_for_top_j(cases, k, j)});
        }
    }

    // Baselines: EPSS and CVSS (scaled to [0,1]) from the corpus, plus CSV files.
    std::map<std::string, std::map<std::string, double>> baselines;
    for (const auto& rec : corpus) {
        if (rec.epss) {
            baselines["epss"][rec.cve_id] = *rec.epss;
        }
        if (rec.cvss) {
            baselines["cvss"][rec.cve_id] = *rec.cvss / 10.0;
        }
    }
    for (const auto& [name, path] : cfg.baselines) {
        baselines["csv:" + name] = load_baseline_csv(path);
    }

    std::error_code ec;
    fs::remove_all(cfg.out_dir / "plots", ec);
    for (const auto& [name, values] : baselines) {
        for (const std::string subset : {"all", "with_exploits"}) {
            std::vector<std::string> ids;
            std::vector<double> a;
            std::vector<double> b;
            for (const auto& v : scores.vulnerabilities) {
                const auto it = values.find(v.cve_id);
                if (it == values.end() || (subset == "with_exploits" && v.exploits.empty())) {
                    continue;
                }
                ids.push_back(v.cve_id);
                a.push_back(it->second);
                b.push_back(v.severity);
            }
            if (a.size() < 2) {
                continue;
            }
            report.agreement.push_back({name, subset, score_agreement(a, b)});
            const BlandAltmanPlot plot = bland_altman_plot(ids, a, b);
            json points = json::array();
            for (const auto& p : plot.points) {
                points.push_back({{"id", p.id}, {"mean", p.mean}, {"diff", p.diff}});
            }
            std::string file = name + "_" + subset + ".json";
            std::replace(file.begin(), file.end(), ':', '_');
            write_file(cfg.out_dir / "plots" / ("bland_altman_" + file),
                       json{{"baseline", name},
                            {"subset", subset},
                            {"x", "mean of baseline and severity"},
                            {"y", "severity minus baseline"},
                            {"points", points},
                            {"mean_diff", plot.mean_diff},
                            {"lower_limit", plot.lo},
                            {"upper_limit", plot.hi}}
                               .dump(2) +
                           "\n");
        }
    }

    json ranking = json::array();
    for (const auto& r : report.ranking) {
        json row = {{"metric", r.metric}, {"k", r.k}, {"value", r.value}};
        if (r.j > 0) {
            row["j"] = r.j;
        }
        ranking.push_back(row);
    }
    json agreement = json::array();
    for (const auto& a : report.agreement) {
        json row = stats_to_json(a.stats);
        row["baseline"] = a.baseline;
        row["subset"] = a.subset;
        agreement.push_back(row);
    }
    write_file(cfg.out_dir / kMetricsFile, json{{"labeled_cases", report.labeled_cases},
                                               {"functional_cases", report.functional_cases},
                                               {"ranking", ranking},
                                               {"agreement", agreement}}
                                                   .dump(2) +
                                               "\n");
    return report;
}

std::string render_eval_tables(const EvalReport& report) {
    std::ostringstream out;
    out << "Ranking quality (" << report.labeled_cases << " labeled CVEs, " << report.functional_cases
        << " with a functional exploit)\n\n"
        << "| Metric | k | j | Value |\n|---|---:|---:|---:|\n";
    for (const auto& r : report.ranking) {
        out << "| " << r.metric << " | " << r.k << " | " << (r.j ? std::to_string(r.j) : "") << " | "
            << format_score(r.value) << " |\n";
    }
    out << "\nAgreement with baselines (diff = severity - baseline)\n\n"
        << "| Baseline | Subset | n | Mean diff | SD | Limits | Outside | Pearson | Spearman | MAE | RMSE |\n"
        << "|---|---|---:|---:|---:|---|---:|---:|---:|---:|---:|\n";
    for (const auto& a : report.agreement) {
        const auto& s = a.stats;
        out << "| " << a.baseline << " | " << a.subset << " | " << s.n << " | " << format_score(s.mean_diff)
            << " | " << format_score(s.sd_diff) << " | [" << format_score(s.limits.first) << ", "
            << format_score(s.limits.second) << "] | " << s.n_outside << " (" << format_score(s.pct_outside, 1)
            << "%) | " << optional_cell(s.pearson) << " | " << optional_cell(s.spearman) << " | "
            << format_score(s.mae) << " | " << format_score(s.rmse) << " |\n";
    }
    return out.str();
}

} // namespace aeas
