#include "aeas/fixtures.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

namespace aeas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestVersion = "1";

class ScratchDir {
public:
    ScratchDir() {
        std::random_device rd;
        std::mt19937_64 rng(rd());
        path_ = fs::temp_directory_path() / ("aeas-verify-" + std::to_string(rng()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

ScoreReport run_fixture_pipeline(const RunConfig& cfg) {
    cmd_filter(cfg);
    auto backend = make_rules_backend();
    cmd_extract(cfg, *backend);
    return cmd_score(cfg);
}

} // namespace

FixtureManifest fixture_manifest_from(const ScoreReport& report, std::string version) {
    FixtureManifest m;
    m.version = std::move(version);
    for (const auto& v : report.vulnerabilities) {
        auto& ranking = m.expected_rankings[v.cve_id];
        for (const auto& e : v.exploits) {
            ranking.push_back(e.artifact_id);
        }
        m.expected_severities[v.cve_id] = v.severity;
    }
    return m;
}

FixtureManifest load_fixture_manifest(const fs::path& path) {
    FixtureManifest m;
    try {
        const json j = json::parse(read_file(path));
        m.version = j.at("version").get<std::string>();
        m.expected_rankings = j.at("expected_rankings").get<std::map<std::string, std::vector<std::string>>>();
        m.expected_severities = j.at("expected_severities").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
        throw Error(path.string() + ": malformed fixture manifest: " + e.what());
    }
    return m;
}

std::string fixture_manifest_to_json(const FixtureManifest& m) {
    const json j = {{"version", m.version},
                    {"expected_rankings", m.expected_rankings},
                    {"expected_severities", m.expected_severities}};
    return j.dump(2) + "\n";
}

std::vector<std::string> compare_fixture_manifests(const FixtureManifest& expected, const FixtureManifest& actual) {
    std::vector<std::string> out;
    auto join = [](const std::vector<std::string>& ids) {
        std::string s = "[";
        for (std::size_t i = 0; i < ids.size(); ++i) {
            s += (i ? ", " : "") + ids[i];
        }
        return s + "]";
    };
    for (const auto& [cve, ranking] : expected.expected_rankings) {
        const auto it = actual.expected_rankings.find(cve);
        if (it == actual.expected_rankings.end()) {
            out.push_back(cve + ": missing from the run");
        } else if (it->second != ranking) {
            out.push_back(cve + ": ranking " + join(it->second) + ", expected " + join(ranking));
        }
    }
    for (const auto& [cve, ranking] : actual.expected_rankings) {
        if (!expected.expected_rankings.contains(cve)) {
            out.push_back(cve + ": not in the fixture manifest");
        }
    }
    for (const auto& [cve, severity] : expected.expected_severities) {
        const auto it = actual.expected_severities.find(cve);
        if (it == actual.expected_severities.end()) {
            if (expected.expected_rankings.contains(cve)) {
                continue; // already reported as missing
            }
            out.push_back(cve + ": severity missing from the run");
        } else if (std::fabs(it->second - severity) > 1e-9) {
            out.push_back(cve + ": severity " + format_score(it->second, 6) + ", expected " +
                          format_score(severity, 6));
        }
    }
    return out;
}

RunConfig fixture_config(const fs::path& fixtures_dir, const fs::path& out_dir) {
    RunConfig cfg = load_run_config(fixtures_dir / "config.json");
    cfg.backend = BackendKind::Rules;
    cfg.out_dir = out_dir;
    return cfg;
}

std::vector<std::string> verify_fixtures(const fs::path& fixtures_dir, const std::optional<Weights>& weights) {
    const FixtureManifest expected = load_fixture_manifest(fixtures_dir / "expected.json");
    ScratchDir scratch;
    RunConfig cfg = fixture_config(fixtures_dir, scratch.path());
    if (weights) {
        cfg.weights = *weights;
    }
    const ScoreReport report = run_fixture_pipeline(cfg);
    return compare_fixture_manifests(expected, fixture_manifest_from(report, expected.version));
}

FixtureManifest regenerate_fixture_manifest(const fs::path& fixtures_dir) {
    ScratchDir scratch;
    const RunConfig cfg = fixture_config(fixtures_dir, scratch.path());
    const FixtureManifest m = fixture_manifest_from(run_fixture_pipeline(cfg), kManifestVersion);
    write_file(fixtures_dir / "expected.json", fixture_manifest_to_json(m));
    return m;
}

} // namespace aeas
