#pragma once

#include "aeas/pipeline.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aeas {

// Expected outcome of a rules-backend run over the bundled fixture corpus.
struct FixtureManifest {
    std::string version;
    std::map<std::string, std::vector<std::string>> expected_rankings; // cve_id -> artifact ids
    std::map<std::string, double> expected_severities;

    bool operator==(const FixtureManifest&) const = default;
};

FixtureManifest fixture_manifest_from(const ScoreReport& report, std::string version);
FixtureManifest load_fixture_manifest(const std::filesystem::path& path);
std::string fixture_manifest_to_json(const FixtureManifest& manifest);

/// Field-by-field differences, one human-readable line each.
std::vector<std::string> compare_fixture_manifests(const FixtureManifest& expected,
                                                   const FixtureManifest& actual);

/// The fixture run configuration (`<fixtures>/config.json`) writing to `out_dir`,
/// forced onto the rules backend.
RunConfig fixture_config(const std::filesystem::path& fixtures_dir, const std::filesystem::path& out_dir);

/// Runs filter, extract and score over the fixtures in a scratch directory and
/// compares against `<fixtures>/expected.json`. Empty result means pass.
/// `weights` replaces the configured weights when given.
std::vector<std::string> verify_fixtures(const std::filesystem::path& fixtures_dir,
                                         const std::optional<Weights>& weights = std::nullopt);

/// Re-runs the fixture pipeline and rewrites `<fixtures>/expected.json`.
FixtureManifest regenerate_fixture_manifest(const std::filesystem::path& fixtures_dir);

} // namespace aeas
