#pragma once

#include "claimledger/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace claimledger {

struct SuiteEntry {
    ScenarioName name = ScenarioName::HappyPath;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> policy;    // defaults to the built-in policy
    std::optional<std::filesystem::path> encounter; // defaults to the built-in encounter
    std::optional<ExpectedOutcome> expected;        // defaults to the catalog
};

struct SuiteConfig {
    std::uint64_t seed = 42;
    std::vector<SuiteEntry> entries;

    /// Relative fixture paths resolve against base_dir. Throws ConfigError.
    static SuiteConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static SuiteConfig load(const std::filesystem::path& path);
    /// Every scenario once, all with `seed`.
    static SuiteConfig defaults(std::uint64_t seed = 42);
};

struct SuiteRow {
    std::string label; // file stem, e.g. "00_PhantomBilling"
    ScenarioName name = ScenarioName::HappyPath;
    std::uint64_t seed = 0;
    ExpectedOutcome expected;
    ScenarioOutcome outcome;
    std::string ledger_head_hex;
    bool match = false;
};

struct SuiteReport {
    std::vector<SuiteRow> rows;
    std::vector<std::string> warnings;

    std::size_t mismatches() const;
    bool all_match() const { return mismatches() == 0; }
    std::string summary_csv() const;
    std::string summary_table() const;
};

/// Runs every entry (in parallel; each owns its ledger and registry) and writes
/// <label>.ledger.jsonl, <label>.outcome.json and summary.csv under out_dir.
SuiteReport run_suite(const SuiteConfig& config, const std::filesystem::path& out_dir);

} // namespace claimledger
