#include "claimledger/suite.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <future>

namespace claimledger {

namespace {

ExpectedOutcome expected_from_json(const nlohmann::json& j) {
    ExpectedOutcome e;
    e.blocked = j.at("blocked").get<bool>();
    if (j.contains("blocked_at") && !j.at("blocked_at").is_null()) {
        e.blocked_at = parse_phase(j.at("blocked_at").get<std::string>());
    }
    e.reason = parse_reason(j.value("reason", std::string("None")));
    return e;
}

std::string describe(const ExpectedOutcome& e) {
    if (!e.blocked) return "passed";
    return fmt::format("blocked@{}:{}", e.blocked_at ? phase_name(*e.blocked_at) : "-", reason_name(e.reason));
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

SuiteConfig SuiteConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    try {
        SuiteConfig cfg;
        cfg.seed = json_unsigned(j, "seed", 42);
        std::optional<std::filesystem::path> policy, encounter;
        if (j.contains("policy")) policy = resolve(base_dir, j.at("policy").get<std::string>());
        if (j.contains("encounter")) encounter = resolve(base_dir, j.at("encounter").get<std::string>());
        for (const auto& item : j.at("scenarios")) {
            SuiteEntry entry;
            entry.seed = cfg.seed;
            entry.policy = policy;
            entry.encounter = encounter;
            if (item.is_string()) {
                entry.name = parse_scenario_name(item.get<std::string>());
            } else {
                entry.name = parse_scenario_name(item.at("name").get<std::string>());
                entry.seed = json_unsigned(item, "seed", cfg.seed);
                if (item.contains("policy")) entry.policy = resolve(base_dir, item.at("policy").get<std::string>());
                if (item.contains("encounter")) {
                    entry.encounter = resolve(base_dir, item.at("encounter").get<std::string>());
                }
                if (item.contains("expected")) entry.expected = expected_from_json(item.at("expected"));
            }
            cfg.entries.push_back(std::move(entry));
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("suite config: ") + e.what());
    }
}

SuiteConfig SuiteConfig::load(const std::filesystem::path& path) {
    try {
        return from_json(read_json_file(path), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

SuiteConfig SuiteConfig::defaults(std::uint64_t seed) {
    SuiteConfig cfg;
    cfg.seed = seed;
    for (auto name : kAllScenarios) cfg.entries.push_back({name, seed, std::nullopt, std::nullopt, std::nullopt});
    return cfg;
}

std::size_t SuiteReport::mismatches() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SuiteRow& r) { return !r.match; }));
}

std::string SuiteReport::summary_csv() const {
    std::string out = "label,scenario,seed,rng,expected,actual,final_state,evidence,ledger_head,match\n";
    for (const auto& r : rows) {
        std::string evidence;
        for (auto i : r.outcome.evidence) evidence += (evidence.empty() ? "" : " ") + std::to_string(i);
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.label, scenario_name(r.name), r.seed, kRngName,
                           describe(r.expected), describe(r.outcome.summary()),
                           state_name(r.outcome.final_state), evidence, r.ledger_head_hex,
                           r.match ? "yes" : "NO");
    }
    return out;
}

std::string SuiteReport::summary_table() const {
    std::string out = fmt::format("{:<24} {:>6} {:<38} {:<38} {}\n", "scenario", "seed", "expected", "actual", "match");
    for (const auto& r : rows) {
        out += fmt::format("{:<24} {:>6} {:<38} {:<38} {}\n", r.label, r.seed, describe(r.expected),
                           describe(r.outcome.summary()), r.match ? "ok" : "MISMATCH");
    }
    out += fmt::format("{}/{} scenarios match expectations\n", rows.size() - mismatches(), rows.size());
    return out;
}

SuiteReport run_suite(const SuiteConfig& config, const std::filesystem::path& out_dir) {
    SuiteReport report;
    if (config.entries.empty()) report.warnings.push_back("suite has no scenarios");

    // Fixtures load up front so configuration errors surface before any run.
    std::vector<FraudScenario> scenarios;
    for (const auto& entry : config.entries) {
        auto policy = entry.policy ? load_policy(*entry.policy) : default_policy();
        auto encounter = entry.encounter ? load_claim(*entry.encounter) : default_encounter();
        auto sc = make_scenario(entry.name, std::move(policy), std::move(encounter));
        if (entry.expected) sc.expected = *entry.expected;
        scenarios.push_back(std::move(sc));
    }

    std::vector<std::future<ScenarioRun>> runs;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        runs.push_back(std::async(std::launch::async, [&, i] { return run_scenario(scenarios[i], config.entries[i].seed); }));
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());

    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto run = runs[i].get();
        SuiteRow row;
        row.label = fmt::format("{:02}_{}", i, scenario_name(scenarios[i].name));
        row.name = scenarios[i].name;
        row.seed = config.entries[i].seed;
        row.expected = scenarios[i].expected;
        row.ledger_head_hex = to_hex(run.ledger.head_hash());
        row.match = run.outcome.matches(row.expected);
        row.outcome = std::move(run.outcome);

        write_text_file(out_dir / (row.label + ".ledger.jsonl"), run.ledger.to_jsonl());
        write_text_file(out_dir / (row.label + ".outcome.json"), outcome_to_json(row.outcome, row.name, row.seed));
        report.rows.push_back(std::move(row));
    }
    write_text_file(out_dir / "summary.csv", report.summary_csv());
    return report;
}

} // namespace claimledger
