#include "claimledger/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = claimledger::cli;

int main(int argc, char** argv) {
    CLI::App app{"claimledger: signature-gated claim processing over a hash-chained ledger"};
    app.require_subcommand(1);
    cli::Streams io{std::cout, std::cerr};
    int code = cli::kOk;

    std::uint64_t seed = 42;
    std::string out_dir, name, config, ledger, claim, prices, schedule, policy, encounter, format = "table";

    auto* demo = app.add_subcommand("demo", "happy path with its audit trail, then the fraud catalog");
    demo->add_option("--seed", seed, "RNG seed");
    demo->add_option("--out", out_dir, "also write ledgers and summary.csv here");
    demo->callback([&] {
        code = cli::demo(seed, out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir), io);
    });

    auto* run = app.add_subcommand("run-scenario", "run one scenario and write its ledger and outcome");
    run->add_option("--name", name, "PhantomBilling|Upcoding|Unbundling|IdentityTheft|PolicyholderMismatch|HappyPath")
        ->required();
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--policy", policy, "policy fixture (JSON)");
    run->add_option("--encounter", encounter, "ground-truth encounter fixture (JSON)");
    run->add_option("--out", out_dir, "output directory")->required();
    run->callback([&] {
        auto opt = [](const std::string& s) {
            return s.empty() ? std::nullopt : std::optional<std::filesystem::path>(s);
        };
        code = cli::run_scenario(name, seed, opt(policy), opt(encounter), out_dir, io);
    });

    auto* suite = app.add_subcommand("run-suite", "run a scenario suite from a JSON config");
    suite->add_option("--config", config, "suite config")->required();
    suite->add_option("--out", out_dir, "output directory")->required();
    suite->callback([&] { code = cli::run_suite(config, out_dir, io); });

    auto* verify = app.add_subcommand("verify-ledger", "check a JSONL ledger's hash chain");
    verify->add_option("--file", ledger, "ledger file (JSONL)")->required();
    verify->callback([&] { code = cli::verify_ledger(ledger, io); });

    auto* costs = app.add_subcommand("report-costs", "min/max/mean USD cost per operation");
    costs->add_option("--schedule", schedule, "gas schedule (JSON); defaults to the built-in schedule");
    costs->add_option("--prices", prices, "daily price CSV: day,gas_price_gwei,token_usd")->required();
    costs->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
    costs->callback([&] {
        code = cli::report_costs(schedule.empty() ? std::nullopt : std::optional<std::filesystem::path>(schedule),
                                 prices, format, io);
    });

    auto* aud = app.add_subcommand("audit", "print every record that references a claim");
    aud->add_option("--ledger", ledger, "ledger file")->required();
    aud->add_option("--claim", claim, "claim id (hex)")->required();
    aud->callback([&] { code = cli::audit(ledger, claim, io); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }
    return code;
}
