#include "support.hpp"

#include "claimledger/cli.hpp"
#include "claimledger/suite.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace claimledger;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = CLAIMLEDGER_FIXTURES_DIR;

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "claimledger_tests" / name;
    fs::remove_all(dir);
    return dir;
}

struct Captured {
    std::ostringstream out, err;
    cli::Streams io() { return {out, err}; }
};

int run_binary(const std::string& args) {
    auto cmd = std::string(CLAIMLEDGER_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("default suite matches every expectation", "[suite]") {
    auto out = fresh_dir("default_suite");
    auto report = run_suite(SuiteConfig::defaults(42), out);
    CHECK(report.rows.size() == 6);
    CHECK(report.all_match());
    CHECK(report.summary_table().find("6/6 scenarios match") != std::string::npos);
    for (const auto& row : report.rows) {
        CHECK(fs::exists(out / (row.label + ".ledger.jsonl")));
        CHECK(fs::exists(out / (row.label + ".outcome.json")));
        CHECK(Ledger::load(out / (row.label + ".ledger.jsonl")).head_hash() == hash32_from_hex(row.ledger_head_hex));
    }
    auto summary = read_text_file(out / "summary.csv");
    CHECK(summary.rfind("label,scenario,seed,rng,", 0) == 0);
    CHECK(summary.find(",42,mt19937_64,") != std::string::npos);
}

TEST_CASE("suite config file resolves fixture paths", "[suite]") {
    auto cfg = SuiteConfig::load(kFixtures / "suite.json");
    REQUIRE(cfg.entries.size() == 8);
    CHECK(cfg.entries[5].seed == 7);
    CHECK(cfg.entries[0].seed == 42);
    REQUIRE(cfg.entries[6].policy);
    CHECK(fs::exists(*cfg.entries[6].policy));
    auto report = run_suite(cfg, fresh_dir("fixture_suite"));
    CHECK(report.all_match());
}

TEST_CASE("suite runs are byte-identical across repeats", "[suite]") {
    auto cfg = SuiteConfig::load(kFixtures / "suite.json");
    auto a = fresh_dir("repeat_a"), b = fresh_dir("repeat_b");
    run_suite(cfg, a);
    run_suite(cfg, b);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        auto name = entry.path().filename();
        CHECK(read_text_file(entry.path()) == read_text_file(b / name));
        ++files;
    }
    CHECK(files == 2 * cfg.entries.size() + 1);
}

TEST_CASE("a wrong expectation is reported as a mismatch", "[suite]") {
    auto report = run_suite(SuiteConfig::load(kFixtures / "suite_wrong_expectation.json"), fresh_dir("wrong"));
    CHECK(report.mismatches() == 1);
    CHECK(report.summary_table().find("01_PhantomBilling") != std::string::npos);
    CHECK(report.summary_table().find("MISMATCH") != std::string::npos);

    Captured c;
    CHECK(cli::run_suite(kFixtures / "suite_wrong_expectation.json", fresh_dir("wrong_cli"), c.io()) == cli::kMismatch);
}

TEST_CASE("an empty suite passes with a warning", "[suite]") {
    Captured c;
    CHECK(cli::run_suite(kFixtures / "suite_empty.json", fresh_dir("empty"), c.io()) == cli::kOk);
    CHECK(c.err.str().find("warning") != std::string::npos);
    CHECK(c.out.str().find("0/0") != std::string::npos);
}

TEST_CASE("malformed suite configs are configuration errors", "[suite]") {
    auto dir = fresh_dir("bad_configs");
    fs::create_directories(dir);
    Captured c;
    write_text_file(dir / "bad_name.json", R"({"scenarios": ["Nope"]})");
    CHECK(cli::run_suite(dir / "bad_name.json", dir / "out", c.io()) == cli::kConfigError);
    write_text_file(dir / "missing_policy.json", R"({"scenarios": [{"name": "HappyPath", "policy": "absent.json"}]})");
    CHECK(cli::run_suite(dir / "missing_policy.json", dir / "out", c.io()) == cli::kConfigError);
    CHECK(c.err.str().find("absent.json") != std::string::npos);
    CHECK(cli::run_suite(dir / "no-such-file.json", dir / "out", c.io()) == cli::kConfigError);
}

TEST_CASE("verify-ledger and audit commands", "[cli]") {
    auto out = fresh_dir("verify");
    Captured c;
    REQUIRE(cli::run_scenario("HappyPath", 3, std::nullopt, std::nullopt, out, c.io()) == cli::kOk);
    auto ledger_path = out / "00_HappyPath.ledger.jsonl";
    REQUIRE(fs::exists(ledger_path));
    REQUIRE(fs::exists(out / "00_HappyPath.outcome.json"));

    Captured v;
    CHECK(cli::verify_ledger(ledger_path, v.io()) == cli::kOk);
    CHECK(v.out.str().find("ok: 8 records") != std::string::npos);

    auto outcome = nlohmann::json::parse(read_text_file(out / "00_HappyPath.outcome.json"));
    Captured a;
    CHECK(cli::audit(ledger_path, outcome.at("claim_id").get<std::string>(), a.io()) == cli::kOk);
    auto trail = a.out.str();
    for (const char* kind : {"ClaimSubmitted", "ClaimApproved", "PaymentReceived", "AckRecorded"}) {
        CHECK(trail.find(kind) != std::string::npos);
    }
    Captured unknown;
    CHECK(cli::audit(ledger_path, std::string(64, '0'), unknown.io()) == cli::kConfigError);
    Captured bad_hex;
    CHECK(cli::audit(ledger_path, "xyz", bad_hex.io()) == cli::kConfigError);

    auto text = read_text_file(ledger_path);
    auto pos = text.find("\"ts_ms\":1700000003000");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 21, "\"ts_ms\":1700000003001");
    write_text_file(out / "tampered.jsonl", text);
    Captured t;
    CHECK(cli::verify_ledger(out / "tampered.jsonl", t.io()) == cli::kLedgerInvalid);
    CHECK(t.err.str().find("record 3") != std::string::npos);
    CHECK(cli::audit(out / "tampered.jsonl", outcome.at("claim_id").get<std::string>(), t.io()) == cli::kLedgerInvalid);
    CHECK(cli::verify_ledger(out / "absent.jsonl", t.io()) == cli::kConfigError);
}

TEST_CASE("run-scenario accepts fixture files", "[cli]") {
    Captured c;
    auto out = fresh_dir("fixture_run");
    CHECK(cli::run_scenario("Upcoding", 4, kFixtures / "policy.json", kFixtures / "encounter.json", out, c.io()) ==
          cli::kOk);
    CHECK(cli::run_scenario("Bogus", 4, std::nullopt, std::nullopt, out, c.io()) == cli::kConfigError);
}

TEST_CASE("report-costs command", "[cli]") {
    Captured c;
    CHECK(cli::report_costs(kFixtures / "gas_schedule.json", kFixtures / "prices.csv", "csv", c.io()) == cli::kOk);
    auto csv = c.out.str();
    CHECK(csv.rfind("operation,min_usd,max_usd,mean_usd\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    Captured d;
    CHECK(cli::report_costs(std::nullopt, kFixtures / "prices.csv", "table", d.io()) == cli::kOk);

    auto dir = fresh_dir("bad_prices");
    fs::create_directories(dir);
    write_text_file(dir / "prices.csv", "day,gas_price_gwei,token_usd\n2024-01-01,20,2000\n2024-01-01,20,2000\n");
    Captured e;
    CHECK(cli::report_costs(std::nullopt, dir / "prices.csv", "csv", e.io()) == cli::kConfigError);
    CHECK(e.err.str().find("line 3") != std::string::npos);
    write_text_file(dir / "empty.csv", "day,gas_price_gwei,token_usd\n");
    CHECK(cli::report_costs(std::nullopt, dir / "empty.csv", "csv", e.io()) == cli::kConfigError);
    CHECK(cli::report_costs(std::nullopt, kFixtures / "prices.csv", "xml", e.io()) == cli::kConfigError);
}

TEST_CASE("executable exit codes", "[cli]") {
    auto out = fresh_dir("binary");
    CHECK(run_binary("demo --seed 3") == 0);
    CHECK(run_binary("run-suite --config " + (kFixtures / "suite.json").string() + " --out " + out.string()) == 0);
    CHECK(run_binary("run-suite --config " + (kFixtures / "suite_wrong_expectation.json").string() + " --out " +
                     out.string() + "/wrong") == 1);
    CHECK(run_binary("verify-ledger --file " + (out / "05_HappyPath.ledger.jsonl").string()) == 0);
    CHECK(run_binary("verify-ledger --file " + (out / "missing.jsonl").string()) == 3);
    CHECK(run_binary("no-such-command") == 3);
    CHECK(run_binary("report-costs --prices " + (kFixtures / "prices.csv").string() + " --format csv") == 0);
}
