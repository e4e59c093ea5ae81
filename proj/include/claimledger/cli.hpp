#pragma once

// Command implementations behind the claimledger executable. Each returns a
// process exit code and writes only to the given streams.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace claimledger::cli {

enum ExitCode : int {
    kOk = 0,
    kMismatch = 1,      // an outcome differed from its expectation
    kLedgerInvalid = 2, // a ledger failed chain verification
    kConfigError = 3,   // bad arguments, fixtures or I/O
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

/// Happy path audit trail plus the fraud catalog over the built-in fixtures;
/// with out_dir set, runs the default suite there instead.
int demo(std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir, Streams io);

int run_scenario(const std::string& name, std::uint64_t seed,
                 const std::optional<std::filesystem::path>& policy,
                 const std::optional<std::filesystem::path>& encounter,
                 const std::filesystem::path& out_dir, Streams io);

int run_suite(const std::filesystem::path& config, const std::filesystem::path& out_dir, Streams io);

int verify_ledger(const std::filesystem::path& ledger, Streams io);

/// format is "csv" or "table". Without a schedule file the default applies.
int report_costs(const std::optional<std::filesystem::path>& schedule,
                 const std::filesystem::path& prices, const std::string& format, Streams io);

int audit(const std::filesystem::path& ledger, const std::string& claim_hex, Streams io);

} // namespace claimledger::cli
