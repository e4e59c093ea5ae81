#include "claimledger/cli.hpp"

#include "claimledger/suite.hpp"

#include <fmt/format.h>

namespace claimledger::cli {

namespace {

std::string money(Money m) { return fmt::format("{}.{:02}", m.cents() / 100, m.cents() % 100); }

std::string short_hex(const Hash32& h) { return to_hex(h).substr(0, 16); }

std::string describe_lines(const std::vector<ClaimLineItem>& lines) {
    std::string out;
    for (const auto& l : lines) out += fmt::format("{}{}={}", out.empty() ? "" : " ", l.code.str(), money(l.amount));
    return out;
}

std::string describe_signers(const LedgerRecord& r) {
    if (!r.envelope) return "";
    std::string out = " signed-by";
    for (const auto& s : r.envelope->signatures) {
        out += fmt::format(" {}({}#{})", s.signer_id, role_name(s.signer_role), s.nonce);
    }
    return out;
}

std::string describe_record(const LedgerRecord& r) {
    std::string body;
    try {
        switch (r.kind) {
        case EventKind::IdentityRegistered: {
            auto id = decode_identity(r.payload);
            body = fmt::format("{} {}", id.id, role_name(id.role));
            break;
        }
        case EventKind::PolicyRegistered: {
            auto p = decode_policy(r.payload);
            body = fmt::format("{} patient={} insurer={}", p.policy_id(), p.patient_id(), p.insurer_id());
            break;
        }
        case EventKind::ClaimSubmitted: {
            auto s = SubmissionPayload::decode(r.payload);
            body = fmt::format("claim={} provider={} patient={} total={} [{}]", short_hex(s.claim_id),
                               s.provider_id, s.patient_id, money(s.total), describe_lines(s.lines));
            break;
        }
        case EventKind::ClaimApproved: {
            auto d = ApprovalDecision::decode(r.payload);
            body = fmt::format("claim={} approved={}{}", short_hex(d.claim_id), money(d.total_approved),
                               d.rejected() ? " (rejected)" : "");
            break;
        }
        case EventKind::PaymentReceived: {
            auto p = PaymentPayload::decode(r.payload);
            body = fmt::format("claim={} received={}", short_hex(p.claim_id), money(p.received));
            break;
        }
        case EventKind::AckRecorded: {
            auto a = Acknowledgment::decode(r.payload);
            body = fmt::format("claim={} received={} remaining={}{}", short_hex(a.claim_id), money(a.received),
                               money(a.remaining), a.overpayment_flag ? " OVERPAYMENT" : "");
            break;
        }
        case EventKind::ScenarioNote: {
            auto n = NotePayload::decode(r.payload);
            body = fmt::format("subject={} {}", short_hex(n.subject), n.text);
            break;
        }
        }
    } catch (const std::exception& e) {
        body = fmt::format("<undecodable payload: {}>", e.what());
    }
    return fmt::format("#{:<4} {:>13} {:<18} {}{}", r.index, r.timestamp_ms, kind_name(r.kind), body,
                       describe_signers(r));
}

template <typename F>
int guarded(Streams io, F&& body) {
    try {
        return body();
    } catch (const LedgerIntegrityError& e) {
        io.err << "ledger verification failed: " << e.what() << '\n';
        return kLedgerInvalid;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

int report_suite(const SuiteReport& report, Streams io) {
    for (const auto& w : report.warnings) io.err << "warning: " << w << '\n';
    io.out << report.summary_table();
    return report.all_match() ? kOk : kMismatch;
}

} // namespace

int demo(std::uint64_t seed, const std::optional<std::filesystem::path>& out_dir, Streams io) {
    return guarded(io, [&]() -> int {
        if (out_dir) return report_suite(claimledger::run_suite(SuiteConfig::defaults(seed), *out_dir), io);
        std::size_t mismatches = 0;
        auto happy = default_scenario(ScenarioName::HappyPath);
        auto run = run_scenario(happy, seed);
        mismatches += run.outcome.matches(happy.expected) ? 0 : 1;
        io.out << fmt::format("HappyPath (seed {}): {}\n", seed, run.outcome.detail);
        io.out << fmt::format("audit trail for claim {}\n", to_hex(run.outcome.claim_id));
        for (const auto& r : run.ledger.audit_trail(run.outcome.claim_id)) io.out << "  " << describe_record(r) << '\n';
        io.out << fmt::format("ledger: {} records, head {}, chain {}\n\n", run.ledger.size(),
                              short_hex(run.ledger.head_hash()), run.ledger.verify().ok() ? "ok" : "BROKEN");
        for (auto name : kFraudScenarios) {
            auto sc = default_scenario(name);
            auto fraud = run_scenario(sc, seed);
            bool ok = fraud.outcome.matches(sc.expected);
            mismatches += ok ? 0 : 1;
            io.out << fmt::format("{:<22} {:<8} {}\n", scenario_name(name), ok ? "ok" : "MISMATCH", fraud.outcome.detail);
        }
        return mismatches == 0 ? kOk : kMismatch;
    });
}

int run_scenario(const std::string& name, std::uint64_t seed, const std::optional<std::filesystem::path>& policy,
                 const std::optional<std::filesystem::path>& encounter, const std::filesystem::path& out_dir,
                 Streams io) {
    return guarded(io, [&]() -> int {
        SuiteConfig cfg;
        cfg.seed = seed;
        cfg.entries.push_back({parse_scenario_name(name), seed, policy, encounter, std::nullopt});
        auto report = claimledger::run_suite(cfg, out_dir);
        const auto& row = report.rows.front();
        io.out << row.outcome.detail << '\n';
        io.out << fmt::format("ledger: {}\n", (out_dir / (row.label + ".ledger.jsonl")).string());
        return report_suite(report, io);
    });
}

int run_suite(const std::filesystem::path& config, const std::filesystem::path& out_dir, Streams io) {
    return guarded(io, [&]() -> int { return report_suite(claimledger::run_suite(SuiteConfig::load(config), out_dir), io); });
}

int verify_ledger(const std::filesystem::path& ledger, Streams io) {
    return guarded(io, [&]() -> int {
        auto l = Ledger::load(ledger);
        io.out << fmt::format("ok: {} records, head {}\n", l.size(), to_hex(l.head_hash()));
        return kOk;
    });
}

int report_costs(const std::optional<std::filesystem::path>& schedule, const std::filesystem::path& prices,
                 const std::string& format, Streams io) {
    return guarded(io, [&]() -> int {
        if (format != "csv" && format != "table") throw ConfigError("unknown format '" + format + "'");
        auto sched = schedule ? load_schedule(*schedule) : GasSchedule::defaults();
        std::vector<PricePoint> series;
        try {
            series = parse_price_csv(read_text_file(prices));
        } catch (const PriceSeriesError& e) {
            throw ConfigError(prices.string() + ": " + e.what());
        }
        auto reports = reference_reports(sched, series);
        io.out << (format == "csv" ? format_reports_csv(reports) : format_reports_table(reports));
        return kOk;
    });
}

int audit(const std::filesystem::path& ledger, const std::string& claim_hex, Streams io) {
    return guarded(io, [&]() -> int {
        Hash32 id{};
        try {
            id = hash32_from_hex(claim_hex);
        } catch (const std::invalid_argument&) {
            throw ConfigError("claim id must be 64 hex characters");
        }
        auto l = Ledger::load(ledger);
        auto trail = l.audit_trail(id);
        if (trail.empty()) {
            io.err << "no records reference claim " << claim_hex << '\n';
            return kConfigError;
        }
        for (const auto& r : trail) io.out << describe_record(r) << '\n';
        return kOk;
    });
}

} // namespace claimledger::cli
