#pragma once

#include "claimledger/bytes.hpp"
#include "claimledger/crypto.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

enum class EventKind : std::uint8_t {
    IdentityRegistered = 0,
    PolicyRegistered = 1,
    ClaimSubmitted = 2,
    ClaimApproved = 3,
    PaymentReceived = 4,
    AckRecorded = 5,
    ScenarioNote = 6,
};

std::string_view kind_name(EventKind kind);
EventKind parse_kind(std::string_view name);

/// Claim-scoped kinds carry the 32-byte claim id as the first payload field.
bool is_claim_scoped(EventKind kind);

struct LedgerRecord {
    std::uint64_t index = 0;
    std::int64_t timestamp_ms = 0;
    EventKind kind = EventKind::ScenarioNote;
    Bytes payload;
    std::optional<MultiSigEnvelope> envelope;
    Hash32 prev_hash{};
    Hash32 record_hash{};

    bool operator==(const LedgerRecord&) const = default;
};

/// prev_hash || canonical(index, timestamp, kind, payload, envelope).
Bytes record_preimage(const LedgerRecord& record);
Hash32 compute_record_hash(const LedgerRecord& record);

/// Result of re-verifying a hash chain: ok, or the smallest failing index.
struct ChainCheck {
    std::optional<std::size_t> first_bad_index;

    bool ok() const { return !first_bad_index.has_value(); }
    bool operator==(const ChainCheck&) const = default;
};

ChainCheck verify_chain(std::span<const LedgerRecord> records);

/// First 32 bytes of a claim-scoped payload.
std::optional<Hash32> payload_subject(const LedgerRecord& record);

class LedgerFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LedgerIntegrityError : public std::runtime_error {
public:
    explicit LedgerIntegrityError(std::size_t first_bad)
        : std::runtime_error("ledger chain broken at record " + std::to_string(first_bad)),
          first_bad_index(first_bad) {}

    std::size_t first_bad_index;
};

std::string record_to_json_line(const LedgerRecord& record);
/// Throws LedgerFormatError.
LedgerRecord record_from_json_line(std::string_view line);

/// Append-only hash chain. Appends are serialized; readers copy a consistent
/// prefix under the lock and hash or serialize it outside, so long reads never
/// hold off a writer.
class Ledger {
public:
    Ledger() = default;
    Ledger(Ledger&& other) noexcept;
    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    LedgerRecord append(EventKind kind, Bytes payload, std::optional<MultiSigEnvelope> envelope,
                        std::int64_t timestamp_ms);

    std::size_t size() const;
    LedgerRecord at(std::size_t index) const;
    std::vector<LedgerRecord> records() const;
    Hash32 head_hash() const;

    ChainCheck verify() const;

    /// Records whose payload references claim_id, in ledger order.
    std::vector<LedgerRecord> audit_trail(const Hash32& claim_id) const;

    std::string to_jsonl() const;
    void save(const std::filesystem::path& path) const;

    /// Parses and re-verifies the full chain. Throws LedgerFormatError or
    /// LedgerIntegrityError.
    static Ledger from_jsonl(std::string_view text);
    static Ledger load(const std::filesystem::path& path);

private:
    mutable std::mutex mu_;
    std::vector<LedgerRecord> records_;
};

} // namespace claimledger
