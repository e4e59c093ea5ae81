#pragma once

#include "claimledger/bytes.hpp"
#include "claimledger/crypto.hpp"
#include "claimledger/ledger.hpp"
#include "claimledger/policy.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace claimledger {

enum class ClaimState : std::uint8_t {
    Draft,
    Reviewed,
    Submitted,
    Approved,
    Paid,
    Acknowledged,
    Closed,
    Rejected,
};

enum class ClaimEvent : std::uint8_t {
    Review,
    Submit,
    Approve,
    Reject,
    Pay,
    Acknowledge,
    Close,
};

inline constexpr ClaimState kAllStates[] = {
    ClaimState::Draft, ClaimState::Reviewed,     ClaimState::Submitted, ClaimState::Approved,
    ClaimState::Paid,  ClaimState::Acknowledged, ClaimState::Closed,    ClaimState::Rejected,
};

inline constexpr ClaimEvent kAllEvents[] = {
    ClaimEvent::Review, ClaimEvent::Submit,      ClaimEvent::Approve, ClaimEvent::Reject,
    ClaimEvent::Pay,    ClaimEvent::Acknowledge, ClaimEvent::Close,
};

std::string_view state_name(ClaimState s);
std::string_view event_name(ClaimEvent e);

/// The claim lifecycle graph. nullopt for any edge not in the graph.
std::optional<ClaimState> next_state(ClaimState from, ClaimEvent event);

enum class ProtocolErrorCode {
    InvalidTransition,
    ReviewError,
    UnbundlingError,
    NotSubmitted,
    NotApproved,
    NotAcknowledged,
    PreconditionFailed,
    UnknownClaim,
    UnknownPolicy,
    UnknownIdentity,
    DuplicateClaim,
};

/// Why a gated step refused to proceed.
enum class RejectCause {
    None,
    CoverageCheck,
    Unbundling,
    ConsentMissing,
    PolicyBinding,
    RoleSet,        // envelope requires the wrong pair of roles
    DigestMismatch, // envelope signs something other than this step's content
    SignerMismatch, // a signature comes from someone other than the claim's party
    Multisig,       // see ProtocolError::verdict
};

std::string_view error_code_name(ProtocolErrorCode code);
std::string_view cause_name(RejectCause cause);

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(ProtocolErrorCode code, RejectCause cause, const std::string& what,
                  std::optional<MultisigVerdict> verdict = std::nullopt)
        : std::runtime_error(what), code(code), cause(cause), verdict(verdict) {}

    ProtocolErrorCode code;
    RejectCause cause;
    std::optional<MultisigVerdict> verdict;
};

struct ClaimDraft {
    std::string policy_id;
    std::string provider_id;
    std::string patient_id;
    std::vector<ClaimLineItem> lines;
    bool consent = false;
};

struct Claim {
    Hash32 claim_id{};
    std::string policy_id;
    std::string provider_id;
    std::string patient_id;
    std::vector<ClaimLineItem> lines;
    std::uint64_t creation_nonce = 0;
    bool consent = false;
    ClaimState state = ClaimState::Draft;

    Money total_submitted() const { return total_amount(lines); }
};

/// Canonical encoding of the claim-id preimage.
Bytes encode_claim_content(const std::string& policy_id, const std::string& provider_id,
                           const std::string& patient_id, std::span<const ClaimLineItem> lines,
                           std::uint64_t creation_nonce);

Hash32 compute_claim_id(const std::string& policy_id, const std::string& provider_id,
                        const std::string& patient_id, std::span<const ClaimLineItem> lines,
                        std::uint64_t creation_nonce);

inline Hash32 compute_claim_id(const Claim& c) {
    return compute_claim_id(c.policy_id, c.provider_id, c.patient_id, c.lines, c.creation_nonce);
}

/// Screens draft lines against the policy. Returns them unchanged when every
/// line passes zeta_check and no bundle rule is violated; otherwise throws
/// ProtocolError (ReviewError or UnbundlingError).
std::vector<ClaimLineItem> review_claim(std::span<const ClaimLineItem> lines,
                                        const InsurancePolicy& policy);

struct LineDecision {
    EncounterCode code;
    Money submitted;
    Money approved;
    Money delta;

    bool operator==(const LineDecision&) const = default;
};

struct ApprovalDecision {
    Hash32 claim_id{};
    std::vector<LineDecision> lines;
    Money total_approved;

    bool rejected() const { return total_approved.cents() == 0; }

    Bytes encode() const;
    static ApprovalDecision decode(ByteView data);
    /// What the insurer and patient co-sign.
    Hash32 digest() const { return sha256(encode()); }

    bool operator==(const ApprovalDecision&) const = default;
};

/// Covered lines are approved at min(submitted, cap); uncovered lines at 0.
ApprovalDecision decide_approval(const Claim& claim, const InsurancePolicy& policy);

struct Acknowledgment {
    Hash32 claim_id{};
    Money received;
    Money total_submitted;
    Money remaining;
    bool overpayment_flag = false;

    Bytes encode() const;
    static Acknowledgment decode(ByteView data);

    bool operator==(const Acknowledgment&) const = default;
};

Acknowledgment compute_acknowledgment(const Hash32& claim_id, Money total_submitted, Money received);

/// What the provider and patient co-sign in the acknowledgment phase.
Hash32 acknowledgment_digest(const Hash32& claim_id, Money received);

// Ledger payload bodies. Claim-scoped payloads lead with the claim id.

struct SubmissionPayload {
    Hash32 claim_id{};
    std::string policy_id;
    std::string provider_id;
    std::string patient_id;
    std::uint64_t creation_nonce = 0;
    std::vector<ClaimLineItem> lines;
    Money total;
    Money patient_copay;
    Money claimable;

    Bytes encode() const;
    static SubmissionPayload decode(ByteView data);
};

struct PaymentPayload {
    Hash32 claim_id{};
    Money received;

    Bytes encode() const;
    static PaymentPayload decode(ByteView data);
};

struct NotePayload {
    Hash32 subject{};
    std::string text;

    Bytes encode() const;
    static NotePayload decode(ByteView data);
};

Bytes encode_identity(const Identity& identity);
Identity decode_identity(ByteView data);
Bytes encode_policy(const InsurancePolicy& policy);
InsurancePolicy decode_policy(ByteView data);

/// Drives claims through the three signature-gated phases and records each
/// step on the ledger. Transitions are serialized per engine.
class ClaimEngine {
public:
    using Clock = std::function<std::int64_t()>;

    ClaimEngine(IdentityRegistry& registry, Ledger& ledger, Clock clock);

    /// Adds to the registry and records IdentityRegistered.
    void register_identity(const Identity& identity);
    /// Patient and insurer must be registered with matching roles.
    void register_policy(const InsurancePolicy& policy);

    const InsurancePolicy& policy(const std::string& policy_id) const;
    bool has_policy(const std::string& policy_id) const;

    Hash32 create_claim(const ClaimDraft& draft, std::uint64_t creation_nonce);
    Claim claim(const Hash32& claim_id) const;
    ClaimState state(const Hash32& claim_id) const;

    /// Raw state-machine step; throws InvalidTransition for off-graph edges.
    ClaimState transition(const Hash32& claim_id, ClaimEvent event);

    /// Phase 1 screening. Draft -> Reviewed, or throws and stays Draft.
    std::vector<ClaimLineItem> review(const Hash32& claim_id);

    /// Phase 1 submission, gated on a Provider+Patient envelope over the claim id.
    LedgerRecord submit(const Hash32& claim_id, const MultiSigEnvelope& envelope);

    /// The decision the insurer would sign. Uses the registered policy unless an
    /// adjudication policy with the same binding is supplied.
    ApprovalDecision propose_approval(const Hash32& claim_id) const;
    ApprovalDecision propose_approval(const Hash32& claim_id, const InsurancePolicy& adjudication) const;

    /// Phase 2, gated on an Insurer+Patient envelope over the decision digest.
    /// A zero total moves the claim to Rejected.
    ApprovalDecision approve(const Hash32& claim_id, const MultiSigEnvelope& envelope);
    ApprovalDecision approve(const Hash32& claim_id, const InsurancePolicy& adjudication,
                             const MultiSigEnvelope& envelope);

    /// Approved -> Paid; records the disbursed amount.
    PaymentPayload disburse_payment(const Hash32& claim_id);

    /// Phase 3, gated on a Provider+Patient envelope over (claim id, received).
    /// Paid -> Acknowledged -> Closed.
    Acknowledgment acknowledge(const Hash32& claim_id, Money received, const MultiSigEnvelope& envelope);

    std::optional<ApprovalDecision> decision(const Hash32& claim_id) const;
    std::optional<Money> payment(const Hash32& claim_id) const;

    LedgerRecord note(const Hash32& subject, const std::string& text);

    const Ledger& ledger() const { return ledger_; }
    const IdentityRegistry& registry() const { return registry_; }

private:
    struct ClaimRecord {
        Claim claim;
        std::optional<ApprovalDecision> decision;
        std::optional<Money> paid;
    };

    ClaimRecord& find_locked(const Hash32& claim_id);
    const ClaimRecord& find_locked(const Hash32& claim_id) const;
    ClaimState step_locked(ClaimRecord& rec, ClaimEvent event);
    void check_envelope_locked(const ClaimRecord& rec, const MultiSigEnvelope& env,
                               std::array<Role, 2> roles, const Hash32& digest,
                               const std::map<Role, std::string>& parties,
                               ProtocolErrorCode failure) const;
    ApprovalDecision propose_locked(const ClaimRecord& rec, const InsurancePolicy& policy) const;
    const InsurancePolicy& adjudication_policy(const Claim& claim, const InsurancePolicy& candidate) const;

    IdentityRegistry& registry_;
    Ledger& ledger_;
    Clock clock_;

    mutable std::mutex mu_;
    std::map<std::string, InsurancePolicy> policies_;
    std::map<Hash32, ClaimRecord> claims_;
};

/// Re-verifies every signature-gated record (ClaimSubmitted, ClaimApproved,
/// AckRecorded) against a registry snapshot: the envelope must be present,
/// bind to the record payload, be signed by the claim's parties, and carry
/// fresh nonces when replayed in ledger order. Returns the first offending
/// record index, if any.
std::optional<std::size_t> replay_signature_gating(std::span<const LedgerRecord> records,
                                                   const IdentityRegistry& snapshot);

} // namespace claimledger
