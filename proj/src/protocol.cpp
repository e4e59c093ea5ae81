#include "claimledger/protocol.hpp"

#include "claimledger/encoding.hpp"

#include <algorithm>

namespace claimledger {

namespace {

void encode_lines(Encoder& enc, std::span<const ClaimLineItem> lines) {
    enc.count(lines.size());
    for (const auto& l : lines) enc.str(l.code.str()).u64(l.amount.cents());
}

std::vector<ClaimLineItem> decode_lines(Decoder& dec) {
    std::vector<ClaimLineItem> lines;
    auto n = dec.count();
    for (std::size_t i = 0; i < n; ++i) {
        auto code = dec.str();
        auto amount = dec.u64();
        lines.push_back({EncounterCode(std::move(code)), Money(amount)});
    }
    return lines;
}

[[noreturn]] void invalid_transition(ClaimState from, ClaimEvent event) {
    throw ProtocolError(ProtocolErrorCode::InvalidTransition, RejectCause::None,
                        "invalid transition: " + std::string(event_name(event)) + " from " +
                            std::string(state_name(from)));
}

std::string describe_line(const ClaimLineItem& l) {
    return l.code.str() + " amount " + std::to_string(l.amount.cents());
}

} // namespace

std::string_view state_name(ClaimState s) {
    switch (s) {
    case ClaimState::Draft: return "Draft";
    case ClaimState::Reviewed: return "Reviewed";
    case ClaimState::Submitted: return "Submitted";
    case ClaimState::Approved: return "Approved";
    case ClaimState::Paid: return "Paid";
    case ClaimState::Acknowledged: return "Acknowledged";
    case ClaimState::Closed: return "Closed";
    case ClaimState::Rejected: return "Rejected";
    }
    return "Unknown";
}

std::string_view event_name(ClaimEvent e) {
    switch (e) {
    case ClaimEvent::Review: return "Review";
    case ClaimEvent::Submit: return "Submit";
    case ClaimEvent::Approve: return "Approve";
    case ClaimEvent::Reject: return "Reject";
    case ClaimEvent::Pay: return "Pay";
    case ClaimEvent::Acknowledge: return "Acknowledge";
    case ClaimEvent::Close: return "Close";
    }
    return "Unknown";
}

std::optional<ClaimState> next_state(ClaimState from, ClaimEvent event) {
    using S = ClaimState;
    using E = ClaimEvent;
    switch (event) {
    case E::Review: if (from == S::Draft) return S::Reviewed; break;
    case E::Submit: if (from == S::Reviewed) return S::Submitted; break;
    case E::Approve: if (from == S::Submitted) return S::Approved; break;
    case E::Pay: if (from == S::Approved) return S::Paid; break;
    case E::Acknowledge: if (from == S::Paid) return S::Acknowledged; break;
    case E::Close: if (from == S::Acknowledged) return S::Closed; break;
    case E::Reject:
        if (from == S::Reviewed || from == S::Submitted || from == S::Approved) return S::Rejected;
        break;
    }
    return std::nullopt;
}

std::string_view error_code_name(ProtocolErrorCode code) {
    switch (code) {
    case ProtocolErrorCode::InvalidTransition: return "InvalidTransition";
    case ProtocolErrorCode::ReviewError: return "ReviewError";
    case ProtocolErrorCode::UnbundlingError: return "UnbundlingError";
    case ProtocolErrorCode::NotSubmitted: return "NotSubmitted";
    case ProtocolErrorCode::NotApproved: return "NotApproved";
    case ProtocolErrorCode::NotAcknowledged: return "NotAcknowledged";
    case ProtocolErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ProtocolErrorCode::UnknownClaim: return "UnknownClaim";
    case ProtocolErrorCode::UnknownPolicy: return "UnknownPolicy";
    case ProtocolErrorCode::UnknownIdentity: return "UnknownIdentity";
    case ProtocolErrorCode::DuplicateClaim: return "DuplicateClaim";
    }
    return "Unknown";
}

std::string_view cause_name(RejectCause cause) {
    switch (cause) {
    case RejectCause::None: return "None";
    case RejectCause::CoverageCheck: return "CoverageCheck";
    case RejectCause::Unbundling: return "Unbundling";
    case RejectCause::ConsentMissing: return "ConsentMissing";
    case RejectCause::PolicyBinding: return "PolicyBinding";
    case RejectCause::RoleSet: return "RoleSet";
    case RejectCause::DigestMismatch: return "DigestMismatch";
    case RejectCause::SignerMismatch: return "SignerMismatch";
    case RejectCause::Multisig: return "Multisig";
    }
    return "Unknown";
}

Bytes encode_claim_content(const std::string& policy_id, const std::string& provider_id,
                           const std::string& patient_id, std::span<const ClaimLineItem> lines,
                           std::uint64_t creation_nonce) {
    Encoder enc;
    enc.str(policy_id).str(provider_id).str(patient_id);
    encode_lines(enc, lines);
    enc.u64(creation_nonce);
    return std::move(enc).take();
}

Hash32 compute_claim_id(const std::string& policy_id, const std::string& provider_id,
                        const std::string& patient_id, std::span<const ClaimLineItem> lines,
                        std::uint64_t creation_nonce) {
    return sha256(encode_claim_content(policy_id, provider_id, patient_id, lines, creation_nonce));
}

std::vector<ClaimLineItem> review_claim(std::span<const ClaimLineItem> lines,
                                        const InsurancePolicy& policy) {
    if (lines.empty()) {
        throw ProtocolError(ProtocolErrorCode::PreconditionFailed, RejectCause::None,
                            "claim has no line items");
    }
    for (const auto& line : lines) {
        if (!zeta_check(line, policy)) {
            throw ProtocolError(ProtocolErrorCode::ReviewError, RejectCause::CoverageCheck,
                                "invalid line " + describe_line(line) + " under policy " +
                                    policy.policy_id());
        }
    }
    auto violated = detect_unbundling(lines, policy);
    if (!violated.empty()) {
        throw ProtocolError(ProtocolErrorCode::UnbundlingError, RejectCause::Unbundling,
                            "components of bundle " + violated.front().bundle_code.str() +
                                " billed separately");
    }
    return {lines.begin(), lines.end()};
}

Bytes ApprovalDecision::encode() const {
    Encoder enc;
    enc.fixed(claim_id).count(lines.size());
    for (const auto& l : lines) {
        enc.str(l.code.str()).u64(l.submitted.cents()).u64(l.approved.cents()).u64(l.delta.cents());
    }
    enc.u64(total_approved.cents());
    return std::move(enc).take();
}

ApprovalDecision ApprovalDecision::decode(ByteView data) {
    Decoder dec(data);
    ApprovalDecision d;
    d.claim_id = dec.hash();
    auto n = dec.count();
    for (std::size_t i = 0; i < n; ++i) {
        auto code = dec.str();
        Money submitted(dec.u64());
        Money approved(dec.u64());
        Money delta(dec.u64());
        d.lines.push_back({EncounterCode(std::move(code)), submitted, approved, delta});
    }
    d.total_approved = Money(dec.u64());
    dec.finish();
    return d;
}

ApprovalDecision decide_approval(const Claim& claim, const InsurancePolicy& policy) {
    ApprovalDecision d;
    d.claim_id = claim.claim_id;
    for (const auto& line : claim.lines) {
        Money approved;
        if (zeta_check(line, policy)) {
            approved = line.amount;
        } else if (auto cap = policy.cap(line.code)) {
            approved = std::min(line.amount, *cap);
        }
        d.lines.push_back({line.code, line.amount, approved, line.amount - approved});
        d.total_approved += approved;
    }
    return d;
}

Bytes Acknowledgment::encode() const {
    Encoder enc;
    enc.fixed(claim_id)
        .u64(received.cents())
        .u64(total_submitted.cents())
        .u64(remaining.cents())
        .u8(overpayment_flag ? 1 : 0);
    return std::move(enc).take();
}

Acknowledgment Acknowledgment::decode(ByteView data) {
    Decoder dec(data);
    Acknowledgment a;
    a.claim_id = dec.hash();
    a.received = Money(dec.u64());
    a.total_submitted = Money(dec.u64());
    a.remaining = Money(dec.u64());
    a.overpayment_flag = dec.u8() != 0;
    dec.finish();
    return a;
}

Acknowledgment compute_acknowledgment(const Hash32& claim_id, Money total_submitted, Money received) {
    Acknowledgment a;
    a.claim_id = claim_id;
    a.received = received;
    a.total_submitted = total_submitted;
    a.overpayment_flag = received > total_submitted;
    a.remaining = a.overpayment_flag ? Money{} : total_submitted - received;
    return a;
}

Hash32 acknowledgment_digest(const Hash32& claim_id, Money received) {
    Encoder enc;
    enc.str("ack").fixed(claim_id).u64(received.cents());
    return sha256(enc.data());
}

Bytes SubmissionPayload::encode() const {
    Encoder enc;
    enc.fixed(claim_id).str(policy_id).str(provider_id).str(patient_id).u64(creation_nonce);
    encode_lines(enc, lines);
    enc.u64(total.cents()).u64(patient_copay.cents()).u64(claimable.cents());
    return std::move(enc).take();
}

SubmissionPayload SubmissionPayload::decode(ByteView data) {
    Decoder dec(data);
    SubmissionPayload p;
    p.claim_id = dec.hash();
    p.policy_id = dec.str();
    p.provider_id = dec.str();
    p.patient_id = dec.str();
    p.creation_nonce = dec.u64();
    p.lines = decode_lines(dec);
    p.total = Money(dec.u64());
    p.patient_copay = Money(dec.u64());
    p.claimable = Money(dec.u64());
    dec.finish();
    return p;
}

Bytes PaymentPayload::encode() const {
    Encoder enc;
    enc.fixed(claim_id).u64(received.cents());
    return std::move(enc).take();
}

PaymentPayload PaymentPayload::decode(ByteView data) {
    Decoder dec(data);
    PaymentPayload p;
    p.claim_id = dec.hash();
    p.received = Money(dec.u64());
    dec.finish();
    return p;
}

Bytes NotePayload::encode() const {
    Encoder enc;
    enc.fixed(subject).str(text);
    return std::move(enc).take();
}

NotePayload NotePayload::decode(ByteView data) {
    Decoder dec(data);
    NotePayload p;
    p.subject = dec.hash();
    p.text = dec.str();
    dec.finish();
    return p;
}

Bytes encode_identity(const Identity& identity) {
    Encoder enc;
    enc.str(identity.id).u8(static_cast<std::uint8_t>(identity.role)).fixed(identity.public_key);
    return std::move(enc).take();
}

Identity decode_identity(ByteView data) {
    Decoder dec(data);
    Identity id;
    id.id = dec.str();
    id.role = static_cast<Role>(dec.u8());
    auto pk = dec.fixed(32);
    std::copy(pk.begin(), pk.end(), id.public_key.begin());
    dec.finish();
    return id;
}

Bytes encode_policy(const InsurancePolicy& policy) {
    Encoder enc;
    enc.str(policy.policy_id()).str(policy.patient_id()).str(policy.insurer_id());
    enc.count(policy.coverage().size());
    for (const auto& [code, cap] : policy.coverage()) enc.str(code.str()).u64(cap.cents());
    enc.u64(policy.copay().cents());
    enc.count(policy.bundles().size());
    for (const auto& rule : policy.bundles()) {
        enc.str(rule.bundle_code.str()).count(rule.components.size());
        for (const auto& c : rule.components) enc.str(c.str());
        enc.u64(rule.bundled_cap.cents());
    }
    return std::move(enc).take();
}

InsurancePolicy decode_policy(ByteView data) {
    Decoder dec(data);
    auto policy_id = dec.str();
    auto patient_id = dec.str();
    auto insurer_id = dec.str();
    std::map<EncounterCode, Money> coverage;
    auto n = dec.count();
    for (std::size_t i = 0; i < n; ++i) {
        auto code = dec.str();
        coverage.emplace(EncounterCode(std::move(code)), Money(dec.u64()));
    }
    Money copay(dec.u64());
    std::vector<BundleRule> bundles;
    auto nb = dec.count();
    for (std::size_t i = 0; i < nb; ++i) {
        BundleRule rule{EncounterCode(dec.str()), {}, Money{}};
        auto nc = dec.count();
        for (std::size_t k = 0; k < nc; ++k) rule.components.insert(EncounterCode(dec.str()));
        rule.bundled_cap = Money(dec.u64());
        bundles.push_back(std::move(rule));
    }
    dec.finish();
    return InsurancePolicy(std::move(policy_id), std::move(patient_id), std::move(insurer_id),
                           std::move(coverage), copay, std::move(bundles));
}

// ---------------------------------------------------------------------------
// ClaimEngine

ClaimEngine::ClaimEngine(IdentityRegistry& registry, Ledger& ledger, Clock clock)
    : registry_(registry), ledger_(ledger), clock_(std::move(clock)) {}

void ClaimEngine::register_identity(const Identity& identity) {
    std::lock_guard lock(mu_);
    Identity clean = identity;
    clean.nonce = 0;
    registry_.add(clean);
    ledger_.append(EventKind::IdentityRegistered, encode_identity(clean), std::nullopt, clock_());
}

void ClaimEngine::register_policy(const InsurancePolicy& policy) {
    std::lock_guard lock(mu_);
    auto require = [&](const std::string& id, Role role) {
        auto ident = registry_.find(id);
        if (!ident || ident->role != role) {
            throw ProtocolError(ProtocolErrorCode::UnknownIdentity, RejectCause::None,
                                "policy " + policy.policy_id() + " references unregistered " +
                                    std::string(role_name(role)) + " " + id);
        }
    };
    require(policy.patient_id(), Role::Patient);
    require(policy.insurer_id(), Role::Insurer);
    if (policies_.contains(policy.policy_id())) {
        throw PolicyError("duplicate policy id " + policy.policy_id());
    }
    policies_.emplace(policy.policy_id(), policy);
    ledger_.append(EventKind::PolicyRegistered, encode_policy(policy), std::nullopt, clock_());
}

const InsurancePolicy& ClaimEngine::policy(const std::string& policy_id) const {
    std::lock_guard lock(mu_);
    auto it = policies_.find(policy_id);
    if (it == policies_.end()) {
        throw ProtocolError(ProtocolErrorCode::UnknownPolicy, RejectCause::None,
                            "unknown policy " + policy_id);
    }
    return it->second;
}

bool ClaimEngine::has_policy(const std::string& policy_id) const {
    std::lock_guard lock(mu_);
    return policies_.contains(policy_id);
}

Hash32 ClaimEngine::create_claim(const ClaimDraft& draft, std::uint64_t creation_nonce) {
    std::lock_guard lock(mu_);
    if (!policies_.contains(draft.policy_id)) {
        throw ProtocolError(ProtocolErrorCode::UnknownPolicy, RejectCause::None,
                            "unknown policy " + draft.policy_id);
    }
    for (auto [id, role] : {std::pair{&draft.provider_id, Role::Provider},
                            std::pair{&draft.patient_id, Role::Patient}}) {
        auto ident = registry_.find(*id);
        if (!ident || ident->role != role) {
            throw ProtocolError(ProtocolErrorCode::UnknownIdentity, RejectCause::None,
                                "claim references unregistered " + std::string(role_name(role)) +
                                    " " + *id);
        }
    }
    for (const auto& line : draft.lines) {
        if (line.amount.cents() == 0) {
            throw ProtocolError(ProtocolErrorCode::PreconditionFailed, RejectCause::None,
                                "line " + line.code.str() + " has zero amount");
        }
    }
    Claim c;
    c.policy_id = draft.policy_id;
    c.provider_id = draft.provider_id;
    c.patient_id = draft.patient_id;
    c.lines = draft.lines;
    c.creation_nonce = creation_nonce;
    c.consent = draft.consent;
    c.claim_id = compute_claim_id(c);
    if (claims_.contains(c.claim_id)) {
        throw ProtocolError(ProtocolErrorCode::DuplicateClaim, RejectCause::None,
                            "claim " + to_hex(c.claim_id) + " already exists");
    }
    auto id = c.claim_id;
    claims_.emplace(id, ClaimRecord{std::move(c), std::nullopt, std::nullopt});
    return id;
}

ClaimEngine::ClaimRecord& ClaimEngine::find_locked(const Hash32& claim_id) {
    auto it = claims_.find(claim_id);
    if (it == claims_.end()) {
        throw ProtocolError(ProtocolErrorCode::UnknownClaim, RejectCause::None,
                            "unknown claim " + to_hex(claim_id));
    }
    return it->second;
}

const ClaimEngine::ClaimRecord& ClaimEngine::find_locked(const Hash32& claim_id) const {
    return const_cast<ClaimEngine*>(this)->find_locked(claim_id);
}

Claim ClaimEngine::claim(const Hash32& claim_id) const {
    std::lock_guard lock(mu_);
    return find_locked(claim_id).claim;
}

ClaimState ClaimEngine::state(const Hash32& claim_id) const {
    std::lock_guard lock(mu_);
    return find_locked(claim_id).claim.state;
}

std::optional<ApprovalDecision> ClaimEngine::decision(const Hash32& claim_id) const {
    std::lock_guard lock(mu_);
    return find_locked(claim_id).decision;
}

std::optional<Money> ClaimEngine::payment(const Hash32& claim_id) const {
    std::lock_guard lock(mu_);
    return find_locked(claim_id).paid;
}

ClaimState ClaimEngine::step_locked(ClaimRecord& rec, ClaimEvent event) {
    auto next = next_state(rec.claim.state, event);
    if (!next) invalid_transition(rec.claim.state, event);
    rec.claim.state = *next;
    return *next;
}

ClaimState ClaimEngine::transition(const Hash32& claim_id, ClaimEvent event) {
    std::lock_guard lock(mu_);
    return step_locked(find_locked(claim_id), event);
}

std::vector<ClaimLineItem> ClaimEngine::review(const Hash32& claim_id) {
    std::lock_guard lock(mu_);
    auto& rec = find_locked(claim_id);
    if (!next_state(rec.claim.state, ClaimEvent::Review)) {
        invalid_transition(rec.claim.state, ClaimEvent::Review);
    }
    auto accepted = review_claim(rec.claim.lines, policies_.at(rec.claim.policy_id));
    step_locked(rec, ClaimEvent::Review);
    return accepted;
}

void ClaimEngine::check_envelope_locked(const ClaimRecord& rec, const MultiSigEnvelope& env,
                                        std::array<Role, 2> roles, const Hash32& digest,
                                        const std::map<Role, std::string>& parties,
                                        ProtocolErrorCode failure) const {
    const auto& hex_id = to_hex(rec.claim.claim_id);
    if (env.required_roles != roles) {
        throw ProtocolError(failure, RejectCause::RoleSet,
                            "envelope requires the wrong roles for claim " + hex_id);
    }
    if (env.payload_digest != digest) {
        throw ProtocolError(failure, RejectCause::DigestMismatch,
                            "envelope digest does not bind claim " + hex_id);
    }
    for (const auto& sig : env.signatures) {
        auto it = parties.find(sig.signer_role);
        if (it != parties.end() && it->second != sig.signer_id) {
            throw ProtocolError(failure, RejectCause::SignerMismatch,
                                sig.signer_id + " is not the claim's " +
                                    std::string(role_name(sig.signer_role)));
        }
    }
}

LedgerRecord ClaimEngine::submit(const Hash32& claim_id, const MultiSigEnvelope& envelope) {
    std::lock_guard lock(mu_);
    auto& rec = find_locked(claim_id);
    const auto& c = rec.claim;
    if (!next_state(c.state, ClaimEvent::Submit)) invalid_transition(c.state, ClaimEvent::Submit);
    if (!c.consent) {
        throw ProtocolError(ProtocolErrorCode::NotSubmitted, RejectCause::ConsentMissing,
                            "patient has not consented to sharing claim data");
    }
    const auto& pol = policies_.at(c.policy_id);
    if (pol.patient_id() != c.patient_id) {
        throw ProtocolError(ProtocolErrorCode::NotSubmitted, RejectCause::PolicyBinding,
                            "policy " + pol.policy_id() + " does not cover patient " + c.patient_id);
    }
    check_envelope_locked(rec, envelope, {Role::Provider, Role::Patient}, c.claim_id,
                          {{Role::Provider, c.provider_id}, {Role::Patient, c.patient_id}},
                          ProtocolErrorCode::NotSubmitted);
    auto verdict = registry_.consume_multisig(envelope);
    if (verdict != MultisigVerdict::Valid) {
        throw ProtocolError(ProtocolErrorCode::NotSubmitted, RejectCause::Multisig,
                            "claim not submitted: " + std::string(verdict_name(verdict)), verdict);
    }

    auto split = compute_copay_split(c.total_submitted(), pol);
    SubmissionPayload payload{c.claim_id,  c.policy_id, c.provider_id,        c.patient_id,
                              c.creation_nonce, c.lines, c.total_submitted(), split.patient_share,
                              split.claimable};
    step_locked(rec, ClaimEvent::Submit);
    return ledger_.append(EventKind::ClaimSubmitted, payload.encode(), envelope, clock_());
}

const InsurancePolicy& ClaimEngine::adjudication_policy(const Claim& claim,
                                                        const InsurancePolicy& candidate) const {
    const auto& registered = policies_.at(claim.policy_id);
    if (candidate.policy_id() != registered.policy_id() ||
        candidate.patient_id() != registered.patient_id() ||
        candidate.insurer_id() != registered.insurer_id()) {
        throw ProtocolError(ProtocolErrorCode::PreconditionFailed, RejectCause::PolicyBinding,
                            "adjudication policy does not match the claim's policy binding");
    }
    return candidate;
}

ApprovalDecision ClaimEngine::propose_locked(const ClaimRecord& rec, const InsurancePolicy& policy) const {
    if (rec.claim.state != ClaimState::Submitted) {
        invalid_transition(rec.claim.state, ClaimEvent::Approve);
    }
    return decide_approval(rec.claim, adjudication_policy(rec.claim, policy));
}

ApprovalDecision ClaimEngine::propose_approval(const Hash32& claim_id) const {
    std::lock_guard lock(mu_);
    const auto& rec = find_locked(claim_id);
    return propose_locked(rec, policies_.at(rec.claim.policy_id));
}

ApprovalDecision ClaimEngine::propose_approval(const Hash32& claim_id,
                                               const InsurancePolicy& adjudication) const {
    std::lock_guard lock(mu_);
    return propose_locked(find_locked(claim_id), adjudication);
}

ApprovalDecision ClaimEngine::approve(const Hash32& claim_id, const MultiSigEnvelope& envelope) {
    InsurancePolicy registered = policy(claim(claim_id).policy_id);
    return approve(claim_id, registered, envelope);
}

ApprovalDecision ClaimEngine::approve(const Hash32& claim_id, const InsurancePolicy& adjudication,
                                      const MultiSigEnvelope& envelope) {
    std::lock_guard lock(mu_);
    auto& rec = find_locked(claim_id);
    auto decision = propose_locked(rec, adjudication);
    const auto& pol = policies_.at(rec.claim.policy_id);
    check_envelope_locked(rec, envelope, {Role::Insurer, Role::Patient}, decision.digest(),
                          {{Role::Insurer, pol.insurer_id()}, {Role::Patient, rec.claim.patient_id}},
                          ProtocolErrorCode::NotApproved);
    auto verdict = registry_.consume_multisig(envelope);
    if (verdict != MultisigVerdict::Valid) {
        throw ProtocolError(ProtocolErrorCode::NotApproved, RejectCause::Multisig,
                            "approval not delivered: " + std::string(verdict_name(verdict)), verdict);
    }
    step_locked(rec, decision.rejected() ? ClaimEvent::Reject : ClaimEvent::Approve);
    rec.decision = decision;
    ledger_.append(EventKind::ClaimApproved, decision.encode(), envelope, clock_());
    return decision;
}

PaymentPayload ClaimEngine::disburse_payment(const Hash32& claim_id) {
    std::lock_guard lock(mu_);
    auto& rec = find_locked(claim_id);
    if (!next_state(rec.claim.state, ClaimEvent::Pay)) {
        invalid_transition(rec.claim.state, ClaimEvent::Pay);
    }
    if (!rec.decision || rec.decision->rejected()) {
        throw ProtocolError(ProtocolErrorCode::PreconditionFailed, RejectCause::None,
                            "nothing approved for payment");
    }
    PaymentPayload payment{rec.claim.claim_id, rec.decision->total_approved};
    step_locked(rec, ClaimEvent::Pay);
    rec.paid = payment.received;
    ledger_.append(EventKind::PaymentReceived, payment.encode(), std::nullopt, clock_());
    return payment;
}

Acknowledgment ClaimEngine::acknowledge(const Hash32& claim_id, Money received,
                                        const MultiSigEnvelope& envelope) {
    std::lock_guard lock(mu_);
    auto& rec = find_locked(claim_id);
    if (!next_state(rec.claim.state, ClaimEvent::Acknowledge)) {
        invalid_transition(rec.claim.state, ClaimEvent::Acknowledge);
    }
    check_envelope_locked(rec, envelope, {Role::Provider, Role::Patient},
                          acknowledgment_digest(claim_id, received),
                          {{Role::Provider, rec.claim.provider_id}, {Role::Patient, rec.claim.patient_id}},
                          ProtocolErrorCode::NotAcknowledged);
    auto verdict = registry_.consume_multisig(envelope);
    if (verdict != MultisigVerdict::Valid) {
        throw ProtocolError(ProtocolErrorCode::NotAcknowledged, RejectCause::Multisig,
                            "acknowledgment not sent: " + std::string(verdict_name(verdict)), verdict);
    }
    auto ack = compute_acknowledgment(claim_id, rec.claim.total_submitted(), received);
    step_locked(rec, ClaimEvent::Acknowledge);
    ledger_.append(EventKind::AckRecorded, ack.encode(), envelope, clock_());
    step_locked(rec, ClaimEvent::Close);
    return ack;
}

LedgerRecord ClaimEngine::note(const Hash32& subject, const std::string& text) {
    std::lock_guard lock(mu_);
    return ledger_.append(EventKind::ScenarioNote, NotePayload{subject, text}.encode(), std::nullopt,
                          clock_());
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> replay_signature_gating(std::span<const LedgerRecord> records,
                                                   const IdentityRegistry& snapshot) {
    auto registry = snapshot.fresh_copy();
    std::map<std::string, std::string> insurer_of_policy;
    struct Parties {
        std::string provider, patient, insurer;
        Money total;
    };
    std::map<Hash32, Parties> parties;

    auto gate = [&](const LedgerRecord& r, std::array<Role, 2> roles, const Hash32& digest,
                    const std::map<Role, std::string>& expected) {
        if (!r.envelope) return false;
        const auto& env = *r.envelope;
        if (env.required_roles != roles || env.payload_digest != digest) return false;
        for (const auto& sig : env.signatures) {
            auto it = expected.find(sig.signer_role);
            if (it == expected.end() || it->second != sig.signer_id) return false;
        }
        return registry.verify_multisig(env);
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        try {
            switch (r.kind) {
            case EventKind::PolicyRegistered: {
                auto pol = decode_policy(r.payload);
                insurer_of_policy[pol.policy_id()] = pol.insurer_id();
                break;
            }
            case EventKind::ClaimSubmitted: {
                auto p = SubmissionPayload::decode(r.payload);
                if (compute_claim_id(p.policy_id, p.provider_id, p.patient_id, p.lines,
                                     p.creation_nonce) != p.claim_id) {
                    return i;
                }
                auto pol = insurer_of_policy.find(p.policy_id);
                if (pol == insurer_of_policy.end()) return i;
                parties[p.claim_id] = {p.provider_id, p.patient_id, pol->second, p.total};
                if (!gate(r, {Role::Provider, Role::Patient}, p.claim_id,
                          {{Role::Provider, p.provider_id}, {Role::Patient, p.patient_id}})) {
                    return i;
                }
                break;
            }
            case EventKind::ClaimApproved: {
                auto d = ApprovalDecision::decode(r.payload);
                auto it = parties.find(d.claim_id);
                if (it == parties.end()) return i;
                if (!gate(r, {Role::Insurer, Role::Patient}, d.digest(),
                          {{Role::Insurer, it->second.insurer}, {Role::Patient, it->second.patient}})) {
                    return i;
                }
                break;
            }
            case EventKind::AckRecorded: {
                auto a = Acknowledgment::decode(r.payload);
                auto it = parties.find(a.claim_id);
                if (it == parties.end()) return i;
                if (a != compute_acknowledgment(a.claim_id, it->second.total, a.received)) return i;
                if (!gate(r, {Role::Provider, Role::Patient}, acknowledgment_digest(a.claim_id, a.received),
                          {{Role::Provider, it->second.provider}, {Role::Patient, it->second.patient}})) {
                    return i;
                }
                break;
            }
            default:
                break;
            }
        } catch (const std::exception&) {
            return i;
        }
    }
    return std::nullopt;
}

} // namespace claimledger
