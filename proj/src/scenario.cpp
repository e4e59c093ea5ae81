#include "claimledger/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace claimledger {

namespace {

constexpr std::int64_t kScenarioEpochMs = 1'700'000'000'000;
constexpr std::int64_t kScenarioTickMs = 1'000;

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const E (&values)[N], std::string_view (*name)(E), const char* what) {
    for (auto v : values) {
        if (name(v) == s) return v;
    }
    throw ConfigError(fmt::format("unknown {} '{}'", what, s));
}

constexpr FraudType kAllFraudTypes[] = {
    FraudType::PhantomBilling, FraudType::Upcoding,          FraudType::Unbundling,
    FraudType::Kickbacks,      FraudType::IdentityTheft,     FraudType::PolicyholderFraud,
    FraudType::PharmacyFraud,
};

constexpr Phase kAllPhases[] = {Phase::Phase1, Phase::Phase2, Phase::Phase3};

constexpr OutcomeReason kAllReasons[] = {
    OutcomeReason::None,
    OutcomeReason::PatientRefusedSign,
    OutcomeReason::SignatureInvalid,
    OutcomeReason::CoverageCheckFailed,
    OutcomeReason::UnbundlingDetected,
    OutcomeReason::PolicyBindingMismatch,
    OutcomeReason::ConsentMissing,
    OutcomeReason::SubmissionRejected,
    OutcomeReason::ApprovalRefused,
    OutcomeReason::ApprovalRejected,
    OutcomeReason::AcknowledgmentRefused,
};

Bytes seed_bytes(ScenarioRng& rng) {
    Bytes seed;
    seed.reserve(32);
    for (int i = 0; i < 4; ++i) {
        auto v = rng();
        for (int b = 0; b < 8; ++b) seed.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
    return seed;
}

std::uint64_t uniform(ScenarioRng& rng, std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

template <typename T>
const T& pick(ScenarioRng& rng, const std::vector<T>& items) {
    return items[uniform(rng, 0, items.size() - 1)];
}

OutcomeReason reason_for(const ProtocolError& e) {
    switch (e.cause) {
    case RejectCause::CoverageCheck: return OutcomeReason::CoverageCheckFailed;
    case RejectCause::Unbundling: return OutcomeReason::UnbundlingDetected;
    case RejectCause::PolicyBinding: return OutcomeReason::PolicyBindingMismatch;
    case RejectCause::ConsentMissing: return OutcomeReason::ConsentMissing;
    case RejectCause::SignerMismatch: return OutcomeReason::SignatureInvalid;
    case RejectCause::Multisig:
        switch (e.verdict.value_or(MultisigVerdict::Valid)) {
        case MultisigVerdict::BadSignature:
        case MultisigVerdict::UnknownSigner:
        case MultisigVerdict::RoleMismatch:
            return OutcomeReason::SignatureInvalid;
        default:
            return OutcomeReason::SubmissionRejected;
        }
    default:
        return OutcomeReason::SubmissionRejected;
    }
}

/// The lines the provider puts on the claim, honest or mutated.
std::vector<ClaimLineItem> stage_claim_lines(const FraudScenario& sc, ScenarioRng& rng) {
    auto lines = sc.ground_truth.lines;
    const auto& policy = sc.policy;
    auto billed = [&](const EncounterCode& code) {
        return std::any_of(lines.begin(), lines.end(), [&](const ClaimLineItem& l) { return l.code == code; });
    };

    switch (sc.provider.tactic) {
    case Tactic::PhantomLine: {
        std::vector<EncounterCode> spare;
        for (const auto& [code, cap] : policy.coverage()) {
            if (!billed(code)) spare.push_back(code);
        }
        if (spare.empty()) throw ConfigError("phantom billing needs a covered code the patient did not receive");
        const auto& code = pick(rng, spare);
        lines.push_back({code, Money(uniform(rng, 1, policy.cap(code)->cents()))});
        break;
    }
    case Tactic::Upcode: {
        auto i = uniform(rng, 0, lines.size() - 1);
        std::vector<EncounterCode> pricier;
        for (const auto& [code, cap] : policy.coverage()) {
            if (!billed(code) && cap > lines[i].amount) pricier.push_back(code);
        }
        if (!pricier.empty()) {
            const auto& code = pick(rng, pricier);
            lines[i] = {code, Money(uniform(rng, lines[i].amount.cents() + 1, policy.cap(code)->cents()))};
        } else {
            auto cap = policy.cap(lines[i].code).value_or(lines[i].amount);
            lines[i].amount = lines[i].amount + Money(uniform(rng, 1, cap.cents()));
        }
        break;
    }
    case Tactic::Unbundle: {
        if (policy.bundles().empty()) throw ConfigError("unbundling needs a bundle rule in the policy");
        std::vector<BundleRule> rendered;
        for (const auto& rule : policy.bundles()) {
            if (billed(rule.bundle_code)) rendered.push_back(rule);
        }
        const auto& rule = rendered.empty() ? pick(rng, policy.bundles()) : pick(rng, rendered);
        std::erase_if(lines, [&](const ClaimLineItem& l) { return l.code == rule.bundle_code; });
        for (const auto& c : rule.components) lines.push_back({c, *policy.cap(c)});
        break;
    }
    default:
        break;
    }
    return lines;
}

} // namespace

std::string_view fraud_type_name(FraudType t) {
    switch (t) {
    case FraudType::PhantomBilling: return "PhantomBilling";
    case FraudType::Upcoding: return "Upcoding";
    case FraudType::Unbundling: return "Unbundling";
    case FraudType::Kickbacks: return "Kickbacks";
    case FraudType::IdentityTheft: return "IdentityTheft";
    case FraudType::PolicyholderFraud: return "PolicyholderFraud";
    case FraudType::PharmacyFraud: return "PharmacyFraud";
    }
    return "Unknown";
}

std::string_view culpability_name(Culpability c) {
    return c == Culpability::Malicious ? "Malicious" : "NonMalicious";
}

std::map<Role, Culpability> classify_impact(FraudType type) {
    using C = Culpability;
    switch (type) {
    case FraudType::PhantomBilling:
    case FraudType::Upcoding:
    case FraudType::Unbundling:
    case FraudType::Kickbacks:
    case FraudType::PharmacyFraud:
        return {{Role::Provider, C::Malicious}, {Role::Insurer, C::NonMalicious}, {Role::Patient, C::NonMalicious}};
    case FraudType::IdentityTheft:
    case FraudType::PolicyholderFraud:
        return {{Role::Provider, C::NonMalicious}, {Role::Insurer, C::NonMalicious}, {Role::Patient, C::Malicious}};
    }
    throw UnknownFraudType("unknown fraud type");
}

std::map<Role, Culpability> classify_impact(std::string_view fraud_name) {
    if (fraud_name == "PolicyholderMismatch") return classify_impact(FraudType::PolicyholderFraud);
    for (auto t : kAllFraudTypes) {
        if (fraud_type_name(t) == fraud_name) return classify_impact(t);
    }
    throw UnknownFraudType("unknown fraud type: " + std::string(fraud_name));
}

std::string_view scenario_name(ScenarioName n) {
    switch (n) {
    case ScenarioName::PhantomBilling: return "PhantomBilling";
    case ScenarioName::Upcoding: return "Upcoding";
    case ScenarioName::Unbundling: return "Unbundling";
    case ScenarioName::IdentityTheft: return "IdentityTheft";
    case ScenarioName::PolicyholderMismatch: return "PolicyholderMismatch";
    case ScenarioName::HappyPath: return "HappyPath";
    }
    return "Unknown";
}

ScenarioName parse_scenario_name(std::string_view s) {
    return parse_enum(s, kAllScenarios, scenario_name, "scenario");
}

std::string_view phase_name(Phase p) {
    switch (p) {
    case Phase::Phase1: return "Phase1";
    case Phase::Phase2: return "Phase2";
    case Phase::Phase3: return "Phase3";
    }
    return "Unknown";
}

Phase parse_phase(std::string_view s) {
    return parse_enum(s, kAllPhases, phase_name, "phase");
}

std::string_view reason_name(OutcomeReason r) {
    switch (r) {
    case OutcomeReason::None: return "None";
    case OutcomeReason::PatientRefusedSign: return "PatientRefusedSign";
    case OutcomeReason::SignatureInvalid: return "SignatureInvalid";
    case OutcomeReason::CoverageCheckFailed: return "CoverageCheckFailed";
    case OutcomeReason::UnbundlingDetected: return "UnbundlingDetected";
    case OutcomeReason::PolicyBindingMismatch: return "PolicyBindingMismatch";
    case OutcomeReason::ConsentMissing: return "ConsentMissing";
    case OutcomeReason::SubmissionRejected: return "SubmissionRejected";
    case OutcomeReason::ApprovalRefused: return "ApprovalRefused";
    case OutcomeReason::ApprovalRejected: return "ApprovalRejected";
    case OutcomeReason::AcknowledgmentRefused: return "AcknowledgmentRefused";
    }
    return "Unknown";
}

OutcomeReason parse_reason(std::string_view s) {
    return parse_enum(s, kAllReasons, reason_name, "outcome reason");
}

ExpectedOutcome catalog_expectation(ScenarioName name) {
    switch (name) {
    case ScenarioName::PhantomBilling: return {true, Phase::Phase1, OutcomeReason::PatientRefusedSign};
    case ScenarioName::Upcoding: return {true, Phase::Phase1, OutcomeReason::PatientRefusedSign};
    case ScenarioName::Unbundling: return {true, Phase::Phase1, OutcomeReason::UnbundlingDetected};
    case ScenarioName::IdentityTheft: return {true, Phase::Phase1, OutcomeReason::SignatureInvalid};
    case ScenarioName::PolicyholderMismatch: return {true, Phase::Phase1, OutcomeReason::PolicyBindingMismatch};
    case ScenarioName::HappyPath: return {false, std::nullopt, OutcomeReason::None};
    }
    return {};
}

FraudScenario make_scenario(ScenarioName name, InsurancePolicy policy, ClaimFixture ground_truth) {
    Behavior provider, patient;
    switch (name) {
    case ScenarioName::PhantomBilling: provider = Behavior::malicious(Tactic::PhantomLine); break;
    case ScenarioName::Upcoding: provider = Behavior::malicious(Tactic::Upcode); break;
    case ScenarioName::Unbundling: provider = Behavior::malicious(Tactic::Unbundle); break;
    case ScenarioName::IdentityTheft: patient = Behavior::malicious(Tactic::Impersonate); break;
    case ScenarioName::PolicyholderMismatch: patient = Behavior::malicious(Tactic::ForeignPolicy); break;
    case ScenarioName::HappyPath: break;
    }
    return FraudScenario{name,    std::move(policy), std::move(ground_truth), provider,
                         patient, Behavior::honest(), catalog_expectation(name)};
}

InsurancePolicy default_policy() {
    auto code = [](const char* c) { return EncounterCode(c); };
    std::map<EncounterCode, Money> coverage{
        {code("E100"), Money(15000)}, {code("E200"), Money(40000)}, {code("L300"), Money(8000)},
        {code("L310"), Money(6000)},  {code("L320"), Money(5000)},  {code("PANEL"), Money(12000)},
        {code("X400"), Money(25000)},
    };
    BundleRule panel{code("PANEL"), {code("L300"), code("L310"), code("L320")}, Money(12000)};
    return InsurancePolicy("POL-1001", "patient-1", "insurer-1", std::move(coverage), Money(2000), {panel});
}

ClaimFixture default_encounter() {
    return ClaimFixture{"POL-1001", "provider-1", "patient-1", true,
                        {{EncounterCode("E100"), Money(12000)},
                         {EncounterCode("PANEL"), Money(11000)},
                         {EncounterCode("X400"), Money(20000)}}};
}

FraudScenario default_scenario(ScenarioName name) {
    return make_scenario(name, default_policy(), default_encounter());
}

ScenarioRun run_scenario(const FraudScenario& sc, std::uint64_t seed) {
    const auto& truth = sc.ground_truth;
    if (truth.lines.empty()) throw ConfigError("scenario encounter has no lines");
    if (truth.policy_id != sc.policy.policy_id() || truth.patient_id != sc.policy.patient_id()) {
        throw ConfigError("scenario encounter does not match its policy binding");
    }
    if (truth.provider_id.empty()) throw ConfigError("scenario encounter has no provider");

    ScenarioRng rng(seed);
    ScenarioRun run;
    std::int64_t tick = 0;
    ClaimEngine engine(run.registry, run.ledger, [&tick] { return kScenarioEpochMs + kScenarioTickMs * tick++; });

    ActorAgent provider(generate_identity(Role::Provider, seed_bytes(rng), truth.provider_id), sc.provider);
    ActorAgent patient(generate_identity(Role::Patient, seed_bytes(rng), truth.patient_id), sc.patient, truth.lines);
    ActorAgent insurer(generate_identity(Role::Insurer, seed_bytes(rng), sc.policy.insurer_id()), sc.insurer);

    try {
        for (const auto* agent : {&provider, &patient, &insurer}) engine.register_identity(agent->identity());
        engine.register_policy(sc.policy);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scenario setup: ") + e.what());
    }

    std::string claim_policy_id = sc.policy.policy_id();
    if (sc.patient.tactic == Tactic::ForeignPolicy) {
        // Another policyholder's contract with identical terms.
        auto other = generate_identity(Role::Patient, seed_bytes(rng), truth.patient_id + "-other");
        engine.register_identity(other.identity());
        InsurancePolicy foreign(sc.policy.policy_id() + "-X", other.id(), sc.policy.insurer_id(),
                                sc.policy.coverage(), sc.policy.copay(), sc.policy.bundles());
        engine.register_policy(foreign);
        claim_policy_id = foreign.policy_id();
    }

    std::optional<ActorAgent> impostor;
    if (sc.patient.tactic == Tactic::Impersonate) {
        auto keys = ed25519::keypair_from_seed(seed_bytes(rng));
        Identity fake{truth.patient_id, Role::Patient, keys.public_key, 0};
        impostor.emplace(Signer(fake, keys), sc.patient, truth.lines);
    }
    ActorAgent& patient_signer = impostor ? *impostor : patient;

    auto lines = stage_claim_lines(sc, rng);
    auto creation_nonce = rng();
    ClaimDraft draft{claim_policy_id, provider.identity().id, truth.patient_id, lines, truth.consent};

    auto& outcome = run.outcome;
    Hash32 claim_id;
    try {
        claim_id = engine.create_claim(draft, creation_nonce);
    } catch (const ProtocolError& e) {
        throw ConfigError(std::string("scenario claim: ") + e.what());
    }
    outcome.claim_id = claim_id;
    outcome.claimed_lines = lines;
    outcome.total_submitted = total_amount(lines);

    auto block = [&](Phase phase, OutcomeReason reason, const std::string& detail) {
        outcome.blocked = true;
        outcome.blocked_at = phase;
        outcome.reason = reason;
        outcome.detail = detail;
        auto note = engine.note(claim_id, fmt::format("blocked {} {}: {}", phase_name(phase),
                                                      reason_name(reason), detail));
        outcome.evidence = {static_cast<std::size_t>(note.index)};
    };

    auto finish = [&]() -> ScenarioRun {
        outcome.final_state = engine.state(claim_id);
        if (!run.ledger.verify().ok()) throw std::logic_error("scenario ledger failed verification");
        return std::move(run);
    };

    // Phase 1: review, then provider + patient co-sign the claim id.
    try {
        engine.review(claim_id);
    } catch (const ProtocolError& e) {
        block(Phase::Phase1, reason_for(e), e.what());
        return finish();
    }

    std::vector<Signature> sigs{provider.sign(claim_id)};
    bool patient_refused = !patient_signer.accepts_claim(lines);
    if (!patient_refused) sigs.push_back(patient_signer.sign(claim_id));
    try {
        engine.submit(claim_id, make_envelope(claim_id, {Role::Provider, Role::Patient}, sigs));
    } catch (const ProtocolError& e) {
        block(Phase::Phase1, patient_refused ? OutcomeReason::PatientRefusedSign : reason_for(e), e.what());
        return finish();
    }

    // Phase 2: insurer + patient co-sign the decision.
    auto decision = engine.propose_approval(claim_id);
    auto digest = decision.digest();
    sigs = {insurer.sign(digest)};
    if (patient_signer.accepts_decision(decision, engine.claim(claim_id), engine.policy(claim_policy_id))) {
        sigs.push_back(patient_signer.sign(digest));
    }
    try {
        engine.approve(claim_id, make_envelope(digest, {Role::Insurer, Role::Patient}, sigs));
    } catch (const ProtocolError& e) {
        block(Phase::Phase2, OutcomeReason::ApprovalRefused, e.what());
        return finish();
    }
    if (decision.rejected()) {
        block(Phase::Phase2, OutcomeReason::ApprovalRejected, "nothing approved");
        return finish();
    }

    auto payment = engine.disburse_payment(claim_id);

    // Phase 3: provider + patient co-sign receipt of the payment.
    auto ack_digest = acknowledgment_digest(claim_id, payment.received);
    sigs = {provider.sign(ack_digest)};
    if (patient_signer.accepts_acknowledgment(payment.received, decision)) {
        sigs.push_back(patient_signer.sign(ack_digest));
    }
    try {
        auto ack = engine.acknowledge(claim_id, payment.received,
                                      make_envelope(ack_digest, {Role::Provider, Role::Patient}, sigs));
        outcome.received = ack.received;
        outcome.remaining = ack.remaining;
        outcome.detail = fmt::format("closed: received {} cents, remaining {} cents", ack.received.cents(),
                                     ack.remaining.cents());
    } catch (const ProtocolError& e) {
        block(Phase::Phase3, OutcomeReason::AcknowledgmentRefused, e.what());
        return finish();
    }

    for (const auto& r : run.ledger.audit_trail(claim_id)) outcome.evidence.push_back(r.index);
    return finish();
}

InsurancePolicy random_policy(ScenarioRng& rng, const std::string& policy_id,
                              const std::string& patient_id, const std::string& insurer_id) {
    std::set<std::string> names;
    auto fresh_code = [&](char prefix) {
        while (true) {
            auto name = fmt::format("{}{:03}", prefix, uniform(rng, 0, 999));
            if (names.insert(name).second) return EncounterCode(name);
        }
    };
    auto n = uniform(rng, 3, 12);
    std::map<EncounterCode, Money> coverage;
    std::vector<EncounterCode> codes;
    for (std::size_t i = 0; i < n; ++i) {
        auto code = fresh_code("ELX"[uniform(rng, 0, 2)]);
        coverage.emplace(code, Money(uniform(rng, 1000, 50000)));
        codes.push_back(code);
    }
    std::vector<BundleRule> bundles;
    auto rule_count = uniform(rng, 1, 2);
    for (std::size_t r = 0; r < rule_count; ++r) {
        std::shuffle(codes.begin(), codes.end(), rng);
        auto size = uniform(rng, 2, std::min<std::uint64_t>(3, codes.size()));
        BundleRule rule{fresh_code('B'), {}, Money{}};
        Money sum;
        for (std::size_t k = 0; k < size; ++k) {
            rule.components.insert(codes[k]);
            sum += coverage.at(codes[k]);
        }
        rule.bundled_cap = Money(uniform(rng, sum.cents() / 2, sum.cents() - 1));
        coverage.emplace(rule.bundle_code, rule.bundled_cap);
        bundles.push_back(std::move(rule));
    }
    return InsurancePolicy(policy_id, patient_id, insurer_id, std::move(coverage),
                           Money(uniform(rng, 0, 5000)), std::move(bundles));
}

ClaimFixture random_encounter(ScenarioRng& rng, const InsurancePolicy& policy,
                              const std::string& provider_id) {
    std::vector<EncounterCode> codes;
    for (const auto& [code, cap] : policy.coverage()) codes.push_back(code);
    std::shuffle(codes.begin(), codes.end(), rng);
    // Leave at least one covered code unused so a phantom line is always possible.
    auto want = uniform(rng, 1, std::min<std::uint64_t>(10, codes.size() - 1));

    ClaimFixture fixture{policy.policy_id(), provider_id, policy.patient_id(), true, {}};
    for (const auto& code : codes) {
        if (fixture.lines.size() == want) break;
        fixture.lines.push_back({code, Money(uniform(rng, 1, policy.cap(code)->cents()))});
        if (!detect_unbundling(fixture.lines, policy).empty()) fixture.lines.pop_back();
    }
    return fixture;
}

FraudScenario random_scenario(ScenarioRng& rng, bool malicious) {
    auto policy = random_policy(rng, fmt::format("POL-{}", uniform(rng, 1000, 9999)), "patient-1", "insurer-1");
    auto encounter = random_encounter(rng, policy, "provider-1");
    auto name = malicious ? kFraudScenarios[uniform(rng, 0, std::size(kFraudScenarios) - 1)]
                          : ScenarioName::HappyPath;
    return make_scenario(name, std::move(policy), std::move(encounter));
}

std::string outcome_to_json(const ScenarioOutcome& o, ScenarioName name, std::uint64_t seed) {
    nlohmann::ordered_json lines = nlohmann::ordered_json::array();
    for (const auto& l : o.claimed_lines) {
        lines.push_back({{"code", l.code.str()}, {"amount_cents", l.amount.cents()}});
    }
    nlohmann::ordered_json j{
        {"scenario", scenario_name(name)},
        {"seed", seed},
        {"rng", kRngName},
        {"blocked", o.blocked},
        {"blocked_at", o.blocked_at ? nlohmann::ordered_json(phase_name(*o.blocked_at)) : nullptr},
        {"reason", reason_name(o.reason)},
        {"evidence", o.evidence},
        {"detail", o.detail},
        {"claim_id", to_hex(o.claim_id)},
        {"final_state", state_name(o.final_state)},
        {"claimed_lines", lines},
        {"total_submitted_cents", o.total_submitted.cents()},
        {"received_cents", o.received ? nlohmann::ordered_json(o.received->cents()) : nullptr},
        {"remaining_cents", o.remaining ? nlohmann::ordered_json(o.remaining->cents()) : nullptr},
    };
    return j.dump(2) + "\n";
}

} // namespace claimledger
