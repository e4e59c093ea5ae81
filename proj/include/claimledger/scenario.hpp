#pragma once

#include "claimledger/agents.hpp"
#include "claimledger/fixtures.hpp"
#include "claimledger/ledger.hpp"
#include "claimledger/policy.hpp"
#include "claimledger/protocol.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

/// Named, seedable generator used everywhere randomness is needed.
using ScenarioRng = std::mt19937_64;
inline constexpr std::string_view kRngName = "mt19937_64";

// ---------------------------------------------------------------------------
// Fraud taxonomy

enum class FraudType {
    PhantomBilling,
    Upcoding,
    Unbundling,
    Kickbacks,
    IdentityTheft,
    PolicyholderFraud,
    PharmacyFraud,
};

enum class Culpability { Malicious, NonMalicious };

std::string_view fraud_type_name(FraudType t);
std::string_view culpability_name(Culpability c);

class UnknownFraudType : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Stakeholder impact row for a fraud type. Accepts "PolicyholderMismatch" as
/// an alias for the policyholder-fraud row. Throws UnknownFraudType.
std::map<Role, Culpability> classify_impact(std::string_view fraud_name);
std::map<Role, Culpability> classify_impact(FraudType type);

// ---------------------------------------------------------------------------
// Scenarios

enum class ScenarioName {
    PhantomBilling,
    Upcoding,
    Unbundling,
    IdentityTheft,
    PolicyholderMismatch,
    HappyPath,
};

inline constexpr ScenarioName kAllScenarios[] = {
    ScenarioName::PhantomBilling, ScenarioName::Upcoding,           ScenarioName::Unbundling,
    ScenarioName::IdentityTheft,  ScenarioName::PolicyholderMismatch, ScenarioName::HappyPath,
};

inline constexpr ScenarioName kFraudScenarios[] = {
    ScenarioName::PhantomBilling, ScenarioName::Upcoding, ScenarioName::Unbundling,
    ScenarioName::IdentityTheft,  ScenarioName::PolicyholderMismatch,
};

std::string_view scenario_name(ScenarioName n);
/// Throws ConfigError.
ScenarioName parse_scenario_name(std::string_view s);

enum class Phase { Phase1, Phase2, Phase3 };

std::string_view phase_name(Phase p);
Phase parse_phase(std::string_view s);

enum class OutcomeReason {
    None,
    PatientRefusedSign,
    SignatureInvalid,
    CoverageCheckFailed,
    UnbundlingDetected,
    PolicyBindingMismatch,
    ConsentMissing,
    SubmissionRejected,
    ApprovalRefused,
    ApprovalRejected, // nothing approved; claim moved to Rejected
    AcknowledgmentRefused,
};

std::string_view reason_name(OutcomeReason r);
OutcomeReason parse_reason(std::string_view s);

struct ExpectedOutcome {
    bool blocked = false;
    std::optional<Phase> blocked_at;
    OutcomeReason reason = OutcomeReason::None;

    bool operator==(const ExpectedOutcome&) const = default;
};

struct ScenarioOutcome {
    bool blocked = false;
    std::optional<Phase> blocked_at;
    OutcomeReason reason = OutcomeReason::None;
    std::vector<std::size_t> evidence; // ledger record indices
    std::string detail;

    Hash32 claim_id{};
    ClaimState final_state = ClaimState::Draft;
    std::vector<ClaimLineItem> claimed_lines; // what the provider put on the claim
    Money total_submitted;
    std::optional<Money> received;
    std::optional<Money> remaining;

    ExpectedOutcome summary() const { return {blocked, blocked_at, reason}; }
    bool matches(const ExpectedOutcome& expected) const { return summary() == expected; }
};

/// Catalog expectation per scenario.
ExpectedOutcome catalog_expectation(ScenarioName name);

struct FraudScenario {
    ScenarioName name = ScenarioName::HappyPath;
    InsurancePolicy policy;
    ClaimFixture ground_truth; // what the patient actually received
    Behavior provider;
    Behavior patient;
    Behavior insurer;
    ExpectedOutcome expected;
};

/// Actor behaviors follow the scenario: provider-side fraud makes the
/// provider malicious, identity theft and policy mismatch the patient.
FraudScenario make_scenario(ScenarioName name, InsurancePolicy policy, ClaimFixture ground_truth);

/// Built-in policy and encounter fixtures.
InsurancePolicy default_policy();
ClaimFixture default_encounter();
FraudScenario default_scenario(ScenarioName name);

struct ScenarioRun {
    ScenarioOutcome outcome;
    Ledger ledger;
    IdentityRegistry registry;
};

/// Deterministic in (scenario, seed). Throws ConfigError when the scenario
/// cannot be staged (e.g. unbundling without a bundle rule to exploit).
ScenarioRun run_scenario(const FraudScenario& scenario, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Randomized instances

/// 3-12 plain codes plus one or two bundle rules (each bundle code is
/// covered too), random caps and copay.
InsurancePolicy random_policy(ScenarioRng& rng, const std::string& policy_id,
                              const std::string& patient_id, const std::string& insurer_id);

/// 1-10 distinct covered codes within caps, never completing a bundle.
ClaimFixture random_encounter(ScenarioRng& rng, const InsurancePolicy& policy,
                              const std::string& provider_id);

/// A HappyPath scenario, or (malicious) one of the five fraud scenarios
/// chosen at random, over a random policy and encounter.
FraudScenario random_scenario(ScenarioRng& rng, bool malicious);

std::string outcome_to_json(const ScenarioOutcome& outcome, ScenarioName name, std::uint64_t seed);

} // namespace claimledger
