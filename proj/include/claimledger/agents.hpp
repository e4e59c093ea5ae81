#pragma once

#include "claimledger/crypto.hpp"
#include "claimledger/policy.hpp"
#include "claimledger/protocol.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace claimledger {

enum class Tactic {
    None,
    PhantomLine,   // provider bills a service that never happened
    Upcode,        // provider bills a pricier service than was rendered
    Unbundle,      // provider bills bundle components separately
    Impersonate,   // someone signs as the patient with their own key
    ForeignPolicy, // patient claims against a policy that does not cover them
};

std::string_view tactic_name(Tactic t);

struct Behavior {
    Tactic tactic = Tactic::None;

    static Behavior honest() { return {}; }
    static Behavior malicious(Tactic t) { return {t}; }

    bool is_honest() const { return tactic == Tactic::None; }
    bool operator==(const Behavior&) const = default;
};

/// Multiset match: every claimed line is paired with a distinct ground-truth
/// encounter carrying the same code and amount.
bool lines_match_ground_truth(std::span<const ClaimLineItem> claimed,
                              std::span<const ClaimLineItem> ground_truth);

/// A protocol participant with its key material and a behavior. Patients
/// carry the encounters they actually received.
class ActorAgent {
public:
    ActorAgent(Signer signer, Behavior behavior, std::vector<ClaimLineItem> ground_truth = {});

    const Identity& identity() const { return signer_.identity(); }
    Behavior behavior() const { return behavior_; }
    const std::vector<ClaimLineItem>& ground_truth() const { return ground_truth_; }

    /// Honest patients co-sign only claims that match their encounters;
    /// everyone else signs whatever the flow hands them.
    bool accepts_claim(std::span<const ClaimLineItem> lines) const;

    /// Honest patients recompute the decision from the policy they agreed to.
    bool accepts_decision(const ApprovalDecision& decision, const Claim& claim,
                          const InsurancePolicy& policy) const;

    /// Honest patients expect exactly the approved total to have been received.
    bool accepts_acknowledgment(Money received, const ApprovalDecision& decision) const;

    Signature sign(const Hash32& digest) { return signer_.sign_digest(digest); }

private:
    Signer signer_;
    Behavior behavior_;
    std::vector<ClaimLineItem> ground_truth_;
};

} // namespace claimledger
