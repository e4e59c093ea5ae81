#include "claimledger/agents.hpp"

namespace claimledger {

std::string_view tactic_name(Tactic t) {
    switch (t) {
    case Tactic::None: return "None";
    case Tactic::PhantomLine: return "PhantomLine";
    case Tactic::Upcode: return "Upcode";
    case Tactic::Unbundle: return "Unbundle";
    case Tactic::Impersonate: return "Impersonate";
    case Tactic::ForeignPolicy: return "ForeignPolicy";
    }
    return "Unknown";
}

bool lines_match_ground_truth(std::span<const ClaimLineItem> claimed,
                              std::span<const ClaimLineItem> ground_truth) {
    std::vector<bool> used(ground_truth.size(), false);
    for (const auto& line : claimed) {
        bool matched = false;
        for (std::size_t i = 0; i < ground_truth.size(); ++i) {
            if (!used[i] && ground_truth[i] == line) {
                used[i] = true;
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return true;
}

ActorAgent::ActorAgent(Signer signer, Behavior behavior, std::vector<ClaimLineItem> ground_truth)
    : signer_(std::move(signer)), behavior_(behavior), ground_truth_(std::move(ground_truth)) {}

bool ActorAgent::accepts_claim(std::span<const ClaimLineItem> lines) const {
    if (!behavior_.is_honest() || identity().role != Role::Patient) return true;
    return lines_match_ground_truth(lines, ground_truth_);
}

bool ActorAgent::accepts_decision(const ApprovalDecision& decision, const Claim& claim,
                                  const InsurancePolicy& policy) const {
    if (!behavior_.is_honest()) return true;
    return decision == decide_approval(claim, policy);
}

bool ActorAgent::accepts_acknowledgment(Money received, const ApprovalDecision& decision) const {
    if (!behavior_.is_honest()) return true;
    return received == decision.total_approved;
}

} // namespace claimledger
