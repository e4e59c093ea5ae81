#include "claimledger/policy.hpp"

#include <algorithm>
#include <limits>

namespace claimledger {

Money Money::operator+(Money other) const {
    if (other.cents_ > std::numeric_limits<std::uint64_t>::max() - cents_) {
        throw MoneyOverflow("money addition overflows");
    }
    return Money(cents_ + other.cents_);
}

Money Money::operator-(Money other) const {
    if (other.cents_ > cents_) {
        throw MoneyOverflow("money subtraction underflows");
    }
    return Money(cents_ - other.cents_);
}

bool EncounterCode::is_valid(std::string_view code) {
    if (code.size() < 2 || code.size() > 16) return false;
    if (code[0] < 'A' || code[0] > 'Z') return false;
    return std::all_of(code.begin() + 1, code.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    });
}

EncounterCode::EncounterCode(std::string code) : code_(std::move(code)) {
    if (!is_valid(code_)) {
        throw PolicyError("malformed encounter code '" + code_ + "'");
    }
}

InsurancePolicy::InsurancePolicy(std::string policy_id, std::string patient_id,
                                 std::string insurer_id, std::map<EncounterCode, Money> coverage,
                                 Money copay, std::vector<BundleRule> bundles)
    : policy_id_(std::move(policy_id)),
      patient_id_(std::move(patient_id)),
      insurer_id_(std::move(insurer_id)),
      coverage_(std::move(coverage)),
      copay_(copay),
      bundles_(std::move(bundles)) {
    if (policy_id_.empty() || patient_id_.empty() || insurer_id_.empty()) {
        throw PolicyError("policy, patient and insurer ids must be non-empty");
    }
    for (const auto& [code, cap] : coverage_) {
        if (cap.cents() == 0) {
            throw PolicyError("coverage cap for " + code.str() + " must be positive");
        }
    }
    for (const auto& rule : bundles_) {
        const auto& name = rule.bundle_code.str();
        if (rule.components.size() < 2) {
            throw PolicyError("bundle " + name + " needs at least two components");
        }
        if (rule.components.contains(rule.bundle_code)) {
            throw PolicyError("bundle " + name + " lists itself as a component");
        }
        Money component_sum;
        for (const auto& c : rule.components) {
            auto c_cap = cap(c);
            if (!c_cap) {
                throw PolicyError("bundle " + name + " component " + c.str() + " is not covered");
            }
            component_sum += *c_cap;
        }
        if (rule.bundled_cap >= component_sum) {
            throw PolicyError("bundle " + name + " cap is not below the component caps sum");
        }
    }
}

std::optional<Money> InsurancePolicy::cap(const EncounterCode& code) const {
    auto it = coverage_.find(code);
    if (it == coverage_.end()) return std::nullopt;
    return it->second;
}

bool zeta_check(const ClaimLineItem& line, const InsurancePolicy& policy) {
    auto cap = policy.cap(line.code);
    return cap && line.amount <= *cap;
}

std::vector<BundleRule> detect_unbundling(std::span<const ClaimLineItem> lines,
                                          const InsurancePolicy& policy) {
    std::set<EncounterCode> billed;
    for (const auto& line : lines) billed.insert(line.code);

    std::vector<BundleRule> violated;
    for (const auto& rule : policy.bundles()) {
        bool complete = std::all_of(rule.components.begin(), rule.components.end(),
                                    [&](const EncounterCode& c) { return billed.contains(c); });
        if (complete) violated.push_back(rule);
    }
    return violated;
}

CopaySplit compute_copay_split(Money total, const InsurancePolicy& policy) {
    Money share = std::min(policy.copay(), total);
    return {share, total - share};
}

Money total_amount(std::span<const ClaimLineItem> lines) {
    Money total;
    for (const auto& line : lines) total += line.amount;
    return total;
}

} // namespace claimledger
