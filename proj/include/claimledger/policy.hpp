#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

class MoneyOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

class PolicyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integer minor currency units (cents). Arithmetic is checked.
class Money {
public:
    constexpr Money() = default;
    constexpr explicit Money(std::uint64_t cents) : cents_(cents) {}

    constexpr std::uint64_t cents() const { return cents_; }

    Money operator+(Money other) const;
    /// Throws MoneyOverflow if other > *this.
    Money operator-(Money other) const;
    Money& operator+=(Money other) { return *this = *this + other; }

    constexpr auto operator<=>(const Money&) const = default;

private:
    std::uint64_t cents_ = 0;
};

/// Service code, `[A-Z][A-Z0-9]{1,15}`.
class EncounterCode {
public:
    /// Throws PolicyError on a malformed code.
    explicit EncounterCode(std::string code);

    static bool is_valid(std::string_view code);

    const std::string& str() const { return code_; }

    auto operator<=>(const EncounterCode&) const = default;

private:
    std::string code_;
};

struct ClaimLineItem {
    EncounterCode code;
    Money amount;

    bool operator==(const ClaimLineItem&) const = default;
};

struct BundleRule {
    EncounterCode bundle_code;
    std::set<EncounterCode> components;
    Money bundled_cap;

    bool operator==(const BundleRule&) const = default;
};

/// Patient/insurer agreement. Validated on construction and immutable after.
class InsurancePolicy {
public:
    InsurancePolicy(std::string policy_id, std::string patient_id, std::string insurer_id,
                    std::map<EncounterCode, Money> coverage, Money copay,
                    std::vector<BundleRule> bundles = {});

    const std::string& policy_id() const { return policy_id_; }
    const std::string& patient_id() const { return patient_id_; }
    const std::string& insurer_id() const { return insurer_id_; }
    const std::map<EncounterCode, Money>& coverage() const { return coverage_; }
    Money copay() const { return copay_; }
    const std::vector<BundleRule>& bundles() const { return bundles_; }

    std::optional<Money> cap(const EncounterCode& code) const;

private:
    std::string policy_id_;
    std::string patient_id_;
    std::string insurer_id_;
    std::map<EncounterCode, Money> coverage_;
    Money copay_;
    std::vector<BundleRule> bundles_;
};

/// Coverage predicate: the code is covered and the amount does not exceed
/// its cap.
bool zeta_check(const ClaimLineItem& line, const InsurancePolicy& policy);

/// Every bundle rule whose complete component set is billed among `lines`.
std::vector<BundleRule> detect_unbundling(std::span<const ClaimLineItem> lines,
                                          const InsurancePolicy& policy);

struct CopaySplit {
    Money patient_share;
    Money claimable;
};

CopaySplit compute_copay_split(Money total, const InsurancePolicy& policy);

Money total_amount(std::span<const ClaimLineItem> lines);

} // namespace claimledger
