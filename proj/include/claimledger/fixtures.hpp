#pragma once

// JSON fixture files: policies, claims, identity registries, gas schedules.

#include "claimledger/crypto.hpp"
#include "claimledger/gas.hpp"
#include "claimledger/policy.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

/// Malformed configuration or fixture; message names the offending path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClaimFixture {
    std::string policy_id;
    std::string provider_id;
    std::string patient_id;
    bool consent = true;
    std::vector<ClaimLineItem> lines;

    bool operator==(const ClaimFixture&) const = default;
};

nlohmann::json read_json_file(const std::filesystem::path& path);

/// A non-negative JSON integer; negative or fractional values raise
/// ConfigError instead of wrapping.
std::uint64_t json_unsigned(const nlohmann::json& value, std::string_view what);
std::uint64_t json_unsigned(const nlohmann::json& obj, const char* key, std::uint64_t fallback);

InsurancePolicy policy_from_json(const nlohmann::json& j);
nlohmann::json policy_to_json(const InsurancePolicy& policy);
InsurancePolicy load_policy(const std::filesystem::path& path);

ClaimFixture claim_from_json(const nlohmann::json& j);
nlohmann::json claim_to_json(const ClaimFixture& claim);
ClaimFixture load_claim(const std::filesystem::path& path);

nlohmann::json registry_to_json(const IdentityRegistry& registry);
/// Identities in file order; nonces are taken as the last-seen values.
std::vector<Identity> identities_from_json(const nlohmann::json& j);
IdentityRegistry registry_from_json(const nlohmann::json& j);

GasSchedule schedule_from_json(const nlohmann::json& j);
GasSchedule load_schedule(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace claimledger
