#include "claimledger/fixtures.hpp"

#include <fstream>
#include <sstream>

namespace claimledger {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw ConfigError("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    auto text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::uint64_t json_unsigned(const json& value, std::string_view what) {
    bool ok = value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
    if (!ok) throw ConfigError(std::string(what) + " must be a non-negative integer");
    return value.get<std::uint64_t>();
}

std::uint64_t json_unsigned(const json& obj, const char* key, std::uint64_t fallback) {
    return obj.contains(key) ? json_unsigned(obj.at(key), key) : fallback;
}

InsurancePolicy policy_from_json(const json& j) {
    try {
        std::map<EncounterCode, Money> coverage;
        for (const auto& [code, cap] : j.at("coverage").items()) {
            coverage.emplace(EncounterCode(code), Money(json_unsigned(cap, "coverage." + code)));
        }
        std::vector<BundleRule> bundles;
        if (j.contains("bundles")) {
            for (const auto& b : j.at("bundles")) {
                BundleRule rule{EncounterCode(b.at("bundle_code").get<std::string>()), {},
                                Money(json_unsigned(b.at("bundled_cap_cents"), "bundled_cap_cents"))};
                for (const auto& c : b.at("components")) {
                    rule.components.insert(EncounterCode(c.get<std::string>()));
                }
                bundles.push_back(std::move(rule));
            }
        }
        return InsurancePolicy(j.at("policy_id").get<std::string>(), j.at("patient_id").get<std::string>(),
                               j.at("insurer_id").get<std::string>(), std::move(coverage),
                               Money(json_unsigned(j, "copay_cents", 0)), std::move(bundles));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("policy fixture: ") + e.what());
    } catch (const PolicyError& e) {
        throw ConfigError(std::string("policy fixture: ") + e.what());
    }
}

json policy_to_json(const InsurancePolicy& policy) {
    json coverage = json::object();
    for (const auto& [code, cap] : policy.coverage()) coverage[code.str()] = cap.cents();
    json bundles = json::array();
    for (const auto& rule : policy.bundles()) {
        json components = json::array();
        for (const auto& c : rule.components) components.push_back(c.str());
        bundles.push_back({{"bundle_code", rule.bundle_code.str()},
                           {"components", components},
                           {"bundled_cap_cents", rule.bundled_cap.cents()}});
    }
    return {{"policy_id", policy.policy_id()},     {"patient_id", policy.patient_id()},
            {"insurer_id", policy.insurer_id()},   {"copay_cents", policy.copay().cents()},
            {"coverage", std::move(coverage)},     {"bundles", std::move(bundles)}};
}

InsurancePolicy load_policy(const std::filesystem::path& path) {
    try {
        return policy_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ClaimFixture claim_from_json(const json& j) {
    try {
        ClaimFixture c;
        c.policy_id = j.at("policy_id").get<std::string>();
        c.provider_id = j.at("provider_id").get<std::string>();
        c.patient_id = j.at("patient_id").get<std::string>();
        c.consent = j.value("consent", true);
        for (const auto& l : j.at("lines")) {
            Money amount(json_unsigned(l.at("amount_cents"), "amount_cents"));
            if (amount.cents() == 0) throw ConfigError("claim fixture: line amount must be positive");
            c.lines.push_back({EncounterCode(l.at("code").get<std::string>()), amount});
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("claim fixture: ") + e.what());
    } catch (const PolicyError& e) {
        throw ConfigError(std::string("claim fixture: ") + e.what());
    }
}

json claim_to_json(const ClaimFixture& claim) {
    json lines = json::array();
    for (const auto& l : claim.lines) {
        lines.push_back({{"code", l.code.str()}, {"amount_cents", l.amount.cents()}});
    }
    return {{"policy_id", claim.policy_id},
            {"provider_id", claim.provider_id},
            {"patient_id", claim.patient_id},
            {"consent", claim.consent},
            {"lines", std::move(lines)}};
}

ClaimFixture load_claim(const std::filesystem::path& path) {
    try {
        return claim_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

json registry_to_json(const IdentityRegistry& registry) {
    json out = json::array();
    for (const auto& ident : registry.identities()) {
        out.push_back({{"id", ident.id},
                       {"role", role_name(ident.role)},
                       {"public_key", to_hex(ident.public_key)},
                       {"nonce", ident.nonce}});
    }
    return out;
}

std::vector<Identity> identities_from_json(const json& j) {
    if (!j.is_array()) throw ConfigError("identity registry must be a JSON array");
    std::vector<Identity> out;
    try {
        for (const auto& e : j) {
            Identity ident;
            ident.id = e.at("id").get<std::string>();
            ident.role = parse_role(e.at("role").get<std::string>());
            ident.public_key = array_from_hex<32>(e.at("public_key").get<std::string>());
            ident.nonce = json_unsigned(e, "nonce", 0);
            out.push_back(std::move(ident));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("identity registry: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("identity registry: ") + e.what());
    }
    return out;
}

IdentityRegistry registry_from_json(const json& j) {
    IdentityRegistry registry;
    for (const auto& ident : identities_from_json(j)) {
        try {
            registry.add(ident);
        } catch (const RegistryError& e) {
            throw ConfigError(std::string("identity registry: ") + e.what());
        }
    }
    return registry;
}

GasSchedule schedule_from_json(const json& j) {
    try {
        GasSchedule s{json_unsigned(j.at("deploy_gas"), "deploy_gas"), json_unsigned(j.at("submit_base_gas"), "submit_base_gas"),
                      json_unsigned(j.at("submit_per_line_gas"), "submit_per_line_gas"),
                      json_unsigned(j.at("multisig_per_signature_gas"), "multisig_per_signature_gas")};
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("gas schedule: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("gas schedule: ") + e.what());
    }
}

GasSchedule load_schedule(const std::filesystem::path& path) {
    try {
        return schedule_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace claimledger
