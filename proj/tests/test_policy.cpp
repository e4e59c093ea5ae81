#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <limits>
#include <random>

using namespace claimledger;
using test_support::line;

namespace {

EncounterCode ec(const std::string& s) { return EncounterCode(s); }

InsurancePolicy abc_policy(Money copay = Money(2000)) {
    return InsurancePolicy("POL-1", "patient-1", "insurer-1",
                           {{ec("E100"), Money(15000)}, {ec("A1"), Money(5000)}, {ec("B1"), Money(5000)},
                            {ec("C1"), Money(5000)}, {ec("BNDL1"), Money(9000)}},
                           copay, {{ec("BNDL1"), {ec("A1"), ec("B1"), ec("C1")}, Money(9000)}});
}

// Independent oracle: a rule is violated iff some subset of the billed codes
// equals its component set.
std::vector<EncounterCode> brute_force_unbundling(const std::vector<ClaimLineItem>& lines,
                                                  const InsurancePolicy& policy) {
    std::vector<EncounterCode> codes;
    for (const auto& l : lines) codes.push_back(l.code);
    std::vector<EncounterCode> hits;
    for (const auto& rule : policy.bundles()) {
        bool hit = false;
        for (std::uint32_t mask = 0; mask < (1u << codes.size()) && !hit; ++mask) {
            std::set<EncounterCode> subset;
            for (std::size_t i = 0; i < codes.size(); ++i) {
                if (mask & (1u << i)) subset.insert(codes[i]);
            }
            hit = subset == rule.components;
        }
        if (hit) hits.push_back(rule.bundle_code);
    }
    return hits;
}

} // namespace

TEST_CASE("encounter codes are validated", "[policy]") {
    CHECK(ec("E100").str() == "E100");
    CHECK(ec("Z9").str() == "Z9");
    CHECK_NOTHROW(ec("ABCDEFGHIJKLMNOP"));
    for (const char* bad : {"", "E", "e100", "1E00", "E-100", "ABCDEFGHIJKLMNOPQ", "E 10"}) {
        CHECK_THROWS_AS(ec(bad), PolicyError);
    }
}

TEST_CASE("money arithmetic is checked", "[policy]") {
    CHECK((Money(5) + Money(7)).cents() == 12);
    CHECK((Money(7) - Money(5)).cents() == 2);
    CHECK_THROWS_AS(Money(5) - Money(7), MoneyOverflow);
    CHECK_THROWS_AS(Money(std::numeric_limits<std::uint64_t>::max()) + Money(1), MoneyOverflow);
}

TEST_CASE("zeta_check examples", "[policy]") {
    auto p = abc_policy();
    CHECK(zeta_check(line("E100", 12000), p));
    CHECK(zeta_check(line("E100", 15000), p));
    CHECK_FALSE(zeta_check(line("E100", 15001), p));
    CHECK_FALSE(zeta_check(line("Z999", 1), p));
}

TEST_CASE("zeta_check is monotone in amount", "[policy][property]") {
    auto p = abc_policy();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t a = 1 + rng() % 30000;
        std::uint64_t smaller = 1 + rng() % a;
        if (zeta_check(line("E100", a), p)) CHECK(zeta_check(line("E100", smaller), p));
    }
}

TEST_CASE("detect_unbundling examples", "[policy]") {
    auto p = abc_policy();
    auto hits = detect_unbundling(std::vector{line("A1", 100), line("B1", 100), line("C1", 100)}, p);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].bundle_code.str() == "BNDL1");
    CHECK(detect_unbundling(std::vector{line("A1", 100), line("B1", 100)}, p).empty());
    CHECK(detect_unbundling(std::vector<ClaimLineItem>{}, p).empty());
    // Billing the bundle itself is fine.
    CHECK(detect_unbundling(std::vector{line("BNDL1", 9000), line("E100", 100)}, p).empty());
}

TEST_CASE("detect_unbundling agrees with a brute-force subset search", "[policy][property]") {
    std::mt19937_64 rng(99);
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };
    for (int trial = 0; trial < 500; ++trial) {
        std::map<EncounterCode, Money> coverage;
        std::vector<EncounterCode> codes;
        for (int i = 0; i < 8; ++i) {
            codes.push_back(ec("C" + std::to_string(i)));
            coverage[codes.back()] = Money(pick(1000, 9000));
        }
        std::vector<BundleRule> rules;
        auto rule_count = pick(0, 5);
        for (std::uint64_t r = 0; r < rule_count; ++r) {
            std::set<EncounterCode> comps;
            auto size = pick(2, 4);
            while (comps.size() < size) comps.insert(codes[pick(0, codes.size() - 1)]);
            rules.push_back({ec("B" + std::to_string(r)), comps, Money(999)});
        }
        InsurancePolicy policy("P", "pat", "ins", coverage, Money(0), rules);

        std::vector<ClaimLineItem> lines;
        auto n = pick(0, 10);
        for (std::uint64_t i = 0; i < n; ++i) lines.push_back({codes[pick(0, codes.size() - 1)], Money(pick(1, 5000))});

        std::vector<EncounterCode> got;
        for (const auto& r : detect_unbundling(lines, policy)) got.push_back(r.bundle_code);
        CHECK(got == brute_force_unbundling(lines, policy));
    }
}

TEST_CASE("compute_copay_split examples", "[policy]") {
    auto split = compute_copay_split(Money(10000), abc_policy(Money(2000)));
    CHECK(split.patient_share == Money(2000));
    CHECK(split.claimable == Money(8000));
    split = compute_copay_split(Money(10000), abc_policy(Money(0)));
    CHECK(split.patient_share == Money(0));
    CHECK(split.claimable == Money(10000));
    split = compute_copay_split(Money(1500), abc_policy(Money(2000)));
    CHECK(split.patient_share == Money(1500));
    CHECK(split.claimable == Money(0));
}

TEST_CASE("compute_copay_split conserves money", "[policy][property]") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 2000; ++i) {
        auto p = abc_policy(Money(rng() % 100000));
        Money total(rng() % 1000000);
        auto split = compute_copay_split(total, p);
        CHECK(split.patient_share + split.claimable == total);
        CHECK(split.patient_share <= p.copay());
    }
}

TEST_CASE("policy construction enforces its invariants", "[policy]") {
    std::map<EncounterCode, Money> cov{{ec("A1"), Money(100)}, {ec("B1"), Money(100)}};
    CHECK_THROWS_AS(InsurancePolicy("", "p", "i", cov, Money(0)), PolicyError);
    CHECK_THROWS_AS(InsurancePolicy("P", "p", "i", {{ec("A1"), Money(0)}}, Money(0)), PolicyError);
    CHECK_THROWS_AS(InsurancePolicy("P", "p", "i", cov, Money(0), {{ec("BX"), {ec("A1")}, Money(50)}}), PolicyError);
    CHECK_THROWS_AS(InsurancePolicy("P", "p", "i", cov, Money(0), {{ec("A1"), {ec("A1"), ec("B1")}, Money(50)}}),
                    PolicyError);
    CHECK_THROWS_AS(InsurancePolicy("P", "p", "i", cov, Money(0), {{ec("BX"), {ec("A1"), ec("Z1")}, Money(50)}}),
                    PolicyError);
    // A bundle cap at or above the parts is vacuous.
    CHECK_THROWS_AS(InsurancePolicy("P", "p", "i", cov, Money(0), {{ec("BX"), {ec("A1"), ec("B1")}, Money(200)}}),
                    PolicyError);
    CHECK_NOTHROW(InsurancePolicy("P", "p", "i", cov, Money(0), {{ec("BX"), {ec("A1"), ec("B1")}, Money(199)}}));
}

TEST_CASE("policy fixture JSON round trip", "[policy]") {
    auto p = default_policy();
    auto back = policy_from_json(policy_to_json(p));
    CHECK(back.policy_id() == p.policy_id());
    CHECK(back.coverage() == p.coverage());
    CHECK(back.bundles() == p.bundles());
    CHECK(back.copay() == p.copay());
    CHECK(decode_policy(encode_policy(p)).coverage() == p.coverage());

    auto j = policy_to_json(p);
    j["coverage"]["E100"] = -5;
    CHECK_THROWS_AS(policy_from_json(j), ConfigError);
    j = policy_to_json(p);
    j["copay_cents"] = 12.5;
    CHECK_THROWS_AS(policy_from_json(j), ConfigError);

    auto claim = claim_to_json(default_encounter());
    CHECK(claim_from_json(claim) == default_encounter());
    claim["lines"][0]["amount_cents"] = -1;
    CHECK_THROWS_AS(claim_from_json(claim), ConfigError);

    auto sched = nlohmann::json{{"deploy_gas", 1}, {"submit_base_gas", 1}, {"submit_per_line_gas", -1},
                                {"multisig_per_signature_gas", 1}};
    CHECK_THROWS_AS(schedule_from_json(sched), ConfigError);
    sched["submit_per_line_gas"] = 0;
    CHECK_THROWS_AS(schedule_from_json(sched), ConfigError);
    sched["submit_per_line_gas"] = 7;
    CHECK(schedule_from_json(sched).submit_per_line_gas == 7);
}
