#pragma once

#include "claimledger/scenario.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <random>
#include <type_traits>
#include <string>
#include <vector>

namespace test_support {

using namespace claimledger;

inline Bytes seed_of(std::uint8_t fill) { return Bytes(32, fill); }

inline Bytes bytes_of(std::string_view s) {
    auto v = as_bytes(s);
    return Bytes(v.begin(), v.end());
}

inline ClaimLineItem line(const std::string& code, std::uint64_t cents) {
    return {EncounterCode(code), Money(cents)};
}

/// Registry, ledger and engine wired over the built-in policy with one
/// provider, patient and insurer.
struct World {
    IdentityRegistry registry;
    Ledger ledger;
    std::int64_t tick = 0;
    ClaimEngine engine{registry, ledger, [this] { return 1'700'000'000'000 + 1000 * tick++; }};
    Signer provider = generate_identity(Role::Provider, seed_of(1), "provider-1");
    Signer patient = generate_identity(Role::Patient, seed_of(2), "patient-1");
    Signer insurer = generate_identity(Role::Insurer, seed_of(3), "insurer-1");
    InsurancePolicy policy = default_policy();

    World() {
        engine.register_identity(provider.identity());
        engine.register_identity(patient.identity());
        engine.register_identity(insurer.identity());
        engine.register_policy(policy);
    }

    Hash32 draft(std::vector<ClaimLineItem> lines, std::uint64_t nonce = 1, bool consent = true) {
        return engine.create_claim({policy.policy_id(), provider.id(), patient.id(), std::move(lines), consent},
                                   nonce);
    }

    MultiSigEnvelope submission_envelope(const Hash32& id) {
        return make_envelope(id, {Role::Provider, Role::Patient},
                             {provider.sign_digest(id), patient.sign_digest(id)});
    }

    Hash32 submitted(std::vector<ClaimLineItem> lines, std::uint64_t nonce = 1) {
        auto id = draft(std::move(lines), nonce);
        engine.review(id);
        engine.submit(id, submission_envelope(id));
        return id;
    }

    ApprovalDecision approved(const Hash32& id) {
        auto d = engine.propose_approval(id);
        auto digest = d.digest();
        return engine.approve(id, make_envelope(digest, {Role::Insurer, Role::Patient},
                                                {insurer.sign_digest(digest), patient.sign_digest(digest)}));
    }

    Acknowledgment closed(const Hash32& id) {
        approved(id);
        auto pay = engine.disburse_payment(id);
        auto digest = acknowledgment_digest(id, pay.received);
        return engine.acknowledge(id, pay.received,
                                  make_envelope(digest, {Role::Provider, Role::Patient},
                                                {provider.sign_digest(digest), patient.sign_digest(digest)}));
    }
};

/// n records of mixed kinds over a small pool of claim ids; gated kinds carry
/// a signed envelope.
inline Ledger synthetic_ledger(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto provider = generate_identity(Role::Provider, seed_of(1), "provider-1");
    auto patient = generate_identity(Role::Patient, seed_of(2), "patient-1");
    std::vector<Hash32> claims;
    for (int i = 0; i < 8; ++i) claims.push_back(sha256(as_bytes("claim-" + std::to_string(i))));

    Ledger ledger;
    for (std::size_t i = 0; i < n; ++i) {
        auto kind = static_cast<EventKind>(rng() % 7);
        Bytes payload;
        if (is_claim_scoped(kind)) {
            const auto& id = claims[rng() % claims.size()];
            payload.assign(id.begin(), id.end());
        }
        auto extra = rng() % 48;
        for (std::uint64_t b = 0; b < extra; ++b) payload.push_back(static_cast<std::uint8_t>(rng()));
        std::optional<MultiSigEnvelope> env;
        if (kind == EventKind::ClaimSubmitted || kind == EventKind::AckRecorded) {
            auto digest = sha256(payload);
            env = make_envelope(digest, {Role::Provider, Role::Patient},
                                {provider.sign_digest(digest), patient.sign_digest(digest)});
        }
        ledger.append(kind, std::move(payload), std::move(env), 1'700'000'000'000 + 1000 * static_cast<std::int64_t>(i));
    }
    return ledger;
}

/// Flips one byte of one field of `r`, chosen by `rng`. Returns the field name.
inline std::string mutate_one_byte(LedgerRecord& r, std::mt19937_64& rng) {
    auto flip = [&](std::uint8_t& b) { b ^= static_cast<std::uint8_t>(1 + rng() % 255); };
    auto flip_int = [&](auto& v) {
        using U = std::make_unsigned_t<std::remove_reference_t<decltype(v)>>;
        auto shift = 8 * (rng() % sizeof(v));
        v = static_cast<std::remove_reference_t<decltype(v)>>(static_cast<U>(v) ^ (static_cast<U>(1 + rng() % 255) << shift));
    };
    for (;;) {
        switch (rng() % 7) {
        case 0: flip_int(r.index); return "index";
        case 1: flip_int(r.timestamp_ms); return "timestamp";
        case 2: {
            auto k = static_cast<std::uint8_t>(r.kind);
            flip(k);
            r.kind = static_cast<EventKind>(k);
            return "kind";
        }
        case 3:
            if (r.payload.empty()) continue;
            flip(r.payload[rng() % r.payload.size()]);
            return "payload";
        case 4: {
            if (!r.envelope) continue;
            auto& env = *r.envelope;
            auto& sig = env.signatures[rng() % env.signatures.size()];
            switch (rng() % 4) {
            case 0: flip(env.payload_digest[rng() % 32]); return "envelope.digest";
            case 1: flip(sig.bytes[rng() % 64]); return "envelope.signature";
            case 2: flip_int(sig.nonce); return "envelope.nonce";
            default: {
                auto pos = rng() % sig.signer_id.size();
                auto c = static_cast<std::uint8_t>(sig.signer_id[pos]);
                flip(c);
                sig.signer_id[pos] = static_cast<char>(c);
                return "envelope.signer_id";
            }
            }
        }
        case 5: flip(r.prev_hash[rng() % 32]); return "prev_hash";
        default: flip(r.record_hash[rng() % 32]); return "record_hash";
        }
    }
}

// Honest-patient oracle, independent of the protocol code: the claim is
// legitimate iff it lists exactly the encounters received, each covered and
// within its cap, without completing any bundle.
inline bool claim_is_legitimate(const std::vector<ClaimLineItem>& claimed, const FraudScenario& sc) {
    auto key = [](const ClaimLineItem& l) { return std::pair(l.code.str(), l.amount.cents()); };
    std::vector<std::pair<std::string, std::uint64_t>> a, b;
    for (const auto& l : claimed) a.push_back(key(l));
    for (const auto& l : sc.ground_truth.lines) b.push_back(key(l));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;

    std::set<EncounterCode> billed;
    for (const auto& l : claimed) {
        auto it = sc.policy.coverage().find(l.code);
        if (it == sc.policy.coverage().end() || l.amount > it->second) return false;
        billed.insert(l.code);
    }
    for (const auto& rule : sc.policy.bundles()) {
        if (std::includes(billed.begin(), billed.end(), rule.components.begin(), rule.components.end())) return false;
    }
    return true;
}

inline bool parties_are_genuine(const FraudScenario& sc) {
    return sc.patient.tactic != Tactic::Impersonate && sc.patient.tactic != Tactic::ForeignPolicy;
}

inline std::vector<EventKind> kinds(const std::vector<LedgerRecord>& records) {
    std::vector<EventKind> out;
    for (const auto& r : records) out.push_back(r.kind);
    return out;
}

} // namespace test_support
