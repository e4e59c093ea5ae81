#include "support.hpp"

#include "claimledger/encoding.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <set>

using namespace claimledger;
using test_support::seed_of;

namespace {

struct Rfc8032Vector {
    const char* secret;
    const char* public_key;
    const char* message;
    const char* signature;
};

// RFC 8032 section 7.1, tests 1-3.
constexpr Rfc8032Vector kVectors[] = {
    {"9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
     "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a", "",
     "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b"},
    {"4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
     "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c", "72",
     "92a009a9f0d4cab8720e820b5f642540a2b27b5416503f8fb3762223ebdb69da085ac1e43e15996e458f3613d0f11d8c387b2eaeb4302aeeb00d291612bb0c00"},
    {"c5aa8df43f9f837bedb7442f31dcb7b166d38535076f094b85ce3a2e0b4458f7",
     "fc51cd8e6218a1a38da47ed00230f0580816ed13ba3303ac5deb911548908025", "af82",
     "6291d657deec24024827e69c3abe01a30ce548a284743a445e3680d7db5ac3ac18ff9b538d16f290ae67f760984dc6594a7c15e9716ed28dc027beceea1ec40a"},
};

// Frozen from tools/oracles/ledger_oracle.py.
constexpr const char* kOracleClaimId = "74f76a5eb2fe3afe9b0835bc22fdf28291cbf45543b82180c4bc999b214dcc57";
constexpr const char* kOracleProviderPk = "8a88e3dd7409f195fd52db2d3cba5d72ca6709bf1d94121bf3748801b40f6f5c";
constexpr const char* kOraclePatientPk = "8139770ea87d175f56a35466c34c7ecccb8d8a91b4ee37a25df60f5b8fc9b394";
constexpr const char* kOracleProviderSig =
    "eb970bede821799c7bb8016d4a82cd1cfbb8a8e313ae98ae00acf062c7f8d828a56e642d937fd8cee1e44c0b70f72ca05ba4641fd6f834a9496d51165fbd0e0d";
constexpr const char* kOracleEnvelopeSha = "b49109a863b1054467b09e242aedca1a5086345837a37e305b3749f6c18832c0";

struct Pair {
    IdentityRegistry registry;
    Signer provider = generate_identity(Role::Provider, seed_of(1), "provider-1");
    Signer patient = generate_identity(Role::Patient, seed_of(2), "patient-1");
    Signer insurer = generate_identity(Role::Insurer, seed_of(3), "insurer-1");
    Hash32 digest = sha256(as_bytes("claim"));

    Pair() {
        registry.add(provider.identity());
        registry.add(patient.identity());
        registry.add(insurer.identity());
    }

    MultiSigEnvelope envelope() {
        return make_envelope(digest, {Role::Provider, Role::Patient},
                             {provider.sign_digest(digest), patient.sign_digest(digest)});
    }
};

} // namespace

TEST_CASE("ed25519 matches RFC 8032 vectors", "[crypto]") {
    for (const auto& v : kVectors) {
        auto keys = ed25519::keypair_from_seed(from_hex(v.secret));
        CHECK(to_hex(keys.public_key) == v.public_key);
        auto msg = from_hex(v.message);
        auto sig = ed25519::sign(keys, msg);
        CHECK(to_hex(sig) == v.signature);
        CHECK(ed25519::verify(keys.public_key, msg, sig));
    }
}

TEST_CASE("all-zero seed yields the reference public key", "[crypto]") {
    auto patient = generate_identity(Role::Patient, Bytes(32, 0));
    CHECK(to_hex(patient.identity().public_key) ==
          "3b6a27bcceb6a42d62a3a8d02a6f0d73653215771de243a63ac048a18b59da29");
    CHECK(patient.identity().nonce == 0);
    CHECK(patient.role() == Role::Patient);
}

TEST_CASE("generate_identity is deterministic and injective", "[crypto]") {
    auto a = generate_identity(Role::Provider, seed_of(9));
    auto b = generate_identity(Role::Provider, seed_of(9));
    CHECK(a.identity().public_key == b.identity().public_key);
    CHECK(a.id() == b.id());

    std::mt19937_64 rng(5);
    std::set<PublicKey> keys;
    for (int i = 0; i < 200; ++i) {
        Bytes seed(32);
        for (auto& byte : seed) byte = static_cast<std::uint8_t>(rng());
        keys.insert(generate_identity(Role::Provider, seed).identity().public_key);
    }
    CHECK(keys.size() == 200);
}

TEST_CASE("malformed seed length is InvalidSeed", "[crypto]") {
    CHECK_THROWS_AS(generate_identity(Role::Patient, Bytes(31, 0)), InvalidSeed);
    CHECK_THROWS_AS(generate_identity(Role::Patient, Bytes(33, 0)), InvalidSeed);
    CHECK_THROWS_AS(generate_identity(Role::Patient, Bytes{}), InvalidSeed);
}

TEST_CASE("signing message and signatures match the independent oracle", "[crypto]") {
    auto provider = generate_identity(Role::Provider, seed_of(1), "provider-1");
    auto patient = generate_identity(Role::Patient, seed_of(2), "patient-1");
    CHECK(to_hex(provider.identity().public_key) == kOracleProviderPk);
    CHECK(to_hex(patient.identity().public_key) == kOraclePatientPk);

    std::vector<ClaimLineItem> lines{test_support::line("E100", 12000), test_support::line("X400", 20000)};
    auto claim_id = compute_claim_id("POL-1001", "provider-1", "patient-1", lines, 7);
    REQUIRE(to_hex(claim_id) == kOracleClaimId);

    auto sig = provider.sign_digest(claim_id);
    CHECK(sig.nonce == 1);
    CHECK(to_hex(sig.bytes) == kOracleProviderSig);

    // Supplied out of order; canonicalization puts the patient first.
    auto env = make_envelope(claim_id, {Role::Provider, Role::Patient}, {sig, patient.sign_digest(claim_id)});
    CHECK(env.signatures.front().signer_role == Role::Patient);
    CHECK(to_hex(sha256(env.encode())) == kOracleEnvelopeSha);
}

TEST_CASE("sign increments the nonce and round-trips", "[crypto]") {
    auto signer = generate_identity(Role::Insurer, seed_of(4));
    std::mt19937_64 rng(11);
    for (std::uint64_t i = 1; i <= 50; ++i) {
        Bytes payload(rng() % 300);
        for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
        auto sig = signer.sign(payload);
        CHECK(sig.nonce == i);
        CHECK(signer.identity().nonce == i);
        CHECK(verify(sig, payload, signer.identity().public_key));

        auto other = payload;
        other.push_back(0x5a);
        CHECK_FALSE(verify(sig, other, signer.identity().public_key));
    }
}

TEST_CASE("a signature never verifies under another identity's key", "[crypto]") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        Bytes sa(32), sb(32);
        for (auto& b : sa) b = static_cast<std::uint8_t>(rng());
        for (auto& b : sb) b = static_cast<std::uint8_t>(rng());
        auto a = generate_identity(Role::Patient, sa);
        auto b = generate_identity(Role::Patient, sb);
        auto payload = as_bytes("payload-" + std::to_string(i));
        auto sig = a.sign(payload);
        CHECK_FALSE(verify(sig, payload, b.identity().public_key));
    }
}

TEST_CASE("signer rejects mismatched key material", "[crypto]") {
    auto a = ed25519::keypair_from_seed(seed_of(1));
    auto b = ed25519::keypair_from_seed(seed_of(2));
    CHECK_THROWS_AS(Signer(Identity{"x", Role::Patient, a.public_key, 0}, b), SigningFailure);
}

TEST_CASE("verify_multisig accepts a valid pair and advances nonces", "[crypto][multisig]") {
    Pair p;
    auto env = p.envelope();
    CHECK(p.registry.verify_multisig(env));
    CHECK(p.registry.at("provider-1").nonce == 1);
    CHECK(p.registry.at("patient-1").nonce == 1);
    // Same envelope again is a replay.
    CHECK_FALSE(p.registry.verify_multisig(env));
    CHECK(p.registry.check_multisig(env) == MultisigVerdict::StaleNonce);
}

TEST_CASE("each multisig conjunct is independently falsifiable", "[crypto][multisig]") {
    SECTION("missing patient signature") {
        Pair p;
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient}, {p.provider.sign_digest(p.digest)});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::MissingRole);
        CHECK_FALSE(p.registry.verify_multisig(env));
        CHECK(p.registry.at("provider-1").nonce == 0);
    }
    SECTION("signature over a different digest") {
        Pair p;
        auto other = sha256(as_bytes("other"));
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), p.patient.sign_digest(other)});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::BadSignature);
        CHECK_FALSE(p.registry.verify_multisig(env));
    }
    SECTION("replayed nonce") {
        Pair p;
        auto first = p.envelope();
        REQUIRE(p.registry.verify_multisig(first));
        auto consumed_patient = first.signatures.front();
        REQUIRE(consumed_patient.signer_role == Role::Patient);
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), consumed_patient});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::StaleNonce);
        CHECK_FALSE(p.registry.verify_multisig(env));
    }
    SECTION("duplicate role") {
        Pair p;
        auto second = generate_identity(Role::Provider, seed_of(8), "provider-2");
        p.registry.add(second.identity());
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), second.sign_digest(p.digest)});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::DuplicateRole);
        CHECK_FALSE(p.registry.verify_multisig(env));
    }
    SECTION("unknown signer") {
        Pair p;
        auto stranger = generate_identity(Role::Patient, seed_of(9), "patient-9");
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), stranger.sign_digest(p.digest)});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::UnknownSigner);
        CHECK_FALSE(p.registry.verify_multisig(env));
    }
    SECTION("impostor using a registered id with its own key") {
        Pair p;
        auto impostor = generate_identity(Role::Patient, seed_of(9), "patient-1");
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), impostor.sign_digest(p.digest)});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::BadSignature);
    }
    SECTION("role claimed differs from registration") {
        Pair p;
        auto sig = p.insurer.sign_digest(p.digest);
        sig.signer_role = Role::Patient;
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient}, {p.provider.sign_digest(p.digest), sig});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::RoleMismatch);
    }
    SECTION("three signatures") {
        Pair p;
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), p.patient.sign_digest(p.digest),
                                  p.insurer.sign_digest(p.digest)});
        CHECK(p.registry.check_multisig(env) == MultisigVerdict::WrongArity);
    }
    SECTION("signature from an unrequired role") {
        Pair p;
        auto env = make_envelope(p.digest, {Role::Provider, Role::Patient},
                                 {p.provider.sign_digest(p.digest), p.insurer.sign_digest(p.digest)});
        CHECK_FALSE(p.registry.verify_multisig(env));
    }
}

TEST_CASE("failed verification leaves every nonce untouched", "[crypto][multisig]") {
    Pair p;
    auto env = p.envelope();
    env.signatures[1].bytes[0] ^= 1;
    CHECK_FALSE(p.registry.verify_multisig(env));
    CHECK(p.registry.at("provider-1").nonce == 0);
    CHECK(p.registry.at("patient-1").nonce == 0);
}

TEST_CASE("envelope encoding is canonical and injective", "[crypto][multisig]") {
    Pair p;
    auto s1 = p.provider.sign_digest(p.digest);
    auto s2 = p.patient.sign_digest(p.digest);
    auto a = make_envelope(p.digest, {Role::Provider, Role::Patient}, {s1, s2});
    auto b = make_envelope(p.digest, {Role::Provider, Role::Patient}, {s2, s1});
    CHECK(a.encode() == b.encode());
    CHECK(MultiSigEnvelope::decode(a.encode()) == a);

    std::set<Bytes> seen{a.encode()};
    auto mutate = [&](auto&& f) {
        auto e = a;
        f(e);
        e.canonicalize();
        CHECK(seen.insert(e.encode()).second);
    };
    mutate([](MultiSigEnvelope& e) { e.payload_digest[0] ^= 1; });
    mutate([](MultiSigEnvelope& e) { e.signatures[0].nonce += 1; });
    mutate([](MultiSigEnvelope& e) { e.signatures[0].signer_id += "x"; });
    mutate([](MultiSigEnvelope& e) { e.signatures[1].bytes[63] ^= 0x80; });
    mutate([](MultiSigEnvelope& e) { e.signatures.pop_back(); });
    mutate([](MultiSigEnvelope& e) { e.required_roles = {Role::Insurer, Role::Patient}; });
    // Moving a byte across the id/role boundary must not collide.
    mutate([](MultiSigEnvelope& e) {
        e.signatures[0].signer_id = "patient-";
        e.signatures[1].signer_id = "1provider-1";
    });
}

TEST_CASE("truncated envelope bytes fail to decode", "[crypto]") {
    Pair p;
    auto bytes = p.envelope().encode();
    for (std::size_t n : {0ul, 10ul, 33ul, bytes.size() - 1}) {
        CHECK_THROWS_AS(MultiSigEnvelope::decode(ByteView(bytes.data(), n)), EncodingError);
    }
    bytes.push_back(0);
    CHECK_THROWS_AS(MultiSigEnvelope::decode(bytes), EncodingError);
}

TEST_CASE("registry JSON round trip preserves keys and nonces", "[crypto]") {
    Pair p;
    REQUIRE(p.registry.verify_multisig(p.envelope()));
    auto j = registry_to_json(p.registry);
    REQUIRE(j.is_array());
    CHECK(j[0].contains("public_key"));
    auto back = registry_from_json(j);
    CHECK(back.identities() == p.registry.identities());
    CHECK(back.at("patient-1").nonce == 1);
    CHECK(back.fresh_copy().at("patient-1").nonce == 0);
}

TEST_CASE("registry rejects duplicate ids and keys", "[crypto]") {
    Pair p;
    CHECK_THROWS_AS(p.registry.add(p.provider.identity()), RegistryError);
    auto clone = p.patient.identity();
    clone.id = "patient-clone";
    CHECK_THROWS_AS(p.registry.add(clone), RegistryError);
    CHECK_THROWS_AS(p.registry.at("nobody"), UnknownSigner);
}
