#include "claimledger/crypto.hpp"

#include "claimledger/encoding.hpp"

#include <sodium.h>

#include <algorithm>

namespace claimledger {

namespace {

struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0) {
            throw std::runtime_error("libsodium initialization failed");
        }
    }
};

void ensure_sodium() {
    static const SodiumInit init;
}

constexpr std::string_view kSignatureDomain = "claimledger/sig/v1";

std::string_view role_prefix(Role role) {
    switch (role) {
    case Role::Patient: return "patient";
    case Role::Provider: return "provider";
    case Role::Insurer: return "insurer";
    }
    return "unknown";
}

} // namespace

std::string_view role_name(Role role) {
    switch (role) {
    case Role::Patient: return "Patient";
    case Role::Provider: return "Provider";
    case Role::Insurer: return "Insurer";
    }
    return "Unknown";
}

Role parse_role(std::string_view name) {
    for (auto r : {Role::Patient, Role::Provider, Role::Insurer}) {
        if (role_name(r) == name) return r;
    }
    throw std::invalid_argument("unknown role: " + std::string(name));
}

namespace ed25519 {

KeyPair keypair_from_seed(ByteView seed) {
    if (seed.size() != crypto_sign_SEEDBYTES) {
        throw InvalidSeed("seed must be 32 bytes, got " + std::to_string(seed.size()));
    }
    ensure_sodium();
    KeyPair keys;
    if (crypto_sign_seed_keypair(keys.public_key.data(), keys.secret_key.data(), seed.data()) != 0) {
        throw SigningFailure("key derivation failed");
    }
    return keys;
}

SignatureBytes sign(const KeyPair& keys, ByteView message) {
    ensure_sodium();
    SignatureBytes sig{};
    if (crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                             keys.secret_key.data()) != 0) {
        throw SigningFailure("crypto_sign_detached failed");
    }
    return sig;
}

bool verify(const PublicKey& key, ByteView message, const SignatureBytes& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), key.data()) == 0;
}

} // namespace ed25519

Bytes signing_message(const Hash32& digest, std::string_view signer_id, Role role,
                      std::uint64_t nonce) {
    Encoder enc;
    enc.str(kSignatureDomain)
        .fixed(digest)
        .str(signer_id)
        .u8(static_cast<std::uint8_t>(role))
        .u64(nonce);
    return std::move(enc).take();
}

bool verify_signature(const Signature& sig, const Hash32& digest, const PublicKey& key) {
    auto msg = signing_message(digest, sig.signer_id, sig.signer_role, sig.nonce);
    return ed25519::verify(key, msg, sig.bytes);
}

bool verify(const Signature& sig, ByteView payload, const PublicKey& key) {
    return verify_signature(sig, sha256(payload), key);
}

Signer::Signer(Identity identity, ed25519::KeyPair keys)
    : identity_(std::move(identity)), keys_(keys) {
    if (identity_.public_key != keys_.public_key) {
        throw SigningFailure("identity public key does not match key material");
    }
}

Signature Signer::sign_digest(const Hash32& digest) {
    Signature sig;
    sig.signer_id = identity_.id;
    sig.signer_role = identity_.role;
    sig.nonce = identity_.nonce + 1;
    sig.bytes = ed25519::sign(keys_, signing_message(digest, sig.signer_id, sig.signer_role, sig.nonce));
    identity_.nonce = sig.nonce;
    return sig;
}

Signature Signer::sign(ByteView payload) {
    return sign_digest(sha256(payload));
}

Signer generate_identity(Role role, ByteView seed, std::string id) {
    auto keys = ed25519::keypair_from_seed(seed);
    if (id.empty()) {
        id = std::string(role_prefix(role)) + "-" +
             to_hex(ByteView(keys.public_key.data(), 4));
    }
    return Signer(Identity{std::move(id), role, keys.public_key, 0}, keys);
}

void MultiSigEnvelope::canonicalize() {
    std::sort(signatures.begin(), signatures.end(), [](const Signature& a, const Signature& b) {
        if (a.signer_role != b.signer_role) return a.signer_role < b.signer_role;
        if (a.signer_id != b.signer_id) return a.signer_id < b.signer_id;
        return a.nonce < b.nonce;
    });
}

Bytes MultiSigEnvelope::encode() const {
    Encoder enc;
    enc.fixed(payload_digest)
        .u8(static_cast<std::uint8_t>(required_roles[0]))
        .u8(static_cast<std::uint8_t>(required_roles[1]))
        .count(signatures.size());
    for (const auto& s : signatures) {
        enc.str(s.signer_id).u8(static_cast<std::uint8_t>(s.signer_role)).u64(s.nonce).fixed(s.bytes);
    }
    return std::move(enc).take();
}

MultiSigEnvelope MultiSigEnvelope::decode(ByteView data) {
    Decoder dec(data);
    MultiSigEnvelope env;
    env.payload_digest = dec.hash();
    env.required_roles[0] = static_cast<Role>(dec.u8());
    env.required_roles[1] = static_cast<Role>(dec.u8());
    auto n = dec.count();
    for (std::size_t i = 0; i < n; ++i) {
        Signature s;
        s.signer_id = dec.str();
        s.signer_role = static_cast<Role>(dec.u8());
        s.nonce = dec.u64();
        auto raw = dec.fixed(64);
        std::copy(raw.begin(), raw.end(), s.bytes.begin());
        env.signatures.push_back(std::move(s));
    }
    dec.finish();
    return env;
}

MultiSigEnvelope make_envelope(const Hash32& digest, std::array<Role, 2> roles,
                               std::vector<Signature> signatures) {
    MultiSigEnvelope env{digest, roles, std::move(signatures)};
    env.canonicalize();
    return env;
}

std::string_view verdict_name(MultisigVerdict v) {
    switch (v) {
    case MultisigVerdict::Valid: return "Valid";
    case MultisigVerdict::WrongArity: return "WrongArity";
    case MultisigVerdict::MissingRole: return "MissingRole";
    case MultisigVerdict::DuplicateRole: return "DuplicateRole";
    case MultisigVerdict::UnexpectedRole: return "UnexpectedRole";
    case MultisigVerdict::UnknownSigner: return "UnknownSigner";
    case MultisigVerdict::RoleMismatch: return "RoleMismatch";
    case MultisigVerdict::BadSignature: return "BadSignature";
    case MultisigVerdict::StaleNonce: return "StaleNonce";
    }
    return "Unknown";
}

IdentityRegistry::IdentityRegistry(const IdentityRegistry& other) {
    std::lock_guard lock(other.mu_);
    by_id_ = other.by_id_;
}

void IdentityRegistry::add(const Identity& identity) {
    std::lock_guard lock(mu_);
    if (identity.id.empty()) {
        throw RegistryError("identity id must be non-empty");
    }
    if (by_id_.contains(identity.id)) {
        throw RegistryError("duplicate identity id: " + identity.id);
    }
    for (const auto& [id, existing] : by_id_) {
        if (existing.public_key == identity.public_key) {
            throw RegistryError("public key already registered to " + id);
        }
    }
    by_id_.emplace(identity.id, identity);
}

bool IdentityRegistry::contains(std::string_view id) const {
    std::lock_guard lock(mu_);
    return by_id_.find(id) != by_id_.end();
}

Identity IdentityRegistry::at(std::string_view id) const {
    if (auto found = find(id)) return *found;
    throw UnknownSigner("unknown signer: " + std::string(id));
}

std::optional<Identity> IdentityRegistry::find(std::string_view id) const {
    std::lock_guard lock(mu_);
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::vector<Identity> IdentityRegistry::identities() const {
    std::lock_guard lock(mu_);
    std::vector<Identity> out;
    out.reserve(by_id_.size());
    for (const auto& [id, ident] : by_id_) out.push_back(ident);
    return out;
}

std::size_t IdentityRegistry::size() const {
    std::lock_guard lock(mu_);
    return by_id_.size();
}

IdentityRegistry IdentityRegistry::fresh_copy() const {
    IdentityRegistry copy(*this);
    for (auto& [id, ident] : copy.by_id_) ident.nonce = 0;
    return copy;
}

MultisigVerdict IdentityRegistry::check_locked(const MultiSigEnvelope& env) const {
    if (env.signatures.size() != 2) {
        // A lone signature is reported as the missing co-signer.
        return env.signatures.size() < 2 ? MultisigVerdict::MissingRole : MultisigVerdict::WrongArity;
    }
    const auto& sigs = env.signatures;
    for (const auto& s : sigs) {
        if (s.signer_role != env.required_roles[0] && s.signer_role != env.required_roles[1]) {
            return MultisigVerdict::UnexpectedRole;
        }
    }
    if (sigs[0].signer_role == sigs[1].signer_role) {
        return MultisigVerdict::DuplicateRole;
    }
    for (const auto& s : sigs) {
        auto it = by_id_.find(s.signer_id);
        if (it == by_id_.end()) return MultisigVerdict::UnknownSigner;
        if (it->second.role != s.signer_role) return MultisigVerdict::RoleMismatch;
        if (!verify_signature(s, env.payload_digest, it->second.public_key)) {
            return MultisigVerdict::BadSignature;
        }
        if (s.nonce <= it->second.nonce) return MultisigVerdict::StaleNonce;
    }
    return MultisigVerdict::Valid;
}

MultisigVerdict IdentityRegistry::check_multisig(const MultiSigEnvelope& env) const {
    std::lock_guard lock(mu_);
    return check_locked(env);
}

MultisigVerdict IdentityRegistry::consume_multisig(const MultiSigEnvelope& env) {
    std::lock_guard lock(mu_);
    auto verdict = check_locked(env);
    if (verdict == MultisigVerdict::Valid) {
        for (const auto& s : env.signatures) {
            by_id_.find(s.signer_id)->second.nonce = s.nonce;
        }
    }
    return verdict;
}

bool IdentityRegistry::verify_multisig(const MultiSigEnvelope& env) {
    return consume_multisig(env) == MultisigVerdict::Valid;
}

} // namespace claimledger
