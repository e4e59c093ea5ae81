#pragma once

#include "claimledger/bytes.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

enum class Role : std::uint8_t { Patient = 0, Provider = 1, Insurer = 2 };

std::string_view role_name(Role role);
/// Accepts the exact names produced by role_name.
Role parse_role(std::string_view name);

using PublicKey = std::array<std::uint8_t, 32>;
using SignatureBytes = std::array<std::uint8_t, 64>;

class InvalidSeed : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SigningFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownSigner : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RegistryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thin wrapper over libsodium's Ed25519 (RFC 8032, pure variant).
namespace ed25519 {

struct KeyPair {
    PublicKey public_key{};
    std::array<std::uint8_t, 64> secret_key{}; // seed || public key, libsodium layout
};

KeyPair keypair_from_seed(ByteView seed);
SignatureBytes sign(const KeyPair& keys, ByteView message);
bool verify(const PublicKey& key, ByteView message, const SignatureBytes& sig);

} // namespace ed25519

struct Identity {
    std::string id;
    Role role = Role::Patient;
    PublicKey public_key{};
    std::uint64_t nonce = 0;

    bool operator==(const Identity&) const = default;
};

struct Signature {
    std::string signer_id;
    Role signer_role = Role::Patient;
    std::uint64_t nonce = 0;
    SignatureBytes bytes{};

    bool operator==(const Signature&) const = default;
};

/// The exact byte string that Ed25519 signs for a protocol signature. Binds
/// the digest to the signer's id, role and nonce so none of them can be
/// swapped after signing.
Bytes signing_message(const Hash32& digest, std::string_view signer_id, Role role,
                      std::uint64_t nonce);

bool verify_signature(const Signature& sig, const Hash32& digest, const PublicKey& key);

/// verify(sign(p), p, pk): digest is SHA-256 of the payload.
bool verify(const Signature& sig, ByteView payload, const PublicKey& key);

/// An identity together with its secret key. Each signature consumes the
/// next nonce.
class Signer {
public:
    Signer(Identity identity, ed25519::KeyPair keys);

    const Identity& identity() const { return identity_; }
    const std::string& id() const { return identity_.id; }
    Role role() const { return identity_.role; }

    Signature sign_digest(const Hash32& digest);
    Signature sign(ByteView payload);

private:
    Identity identity_;
    ed25519::KeyPair keys_;
};

/// Deterministic in (role, seed). When `id` is empty one is derived from the
/// role and the public key. Throws InvalidSeed unless seed is 32 bytes.
Signer generate_identity(Role role, ByteView seed, std::string id = {});

struct MultiSigEnvelope {
    Hash32 payload_digest{};
    std::array<Role, 2> required_roles{Role::Provider, Role::Patient};
    std::vector<Signature> signatures;

    /// Sorts signatures by (role, signer_id).
    void canonicalize();

    Bytes encode() const;
    static MultiSigEnvelope decode(ByteView data);

    bool operator==(const MultiSigEnvelope&) const = default;
};

MultiSigEnvelope make_envelope(const Hash32& digest, std::array<Role, 2> roles,
                               std::vector<Signature> signatures);

enum class MultisigVerdict {
    Valid,
    WrongArity,     // not exactly two signatures
    MissingRole,    // a required role has no signature
    DuplicateRole,  // a role is covered twice
    UnexpectedRole, // signature from a role outside required_roles
    UnknownSigner,  // signer_id not registered
    RoleMismatch,   // claimed role differs from the registered one
    BadSignature,
    StaleNonce,
};

std::string_view verdict_name(MultisigVerdict v);

/// Registered identities plus the last nonce consumed per signer.
/// Thread-safe; nonce advancement is serialized.
class IdentityRegistry {
public:
    IdentityRegistry() = default;
    IdentityRegistry(const IdentityRegistry& other);
    IdentityRegistry& operator=(const IdentityRegistry&) = delete;

    /// Throws RegistryError on a duplicate id or public key.
    void add(const Identity& identity);

    bool contains(std::string_view id) const;
    /// Throws UnknownSigner.
    Identity at(std::string_view id) const;
    std::optional<Identity> find(std::string_view id) const;
    /// Sorted by id.
    std::vector<Identity> identities() const;
    std::size_t size() const;

    /// Same identities with every nonce reset to zero.
    IdentityRegistry fresh_copy() const;

    MultisigVerdict check_multisig(const MultiSigEnvelope& envelope) const;

    /// True iff check_multisig is Valid; on success the signers' last-seen
    /// nonces advance to the embedded values.
    bool verify_multisig(const MultiSigEnvelope& envelope);

    /// Like verify_multisig but reports why it failed.
    MultisigVerdict consume_multisig(const MultiSigEnvelope& envelope);

private:
    MultisigVerdict check_locked(const MultiSigEnvelope& envelope) const;

    mutable std::mutex mu_;
    std::map<std::string, Identity, std::less<>> by_id_;
};

} // namespace claimledger
