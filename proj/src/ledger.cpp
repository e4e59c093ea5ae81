#include "claimledger/ledger.hpp"

#include "claimledger/encoding.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

namespace claimledger {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr EventKind kAllKinds[] = {
    EventKind::IdentityRegistered, EventKind::PolicyRegistered, EventKind::ClaimSubmitted,
    EventKind::ClaimApproved,      EventKind::PaymentReceived,  EventKind::AckRecorded,
    EventKind::ScenarioNote,
};

ordered_json envelope_to_json(const MultiSigEnvelope& env) {
    ordered_json sigs = ordered_json::array();
    for (const auto& s : env.signatures) {
        sigs.push_back(ordered_json{{"signer_id", s.signer_id},
                                    {"signer_role", role_name(s.signer_role)},
                                    {"nonce", s.nonce},
                                    {"sig_hex", to_hex(s.bytes)}});
    }
    return ordered_json{
        {"payload_digest_hex", to_hex(env.payload_digest)},
        {"required_roles", {role_name(env.required_roles[0]), role_name(env.required_roles[1])}},
        {"signatures", std::move(sigs)},
    };
}

MultiSigEnvelope envelope_from_json(const ordered_json& j) {
    MultiSigEnvelope env;
    env.payload_digest = hash32_from_hex(j.at("payload_digest_hex").get<std::string>());
    const auto& roles = j.at("required_roles");
    if (!roles.is_array() || roles.size() != 2) {
        throw LedgerFormatError("required_roles must be a pair");
    }
    env.required_roles = {parse_role(roles[0].get<std::string>()),
                          parse_role(roles[1].get<std::string>())};
    for (const auto& s : j.at("signatures")) {
        Signature sig;
        sig.signer_id = s.at("signer_id").get<std::string>();
        sig.signer_role = parse_role(s.at("signer_role").get<std::string>());
        sig.nonce = s.at("nonce").get<std::uint64_t>();
        sig.bytes = array_from_hex<64>(s.at("sig_hex").get<std::string>());
        env.signatures.push_back(std::move(sig));
    }
    return env;
}

} // namespace

std::string_view kind_name(EventKind kind) {
    switch (kind) {
    case EventKind::IdentityRegistered: return "IdentityRegistered";
    case EventKind::PolicyRegistered: return "PolicyRegistered";
    case EventKind::ClaimSubmitted: return "ClaimSubmitted";
    case EventKind::ClaimApproved: return "ClaimApproved";
    case EventKind::PaymentReceived: return "PaymentReceived";
    case EventKind::AckRecorded: return "AckRecorded";
    case EventKind::ScenarioNote: return "ScenarioNote";
    }
    return "Unknown";
}

EventKind parse_kind(std::string_view name) {
    for (auto k : kAllKinds) {
        if (kind_name(k) == name) return k;
    }
    throw LedgerFormatError("unknown event kind: " + std::string(name));
}

bool is_claim_scoped(EventKind kind) {
    switch (kind) {
    case EventKind::ClaimSubmitted:
    case EventKind::ClaimApproved:
    case EventKind::PaymentReceived:
    case EventKind::AckRecorded:
    case EventKind::ScenarioNote:
        return true;
    default:
        return false;
    }
}

Bytes record_preimage(const LedgerRecord& record) {
    Encoder enc;
    enc.fixed(record.prev_hash)
        .u64(record.index)
        .i64(record.timestamp_ms)
        .u8(static_cast<std::uint8_t>(record.kind))
        .bytes(record.payload);
    if (record.envelope) {
        enc.u8(1).bytes(record.envelope->encode());
    } else {
        enc.u8(0);
    }
    return std::move(enc).take();
}

Hash32 compute_record_hash(const LedgerRecord& record) {
    return sha256(record_preimage(record));
}

ChainCheck verify_chain(std::span<const LedgerRecord> records) {
    Hash32 expected_prev{};
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.index != i || r.prev_hash != expected_prev || compute_record_hash(r) != r.record_hash) {
            return {i};
        }
        expected_prev = r.record_hash;
    }
    return {};
}

std::optional<Hash32> payload_subject(const LedgerRecord& record) {
    if (!is_claim_scoped(record.kind) || record.payload.size() < 32) return std::nullopt;
    Hash32 subject{};
    std::copy_n(record.payload.begin(), 32, subject.begin());
    return subject;
}

std::string record_to_json_line(const LedgerRecord& r) {
    ordered_json j{
        {"index", r.index},
        {"ts_ms", r.timestamp_ms},
        {"kind", kind_name(r.kind)},
        {"payload_hex", to_hex(r.payload)},
        {"envelope", r.envelope ? envelope_to_json(*r.envelope) : ordered_json(nullptr)},
        {"prev_hash_hex", to_hex(r.prev_hash)},
        {"hash_hex", to_hex(r.record_hash)},
    };
    return j.dump();
}

LedgerRecord record_from_json_line(std::string_view line) {
    try {
        auto j = ordered_json::parse(line);
        LedgerRecord r;
        r.index = j.at("index").get<std::uint64_t>();
        r.timestamp_ms = j.at("ts_ms").get<std::int64_t>();
        r.kind = parse_kind(j.at("kind").get<std::string>());
        r.payload = from_hex(j.at("payload_hex").get<std::string>());
        const auto& env = j.at("envelope");
        if (!env.is_null()) r.envelope = envelope_from_json(env);
        r.prev_hash = hash32_from_hex(j.at("prev_hash_hex").get<std::string>());
        r.record_hash = hash32_from_hex(j.at("hash_hex").get<std::string>());
        return r;
    } catch (const LedgerFormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw LedgerFormatError(e.what());
    }
}

Ledger::Ledger(Ledger&& other) noexcept {
    std::lock_guard lock(other.mu_);
    records_ = std::move(other.records_);
}

LedgerRecord Ledger::append(EventKind kind, Bytes payload, std::optional<MultiSigEnvelope> envelope,
                            std::int64_t timestamp_ms) {
    std::lock_guard lock(mu_);
    LedgerRecord r;
    r.index = records_.size();
    r.timestamp_ms = timestamp_ms;
    r.kind = kind;
    r.payload = std::move(payload);
    r.envelope = std::move(envelope);
    if (!records_.empty()) r.prev_hash = records_.back().record_hash;
    r.record_hash = compute_record_hash(r);
    records_.push_back(r);
    return r;
}

std::size_t Ledger::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

LedgerRecord Ledger::at(std::size_t index) const {
    std::lock_guard lock(mu_);
    return records_.at(index);
}

std::vector<LedgerRecord> Ledger::records() const {
    std::lock_guard lock(mu_);
    return records_;
}

Hash32 Ledger::head_hash() const {
    std::lock_guard lock(mu_);
    return records_.empty() ? Hash32{} : records_.back().record_hash;
}

ChainCheck Ledger::verify() const {
    return verify_chain(records());
}

std::vector<LedgerRecord> Ledger::audit_trail(const Hash32& claim_id) const {
    std::lock_guard lock(mu_);
    std::vector<LedgerRecord> out;
    for (const auto& r : records_) {
        if (payload_subject(r) == claim_id) out.push_back(r);
    }
    return out;
}

std::string Ledger::to_jsonl() const {
    std::string out;
    for (const auto& r : records()) {
        out += record_to_json_line(r);
        out += '\n';
    }
    return out;
}

void Ledger::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << to_jsonl();
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

Ledger Ledger::from_jsonl(std::string_view text) {
    Ledger ledger;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            ledger.records_.push_back(record_from_json_line(line));
        } catch (const LedgerFormatError& e) {
            throw LedgerFormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    auto check = verify_chain(ledger.records_);
    if (!check.ok()) throw LedgerIntegrityError(*check.first_bad_index);
    return ledger;
}

Ledger Ledger::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return from_jsonl(ss.str());
}

} // namespace claimledger
