#!/usr/bin/env python3
"""Recomputes the frozen digests in tests/test_ledger.cpp and tests/test_crypto.cpp.

Written against docs/ENCODING.md only; shares no code with the C++ library.
"""
import hashlib
import struct

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives import serialization


def u8(v):
    return struct.pack(">B", v)


def u32(v):
    return struct.pack(">I", v)


def u64(v):
    return struct.pack(">Q", v)


def i64(v):
    return struct.pack(">q", v)


def blob(b):
    return u32(len(b)) + b


def text(s):
    return blob(s.encode())


def claim_content(policy, provider, patient, lines, nonce):
    out = text(policy) + text(provider) + text(patient) + u32(len(lines))
    for code, cents in lines:
        out += text(code) + u64(cents)
    return out + u64(nonce)


def signing_message(digest, signer_id, role, nonce):
    return text("claimledger/sig/v1") + digest + text(signer_id) + u8(role) + u64(nonce)


def sign(seed, msg):
    return Ed25519PrivateKey.from_private_bytes(seed).sign(msg)


def pubkey(seed):
    return Ed25519PrivateKey.from_private_bytes(seed).public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def record_hash(prev, index, ts, kind, payload, envelope=None):
    pre = prev + u64(index) + i64(ts) + u8(kind) + blob(payload)
    pre += u8(0) if envelope is None else u8(1) + blob(envelope)
    return hashlib.sha256(pre).digest()


PATIENT, PROVIDER = 0, 1
CLAIM_SUBMITTED, SCENARIO_NOTE = 2, 6

claim_id = hashlib.sha256(claim_content(
    "POL-1001", "provider-1", "patient-1", [("E100", 12000), ("X400", 20000)], 7)).digest()
print("claim_id        ", claim_id.hex())

provider_seed, patient_seed = bytes([1]) * 32, bytes([2]) * 32
print("provider_pk     ", pubkey(provider_seed).hex())
print("patient_pk      ", pubkey(patient_seed).hex())

sig_provider = sign(provider_seed, signing_message(claim_id, "provider-1", PROVIDER, 1))
sig_patient = sign(patient_seed, signing_message(claim_id, "patient-1", PATIENT, 1))
print("sig_provider    ", sig_provider.hex())

# Canonical order: role enum, then signer id.
envelope = claim_id + u8(PROVIDER) + u8(PATIENT) + u32(2)
envelope += text("patient-1") + u8(PATIENT) + u64(1) + sig_patient
envelope += text("provider-1") + u8(PROVIDER) + u64(1) + sig_provider
print("envelope_sha256 ", hashlib.sha256(envelope).hexdigest())

payload0 = bytes(range(32)) + b"fixture"
h0 = record_hash(bytes(32), 0, 1_700_000_000_000, CLAIM_SUBMITTED, payload0)
print("record0         ", h0.hex())
h1 = record_hash(h0, 1, 1_700_000_001_000, CLAIM_SUBMITTED, claim_id, envelope)
print("record1         ", h1.hex())
h2 = record_hash(h1, 2, -5, SCENARIO_NOTE, b"")
print("record2         ", h2.hex())
