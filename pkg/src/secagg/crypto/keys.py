"""Key agreement (ECDH over P-256 + HKDF) and Ed25519 signatures."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec, ed25519
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

# Order of the P-256 base point. Committee secret keys are scalars below this
# prime, and the same prime is the Shamir field and the commitment group order.
CURVE_ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551

SCALAR_BYTES = 32
KA_PUBLIC_BYTES = 33
DS_PUBLIC_BYTES = 32
SIGNATURE_BYTES = 64
SYMMETRIC_KEY_BYTES = 32

_CURVE = ec.SECP256R1()


class InvalidPublicKey(ValueError):
    """Raised when a public key does not decode to a valid curve point."""


@dataclass(frozen=True)
class KeyPair:
    secret: bytes
    public: bytes

    def to_bytes(self) -> bytes:
        return len(self.secret).to_bytes(2, "big") + self.secret + self.public

    @classmethod
    def from_bytes(cls, data: bytes) -> KeyPair:
        if len(data) < 2:
            raise ValueError("truncated key pair")
        n = int.from_bytes(data[:2], "big")
        if len(data) < 2 + n:
            raise ValueError("truncated key pair")
        return cls(secret=bytes(data[2 : 2 + n]), public=bytes(data[2 + n :]))

    @property
    def scalar(self) -> int:
        return int.from_bytes(self.secret, "big")


# ---------------------------------------------------------------------------
# Key agreement
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8192)
def _private_key(scalar: int) -> ec.EllipticCurvePrivateKey:
    return ec.derive_private_key(scalar, _CURVE)


@lru_cache(maxsize=8192)
def _public_key(encoded: bytes) -> ec.EllipticCurvePublicKey:
    try:
        return ec.EllipticCurvePublicKey.from_encoded_point(_CURVE, encoded)
    except ValueError as exc:
        raise InvalidPublicKey(str(exc)) from None


def scalar_to_keypair(scalar: int) -> KeyPair:
    """Rebuild a key-agreement pair from its scalar (used after key recovery)."""
    if not 1 <= scalar < CURVE_ORDER:
        raise ValueError("scalar out of range")
    pub = _private_key(scalar).public_key().public_bytes(
        serialization.Encoding.X962, serialization.PublicFormat.CompressedPoint
    )
    return KeyPair(secret=scalar.to_bytes(SCALAR_BYTES, "big"), public=pub)


def ka_gen(rng_seed: bytes) -> KeyPair:
    if not rng_seed:
        raise ValueError("empty seed")
    wide = int.from_bytes(hashlib.sha512(b"secagg/ka-gen" + rng_seed).digest(), "big")
    return scalar_to_keypair(wide % (CURVE_ORDER - 1) + 1)


def ka_derive(secret: bytes | int, public: bytes, ctx: str) -> bytes:
    """Derive the 32-byte key shared by the owners of ``secret`` and ``public``."""
    scalar = secret if isinstance(secret, int) else int.from_bytes(secret, "big")
    if not 1 <= scalar < CURVE_ORDER:
        raise ValueError("secret scalar out of range")
    shared = _private_key(scalar).exchange(ec.ECDH(), _public_key(bytes(public)))
    return HKDF(
        algorithm=hashes.SHA256(),
        length=SYMMETRIC_KEY_BYTES,
        salt=None,
        info=b"secagg/ka/" + ctx.encode("ascii"),
    ).derive(shared)


def validate_public_key(public: bytes) -> None:
    _public_key(bytes(public))


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


def ds_gen(rng_seed: bytes) -> KeyPair:
    if not rng_seed:
        raise ValueError("empty seed")
    secret = hashlib.sha256(b"secagg/ds-gen" + rng_seed).digest()
    pub = _signing_key(secret).public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )
    return KeyPair(secret=secret, public=pub)


@lru_cache(maxsize=8192)
def _signing_key(secret: bytes) -> ed25519.Ed25519PrivateKey:
    return ed25519.Ed25519PrivateKey.from_private_bytes(secret)


@lru_cache(maxsize=8192)
def _verify_key(public: bytes) -> ed25519.Ed25519PublicKey | None:
    try:
        return ed25519.Ed25519PublicKey.from_public_bytes(public)
    except ValueError:
        return None


def ds_sign(secret: bytes, message: bytes) -> bytes:
    return _signing_key(bytes(secret)).sign(message)


def ds_verify(public: bytes, signature: bytes, message: bytes) -> bool:
    if len(signature) != SIGNATURE_BYTES:
        return False
    return _verify(bytes(public), bytes(signature), bytes(message))


# In simulation every backup neighbor checks the same acknowledgment set, so
# verification results are memoized; verification is a pure function.
@lru_cache(maxsize=1 << 17)
def _verify(public: bytes, signature: bytes, message: bytes) -> bool:
    key = _verify_key(public)
    if key is None:
        return False
    try:
        key.verify(signature, message)
    except InvalidSignature:
        return False
    return True
