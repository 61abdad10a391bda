"""AES-256-GCM with deterministic per-message nonces."""

from __future__ import annotations

import hashlib
import struct

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

NONCE_BYTES = 12
TAG_BYTES = 16
OVERHEAD = NONCE_BYTES + TAG_BYTES


class MalformedCiphertext(ValueError):
    """The ciphertext cannot even be parsed (too short, wrong key length)."""


class AuthenticationError(Exception):
    """The tag did not verify: wrong key, wrong context, or tampering."""


def derive_nonce(round_no: int, sender: int, receiver: int, purpose: bytes = b"") -> bytes:
    h = hashlib.sha256(b"secagg/nonce" + struct.pack(">IQQ", round_no, sender, receiver) + purpose)
    return h.digest()[:NONCE_BYTES]


def ae_encrypt(key: bytes, plaintext: bytes, nonce: bytes, aad: bytes = b"") -> bytes:
    if len(key) != 32:
        raise ValueError("key must be 32 bytes")
    if len(nonce) != NONCE_BYTES:
        raise ValueError("nonce must be 12 bytes")
    return bytes(nonce) + AESGCM(bytes(key)).encrypt(bytes(nonce), bytes(plaintext), aad)


def ae_decrypt(key: bytes, ciphertext: bytes, aad: bytes = b"") -> bytes:
    if len(key) != 32:
        raise MalformedCiphertext("key must be 32 bytes")
    if len(ciphertext) < OVERHEAD:
        raise MalformedCiphertext("ciphertext shorter than nonce and tag")
    nonce, body = bytes(ciphertext[:NONCE_BYTES]), bytes(ciphertext[NONCE_BYTES:])
    try:
        return AESGCM(bytes(key)).decrypt(nonce, body, aad)
    except InvalidTag:
        raise AuthenticationError("authentication failed") from None
