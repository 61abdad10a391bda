"""AES-CTR pseudorandom expansion of a 32-byte seed into residues."""

from __future__ import annotations

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .. import modvec

_ZERO_NONCE = bytes(16)


def keystream(seed: bytes, nbytes: int) -> bytes:
    if len(seed) != 32:
        raise ValueError("PRG seed must be 32 bytes")
    enc = Cipher(algorithms.AES(bytes(seed)), modes.CTR(_ZERO_NONCE)).encryptor()
    return enc.update(bytes(nbytes)) + enc.finalize()


def prg_expand(seed: bytes, m: int, modulus: int) -> np.ndarray:
    """Expand ``seed`` into ``m`` residues, uniform in [0, modulus).

    Power-of-two moduli read exactly the needed bits. Other moduli draw 64
    extra bits per element and reduce, leaving a bias below 2**-64.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if modulus < 2:
        raise ValueError("modulus must be at least 2")
    bits = (modulus - 1).bit_length()
    if modulus & (modulus - 1) == 0:
        w = (bits + 7) // 8
        raw = keystream(seed, m * w)
        if w in (1, 2, 4, 8):
            out = np.frombuffer(raw, dtype=f">u{w}").astype(np.uint64)
            if bits % 8:
                out &= np.uint64(modulus - 1)
            return out
        return modvec.from_ints(
            (int.from_bytes(raw[i : i + w], "big") for i in range(0, len(raw), w)), modulus
        )
    w = (bits + 64 + 7) // 8
    raw = keystream(seed, m * w)
    return modvec.from_ints(
        (int.from_bytes(raw[i : i + w], "big") for i in range(0, len(raw), w)), modulus
    )
