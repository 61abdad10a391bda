"""Beacon-seeded committee and backup-neighborhood selection.

Selection is a partial Fisher-Yates shuffle over the sorted universe, driven
by an AES-CTR keystream with rejection sampling for unbiased indices. Only the
touched positions are materialized, so selecting ell of n users costs O(ell).
"""

from __future__ import annotations

import hashlib
import struct
from collections.abc import Sequence
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

_U64 = 1 << 64


@dataclass(frozen=True)
class BeaconSeed:
    value: bytes
    round_index: int = 0

    def __post_init__(self) -> None:
        if len(self.value) != 32:
            raise ValueError("beacon value must be 32 bytes")

    def to_bytes(self) -> bytes:
        return self.value + struct.pack(">Q", self.round_index)


class HashBeacon:
    """Simulated public beacon: Q_r = SHA-256(master seed ‖ r)."""

    def __init__(self, master_seed: bytes):
        self.master_seed = bytes(master_seed)

    def __call__(self, round_index: int) -> BeaconSeed:
        v = hashlib.sha256(b"secagg/beacon" + self.master_seed + struct.pack(">Q", round_index)).digest()
        return BeaconSeed(v, round_index)


class PartyRange(Sequence):
    """Ids 1..n, optionally with one id removed, without building a list."""

    def __init__(self, n: int, exclude: int | None = None):
        self.n = n
        self.exclude = exclude

    def __len__(self) -> int:
        return self.n - (1 if self.exclude is not None and 1 <= self.exclude <= self.n else 0)

    def __getitem__(self, pos):
        if isinstance(pos, slice):
            return [self[i] for i in range(*pos.indices(len(self)))]
        if not 0 <= pos < len(self):
            raise IndexError(pos)
        v = pos + 1
        if self.exclude is not None and v >= self.exclude:
            v += 1
        return v


class _IndexStream:
    def __init__(self, seed: bytes):
        key = hashlib.sha256(b"secagg/select" + seed).digest()
        self._enc = Cipher(algorithms.AES(key), modes.CTR(bytes(16))).encryptor()
        self._buf = b""
        self._pos = 0

    def _word(self) -> int:
        if self._pos + 8 > len(self._buf):
            self._buf = self._enc.update(bytes(8 * 256))
            self._pos = 0
        w = int.from_bytes(self._buf[self._pos : self._pos + 8], "big")
        self._pos += 8
        return w

    def below(self, bound: int) -> int:
        limit = _U64 - (_U64 % bound)
        while True:
            w = self._word()
            if w < limit:
                return w % bound


def _seed_bytes(seed: bytes | BeaconSeed) -> bytes:
    return seed.to_bytes() if isinstance(seed, BeaconSeed) else bytes(seed)


def select(seed: bytes | BeaconSeed, universe: Sequence[int], count: int) -> list[int]:
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count > len(universe):
        raise ValueError(f"cannot select {count} of {len(universe)}")
    ordered = universe if isinstance(universe, (range, PartyRange)) else sorted(universe)
    size = len(ordered)
    stream = _IndexStream(_seed_bytes(seed))
    swapped: dict[int, int] = {}
    out = []
    for i in range(count):
        r = i + stream.below(size - i)
        vi = swapped.get(i, i)
        vr = swapped.get(r, r)
        swapped[r] = vi
        out.append(ordered[vr])
    return out


def encode_party(j: int) -> bytes:
    return struct.pack(">Q", j)


def committee(q: bytes | BeaconSeed, n: int, k: int) -> list[int]:
    return select(q, PartyRange(n), k)


def neighborhood(q: bytes | BeaconSeed, j: int, n: int, ell: int) -> list[int]:
    return select(_seed_bytes(q) + encode_party(j), PartyRange(n, exclude=j), ell)
