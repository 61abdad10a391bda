"""Shamir threshold sharing and k-of-k additive sharing over a prime field."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

from .keys import CURVE_ORDER

FIELD_PRIME = CURVE_ORDER


@dataclass(frozen=True)
class Share:
    index: int
    value: int

    def to_bytes(self, prime: int = FIELD_PRIME) -> bytes:
        w = (prime.bit_length() + 7) // 8
        return self.index.to_bytes(4, "big") + self.value.to_bytes(w, "big")

    @classmethod
    def from_bytes(cls, data: bytes, prime: int = FIELD_PRIME) -> Share:
        w = (prime.bit_length() + 7) // 8
        if len(data) != 4 + w:
            raise ValueError("malformed share encoding")
        index = int.from_bytes(data[:4], "big")
        value = int.from_bytes(data[4:], "big")
        if index < 1 or value >= prime:
            raise ValueError("share out of range")
        return cls(index, value)


def share_bytes(prime: int = FIELD_PRIME) -> int:
    return 4 + (prime.bit_length() + 7) // 8


def field_elements(rng_seed: bytes, count: int, prime: int) -> list[int]:
    """Deterministic field elements from a seed (64 spare bits per draw)."""
    w = (prime.bit_length() + 64 + 7) // 8
    raw = hashlib.shake_256(b"secagg/field/" + rng_seed).digest(w * count)
    return [int.from_bytes(raw[i * w : (i + 1) * w], "big") % prime for i in range(count)]


def ss_share(secret: int, t: int, ell: int, rng_seed: bytes, prime: int = FIELD_PRIME) -> list[Share]:
    if not 1 <= t:
        raise ValueError("threshold must be at least 1")
    if t > ell:
        raise ValueError(f"threshold {t} exceeds share count {ell}")
    if ell >= prime:
        raise ValueError("share count must be below the field order")
    if not 0 <= secret < prime:
        raise ValueError("secret outside the field")
    coeffs = [secret] + field_elements(rng_seed, t - 1, prime)
    shares = []
    for x in range(1, ell + 1):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % prime
        shares.append(Share(x, acc))
    return shares


def lagrange_at_zero(xs: Sequence[int], prime: int) -> list[int]:
    out = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if i != j:
                num = num * (-xj) % prime
                den = den * (xi - xj) % prime
        out.append(num * pow(den, -1, prime) % prime)
    return out


def ss_recon(shares: Iterable[Share], t: int, prime: int = FIELD_PRIME) -> int:
    """Interpolate at zero from the first ``t`` shares."""
    shares = list(shares)
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate share indices")
    if len(shares) < t:
        raise ValueError(f"need {t} shares, got {len(shares)}")
    use = shares[:t]
    coeffs = lagrange_at_zero([s.index for s in use], prime)
    return sum(c * s.value for c, s in zip(coeffs, use)) % prime


def inconsistent_shares(shares: Sequence[Share], t: int, prime: int = FIELD_PRIME) -> list[Share]:
    """Shares beyond the first ``t`` that miss the polynomial through the first ``t``."""
    base = list(shares[:t])
    bad = []
    for s in shares[t:]:
        acc = 0
        for i, bi in enumerate(base):
            num, den = 1, 1
            for j, bj in enumerate(base):
                if i != j:
                    num = num * (s.index - bj.index) % prime
                    den = den * (bi.index - bj.index) % prime
            acc = (acc + bi.value * num * pow(den, -1, prime)) % prime
        if acc != s.value:
            bad.append(s)
    return bad


def additive_share(secret: int, k: int, rng_seed: bytes, prime: int = FIELD_PRIME) -> list[int]:
    """k-of-k additive sharing: the returned values sum to ``secret`` mod prime."""
    if k < 1:
        raise ValueError("k must be at least 1")
    parts = field_elements(rng_seed, k - 1, prime)
    return parts + [(secret - sum(parts)) % prime]
