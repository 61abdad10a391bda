"""Pedersen commitments in a prime-order subgroup of Z_p^*.

The subgroup order equals the P-256 order, so committed values live in the
same field as key shares. Vectors are committed component-wise with one
generator pair (g, h) and independent randomness per component.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import gmpy2

from .keys import CURVE_ORDER

GROUP_ORDER = CURVE_ORDER

# p = c * q + 1, found by derive_modulus(); pinned because the search takes a while.
MODULUS = int(
    "df9f04ce9cb29c74a4fbd85625aef2c8a49714e337c3697f75b3c78d2b89684d35e21d9f91a44a51e6e9ba10161ae01e"
    "4364a57562ca4217b0bebcd83cd7633e0e388978482cdea6f1e4c6215a7472c84ad92482800ad386e6bcda522aabd267"
    "71a3ec7ced92d11dba8c75081e9d18e666067a3f84c6e8bd3dadeef15fa87e2fd39d6b723f33b7ff2ccbc4486821350"
    "299dae45d9c560a8a8673b569f742b5adc7289cf35fdb0a29ab3f57577902e4f1ee5ba618e7e484518c83074bf59a1b"
    "a56923b1409a3889a808a3b311ad4ae30c48c47a1d95c501ddb987cec8ace9595324829d8b72de3f2c321f67f52d071c"
    "efe27618281c7bf224902b2fb3ea9c6cd1",
    16,
)
ELEMENT_BYTES = (MODULUS.bit_length() + 7) // 8
SCALAR_BYTES = (GROUP_ORDER.bit_length() + 7) // 8

_P = gmpy2.mpz(MODULUS)
_Q = gmpy2.mpz(GROUP_ORDER)


def derive_modulus() -> int:
    """Deterministic search for a 2048-bit prime p with q | p - 1."""
    c = int.from_bytes(hashlib.shake_256(b"secagg/pedersen/cofactor").digest(224), "big")
    c |= 1 << (2048 - 256 - 1)
    c -= c % 2
    while True:
        p = c * GROUP_ORDER + 1
        if p.bit_length() == 2048 and gmpy2.is_prime(p, 50):
            return p
        c += 2


def hash_to_group(label: bytes) -> int:
    """Subgroup element with no known discrete log relative to other labels."""
    cofactor = (_P - 1) // _Q
    ctr = 0
    while True:
        raw = hashlib.shake_256(b"secagg/pedersen/gen/" + label + ctr.to_bytes(4, "big")).digest(ELEMENT_BYTES + 16)
        e = gmpy2.powmod(int.from_bytes(raw, "big") % _P, cofactor, _P)
        if e != 1:
            return int(e)
        ctr += 1


G = hash_to_group(b"g")
H = hash_to_group(b"h")
_G = gmpy2.mpz(G)
_H = gmpy2.mpz(H)


class NotInGroup(ValueError):
    """Raised for values outside the order-q subgroup."""


@lru_cache(maxsize=1 << 16)
def is_member(e: int) -> bool:
    return 0 < e < MODULUS and gmpy2.powmod(e, _Q, _P) == 1


@dataclass(frozen=True)
class Commitment:
    element: int

    def to_bytes(self) -> bytes:
        return self.element.to_bytes(ELEMENT_BYTES, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> Commitment:
        if len(data) != ELEMENT_BYTES:
            raise ValueError("commitment must be %d bytes" % ELEMENT_BYTES)
        e = int.from_bytes(data, "big")
        if not is_member(e):
            raise NotInGroup("commitment is not a subgroup element")
        return cls(e)


IDENTITY = Commitment(1)


def comm_gen(m: int, r: int) -> Commitment:
    return Commitment(int(gmpy2.powmod(_G, m % GROUP_ORDER, _P) * gmpy2.powmod(_H, r % GROUP_ORDER, _P) % _P))


def comm_vfy(c: Commitment, m: int, r: int) -> bool:
    return c == comm_gen(m, r)


def comm_mul(c1: Commitment, c2: Commitment) -> Commitment:
    for c in (c1, c2):
        if not is_member(c.element):
            raise NotInGroup("operand is not a subgroup element")
    return Commitment(int(gmpy2.mpz(c1.element) * c2.element % _P))


def comm_product(cs: Iterable[Commitment]) -> Commitment:
    acc = gmpy2.mpz(1)
    for c in cs:
        if not is_member(c.element):
            raise NotInGroup("operand is not a subgroup element")
        acc = acc * c.element % _P
    return Commitment(int(acc))


# ---------------------------------------------------------------------------
# Component-wise vector commitments
# ---------------------------------------------------------------------------

VectorCommitment = tuple[Commitment, ...]


def vcomm_gen(xs: Sequence[int], rs: Sequence[int]) -> VectorCommitment:
    if len(xs) != len(rs):
        raise ValueError("value and randomness vectors differ in length")
    return tuple(comm_gen(int(x), int(r)) for x, r in zip(xs, rs))


def vcomm_vfy(cs: VectorCommitment, xs: Sequence[int], rs: Sequence[int]) -> bool:
    return len(cs) == len(xs) == len(rs) and all(
        comm_vfy(c, int(x), int(r)) for c, x, r in zip(cs, xs, rs)
    )


def vcomm_product(vectors: Iterable[VectorCommitment], m: int) -> VectorCommitment:
    vectors = list(vectors)
    if any(len(v) != m for v in vectors):
        raise ValueError("vector commitment of wrong length")
    return tuple(comm_product(v[c] for v in vectors) for c in range(m))


def vcomm_bytes(cs: VectorCommitment) -> bytes:
    return b"".join(c.to_bytes() for c in cs)


def vcomm_from_bytes(data: bytes, m: int) -> VectorCommitment:
    if len(data) != m * ELEMENT_BYTES:
        raise ValueError("vector commitment has wrong length")
    return tuple(Commitment.from_bytes(data[i : i + ELEMENT_BYTES]) for i in range(0, len(data), ELEMENT_BYTES))
