"""Component-wise modular vector arithmetic.

Vectors are numpy arrays. Moduli up to 2**32 and exactly 2**64 use uint64
storage; any other modulus falls back to object arrays of Python ints.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

_U64 = 1 << 64


def element_bytes(modulus: int) -> int:
    """Fixed wire width of one residue."""
    if modulus < 2:
        raise ValueError("modulus must be at least 2")
    return ((modulus - 1).bit_length() + 7) // 8


def native(modulus: int) -> bool:
    return modulus <= (1 << 32) or modulus == _U64


def zeros(m: int, modulus: int) -> np.ndarray:
    if native(modulus):
        return np.zeros(m, dtype=np.uint64)
    out = np.empty(m, dtype=object)
    out[:] = 0
    return out


def from_ints(values: Iterable[int], modulus: int) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype.kind in "iu" and native(modulus):
        if modulus == _U64:
            return values.astype(np.int64 if values.dtype.kind == "i" else np.uint64).astype(np.uint64)
        # numpy's % follows Python's sign convention, and both fit in int64
        if values.dtype.kind == "i" or values.dtype.itemsize < 8:
            return np.mod(values.astype(np.int64), np.int64(modulus)).astype(np.uint64)
        return values % np.uint64(modulus)
    vals = [int(v) % modulus for v in values]
    if native(modulus):
        return np.array(vals, dtype=np.uint64)
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def add(a: np.ndarray, b: np.ndarray, modulus: int) -> np.ndarray:
    if modulus == _U64:
        return a + b
    return (a + b) % modulus


def sub(a: np.ndarray, b: np.ndarray, modulus: int) -> np.ndarray:
    if modulus == _U64:
        return a - b
    if native(modulus):
        return (a + (np.uint64(modulus) - b)) % np.uint64(modulus)
    return (a - b) % modulus


def total(vectors: Iterable[np.ndarray], m: int, modulus: int) -> np.ndarray:
    acc = zeros(m, modulus)
    for v in vectors:
        acc = add(acc, v, modulus)
    return acc


def to_list(v: np.ndarray) -> list[int]:
    return [int(x) for x in v]


def encode(v: np.ndarray, modulus: int) -> bytes:
    w = element_bytes(modulus)
    if native(modulus) and w in (1, 2, 4, 8):
        return np.asarray(v, dtype=np.uint64).astype(f">u{w}").tobytes()
    return b"".join(int(x).to_bytes(w, "big") for x in v)


def decode(data: bytes, m: int, modulus: int) -> np.ndarray:
    w = element_bytes(modulus)
    if len(data) != m * w:
        raise ValueError(f"expected {m * w} bytes for vector, got {len(data)}")
    if native(modulus) and w in (1, 2, 4, 8):
        v = np.frombuffer(data, dtype=f">u{w}").astype(np.uint64)
        if modulus != 1 << (8 * w) and np.any(v >= np.uint64(modulus)):
            raise ValueError("residue out of range")
        return v
    vals = [int.from_bytes(data[i : i + w], "big") for i in range(0, len(data), w)]
    if any(x >= modulus for x in vals):
        raise ValueError("residue out of range")
    return from_ints(vals, modulus)


def equal(a: Sequence[int], b: Sequence[int]) -> bool:
    return len(a) == len(b) and all(int(x) == int(y) for x, y in zip(a, b))
