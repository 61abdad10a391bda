"""Binary message records and payload codecs.

Every message is a fixed header ``>BBQQI`` (round, kind, sender, receiver,
payload length) followed by the payload. Party 0 is the server. Payloads are
built from three shapes: raw fixed-width fields, sorted id lists
(``u32 count ‖ u64 ids``), and id-tagged blobs (``u32 count ‖ (u64 id, u32
len, bytes)*``).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Iterable

SERVER = 0

HEADER = struct.Struct(">BBQQI")
HEADER_BYTES = HEADER.size


class Kind(enum.IntEnum):
    KEY_SHARES = 1
    MASKED_INPUT = 2
    INTEGRITY = 3
    SHARE_FORWARD = 4
    SURVIVORS = 5
    COMMITMENTS = 6
    RAND_SHARES = 7
    PARTIAL_BLINDING = 8
    OPENING = 9
    DROPPED = 10
    ACK = 11
    ACK_SET = 12
    SHARE_RELEASE = 13
    RESULT = 14


class MalformedMessage(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    round: int
    kind: Kind
    sender: int
    receiver: int
    payload: bytes

    @property
    def size(self) -> int:
        return HEADER_BYTES + len(self.payload)

    def to_bytes(self) -> bytes:
        return HEADER.pack(self.round, int(self.kind), self.sender, self.receiver, len(self.payload)) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> Message:
        if len(data) < HEADER_BYTES:
            raise MalformedMessage("truncated header")
        rnd, kind, sender, receiver, length = HEADER.unpack_from(data)
        if len(data) != HEADER_BYTES + length:
            raise MalformedMessage("payload length mismatch")
        try:
            kind = Kind(kind)
        except ValueError:
            raise MalformedMessage(f"unknown kind {kind}") from None
        return cls(rnd, kind, sender, receiver, bytes(data[HEADER_BYTES:]))


class Reader:
    def __init__(self, data: bytes):
        self._data = memoryview(bytes(data))
        self._pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise MalformedMessage("payload truncated")
        out = bytes(self._data[self._pos : self._pos + n])
        self._pos += n
        return out

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def ids(self) -> list[int]:
        count = self.u32()
        if count * 8 > len(self._data) - self._pos:
            raise MalformedMessage("id list truncated")
        return [self.u64() for _ in range(count)]

    def tagged(self) -> list[tuple[int, bytes]]:
        count = self.u32()
        out = []
        for _ in range(count):
            ident = self.u64()
            out.append((ident, self.take(self.u32())))
        return out

    def rest(self) -> bytes:
        return self.take(len(self._data) - self._pos)

    def done(self) -> None:
        if self._pos != len(self._data):
            raise MalformedMessage("trailing bytes in payload")


def encode_ids(ids: Iterable[int]) -> bytes:
    """Canonical encoding of an id set: sorted, deduplicated, length-prefixed."""
    s = sorted(set(ids))
    return struct.pack(">I", len(s)) + b"".join(struct.pack(">Q", i) for i in s)


def encode_tagged(items: Iterable[tuple[int, bytes]]) -> bytes:
    items = list(items)
    parts = [struct.pack(">I", len(items))]
    for ident, blob in items:
        parts.append(struct.pack(">QI", ident, len(blob)))
        parts.append(blob)
    return b"".join(parts)


def decode_ids(data: bytes) -> list[int]:
    r = Reader(data)
    out = r.ids()
    r.done()
    if out != sorted(set(out)):
        raise MalformedMessage("id list not canonical")
    return out


def decode_tagged(data: bytes) -> list[tuple[int, bytes]]:
    r = Reader(data)
    out = r.tagged()
    r.done()
    return out


def ids_size(count: int) -> int:
    return 4 + 8 * count


def tagged_size(blob_sizes: Iterable[int]) -> int:
    return 4 + sum(12 + b for b in blob_sizes)
