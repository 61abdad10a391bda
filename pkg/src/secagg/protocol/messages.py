"""Builders and parsers for each message kind, plus their sizes.

The size helpers let the campaign traffic model count bytes without running
any cryptography; tests check them against real encodings.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .. import modvec
from ..crypto import ae, commit
from ..crypto.keys import SIGNATURE_BYTES
from ..crypto.shamir import Share, share_bytes
from ..params import ProtocolParams
from .roles import EncryptedKeyShare, Opening, PublishedResult, scalars_bytes, scalars_from
from .wire import (
    HEADER_BYTES,
    SERVER,
    Kind,
    MalformedMessage,
    Message,
    Reader,
    decode_ids,
    decode_tagged,
    encode_ids,
    encode_tagged,
    ids_size,
    tagged_size,
)

KEY_SHARE_CT_BYTES = ae.OVERHEAD + share_bytes()


def rand_share_ct_bytes(m: int) -> int:
    return ae.OVERHEAD + commit.SCALAR_BYTES * m


def opening_bytes(m: int) -> int:
    return commit.SCALAR_BYTES * m + SIGNATURE_BYTES + commit.ELEMENT_BYTES * m + SIGNATURE_BYTES


# ---------------------------------------------------------------------------
# Round 2 (users and committee members to the server)
# ---------------------------------------------------------------------------


def key_shares(member: int, shares: Sequence[EncryptedKeyShare]) -> Message:
    return Message(2, Kind.KEY_SHARES, member, SERVER, encode_tagged((s.neighbor, s.ciphertext) for s in shares))


def parse_key_shares(msg: Message) -> list[EncryptedKeyShare]:
    return [EncryptedKeyShare(msg.sender, i, ct) for i, ct in decode_tagged(msg.payload)]


def masked_input(party: int, c: np.ndarray, p: ProtocolParams) -> Message:
    return Message(2, Kind.MASKED_INPUT, party, SERVER, modvec.encode(c, p.modulus))


def parse_vector(msg: Message, p: ProtocolParams) -> np.ndarray:
    try:
        return modvec.decode(msg.payload, p.m, p.modulus)
    except ValueError as exc:
        raise MalformedMessage(str(exc)) from None


def integrity(party: int, comm: bytes, sig: bytes, enc: Mapping[int, bytes]) -> Message:
    payload = comm + sig + encode_tagged(sorted(enc.items()))
    return Message(2, Kind.INTEGRITY, party, SERVER, payload)


def parse_integrity(msg: Message, p: ProtocolParams) -> tuple[bytes, bytes, dict[int, bytes]]:
    r = Reader(msg.payload)
    comm = r.take(commit.ELEMENT_BYTES * p.m)
    sig = r.take(SIGNATURE_BYTES)
    enc = dict(r.tagged())
    r.done()
    return comm, sig, enc


# ---------------------------------------------------------------------------
# Round 3
# ---------------------------------------------------------------------------


def share_forward(neighbor: int, entries: Iterable[tuple[int, bytes]]) -> Message:
    return Message(3, Kind.SHARE_FORWARD, SERVER, neighbor, encode_tagged(entries))


def survivors(member: int, u2: Iterable[int]) -> Message:
    return Message(3, Kind.SURVIVORS, SERVER, member, encode_ids(u2))


def commitments(member: int, entries: Iterable[tuple[int, bytes, bytes]]) -> Message:
    return Message(3, Kind.COMMITMENTS, SERVER, member, encode_tagged((i, c + s) for i, c, s in entries))


def parse_commitments(msg: Message, p: ProtocolParams) -> dict[int, tuple[bytes, bytes]]:
    size = commit.ELEMENT_BYTES * p.m
    out = {}
    for i, blob in decode_tagged(msg.payload):
        if len(blob) != size + SIGNATURE_BYTES:
            raise MalformedMessage("commitment entry has wrong length")
        out[i] = (blob[:size], blob[size:])
    return out


def rand_shares(member: int, entries: Iterable[tuple[int, bytes]]) -> Message:
    return Message(3, Kind.RAND_SHARES, SERVER, member, encode_tagged(entries))


def partial_blinding(member: int, d: np.ndarray, p: ProtocolParams) -> Message:
    return Message(3, Kind.PARTIAL_BLINDING, member, SERVER, modvec.encode(d, p.modulus))


def encode_opening(op: Opening) -> bytes:
    return scalars_bytes(op.rho) + op.rho_sig + commit.vcomm_bytes(op.agg) + op.agg_sig


def decode_opening(member: int, data: bytes, p: ProtocolParams) -> Opening:
    r = Reader(data)
    try:
        rho = tuple(scalars_from(r.take(commit.SCALAR_BYTES * p.m), p.m))
        rho_sig = r.take(SIGNATURE_BYTES)
        agg = commit.vcomm_from_bytes(r.take(commit.ELEMENT_BYTES * p.m), p.m)
        agg_sig = r.take(SIGNATURE_BYTES)
    except ValueError as exc:
        raise MalformedMessage(str(exc)) from None
    r.done()
    return Opening(member, rho, rho_sig, agg, agg_sig)


def opening(op: Opening) -> Message:
    return Message(3, Kind.OPENING, op.member, SERVER, encode_opening(op))


# ---------------------------------------------------------------------------
# Rounds 4 and 5
# ---------------------------------------------------------------------------


def dropped(neighbor: int, k_drop: Iterable[int]) -> Message:
    return Message(4, Kind.DROPPED, SERVER, neighbor, encode_ids(k_drop))


def ack(neighbor: int, sig: bytes) -> Message:
    return Message(4, Kind.ACK, neighbor, SERVER, sig)


def ack_set(neighbor: int, sigs: Mapping[int, bytes]) -> Message:
    return Message(5, Kind.ACK_SET, SERVER, neighbor, encode_tagged(sorted(sigs.items())))


def share_release(neighbor: int, shares: Iterable[tuple[int, Share]]) -> Message:
    return Message(5, Kind.SHARE_RELEASE, neighbor, SERVER, encode_tagged((j, s.to_bytes()) for j, s in shares))


def parse_share_release(msg: Message) -> list[tuple[int, Share]]:
    try:
        return [(j, Share.from_bytes(b)) for j, b in decode_tagged(msg.payload)]
    except ValueError as exc:
        raise MalformedMessage(str(exc)) from None


# ---------------------------------------------------------------------------
# Round 6
# ---------------------------------------------------------------------------


def encode_result(res: PublishedResult, p: ProtocolParams) -> bytes:
    return (
        modvec.encode(modvec.from_ints(res.y, p.modulus), p.modulus)
        + encode_ids(res.u2)
        + encode_tagged((j, encode_opening(op)) for j, op in sorted(res.alive.items()))
        + encode_tagged((j, scalars_bytes(rho)) for j, rho in sorted(res.recovered.items()))
    )


def decode_result(data: bytes, p: ProtocolParams) -> PublishedResult:
    r = Reader(data)
    try:
        y = tuple(int(v) for v in modvec.decode(r.take(modvec.element_bytes(p.modulus) * p.m), p.m, p.modulus))
        u2 = tuple(r.ids())
        alive = {j: decode_opening(j, blob, p) for j, blob in r.tagged()}
        recovered = {j: tuple(scalars_from(blob, p.m)) for j, blob in r.tagged()}
    except ValueError as exc:
        raise MalformedMessage(str(exc)) from None
    r.done()
    return PublishedResult(y, u2, alive, recovered)


def result(party: int, res: PublishedResult, p: ProtocolParams) -> Message:
    return Message(6, Kind.RESULT, SERVER, party, encode_result(res, p))


# ---------------------------------------------------------------------------
# Sizes (header included)
# ---------------------------------------------------------------------------


def vector_bytes(p: ProtocolParams) -> int:
    return p.m * modvec.element_bytes(p.modulus)


def size_key_shares(p: ProtocolParams) -> int:
    return HEADER_BYTES + tagged_size([KEY_SHARE_CT_BYTES] * p.ell)


def size_masked_input(p: ProtocolParams) -> int:
    return HEADER_BYTES + vector_bytes(p)


def size_integrity(p: ProtocolParams) -> int:
    return HEADER_BYTES + commit.ELEMENT_BYTES * p.m + SIGNATURE_BYTES + tagged_size([rand_share_ct_bytes(p.m)] * p.k)


def size_share_forward(count: int) -> int:
    return HEADER_BYTES + tagged_size([KEY_SHARE_CT_BYTES] * count)


def size_ids(count: int) -> int:
    return HEADER_BYTES + ids_size(count)


def size_commitments(p: ProtocolParams, count: int) -> int:
    return HEADER_BYTES + tagged_size([commit.ELEMENT_BYTES * p.m + SIGNATURE_BYTES] * count)


def size_rand_shares(p: ProtocolParams, count: int) -> int:
    return HEADER_BYTES + tagged_size([rand_share_ct_bytes(p.m)] * count)


def size_opening(p: ProtocolParams) -> int:
    return HEADER_BYTES + opening_bytes(p.m)


def size_ack() -> int:
    return HEADER_BYTES + SIGNATURE_BYTES


def size_ack_set(count: int) -> int:
    return HEADER_BYTES + tagged_size([SIGNATURE_BYTES] * count)


def size_share_release(count: int) -> int:
    return HEADER_BYTES + tagged_size([share_bytes()] * count)


def size_result(p: ProtocolParams, u2: int, alive: int, recovered: int) -> int:
    return (
        HEADER_BYTES
        + vector_bytes(p)
        + ids_size(u2)
        + tagged_size([opening_bytes(p.m)] * alive)
        + tagged_size([commit.SCALAR_BYTES * p.m] * recovered)
    )
