"""Honest server: routes messages, aggregates, and recovers dropped keys."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .. import modvec
from ..crypto.shamir import Share, inconsistent_shares
from ..params import Mode
from . import messages as M
from .roles import (
    Directory,
    Opening,
    ProtocolAbort,
    PublishedResult,
    Session,
    partial_blinding,
    reconstruct_committee_key,
    recover_rho,
)
from .wire import SERVER, Kind, MalformedMessage, Message


class Server:
    def __init__(self, session: Session, pki: Directory):
        self.session = session
        self.pki = pki
        p = session.params
        self.key_shares: dict[int, dict[int, bytes]] = {}
        self.inputs: dict[int, np.ndarray] = {}
        self.integrity: dict[int, tuple[bytes, bytes, dict[int, bytes]]] = {}
        self.u2: list[int] = []
        self.c_agg = modvec.zeros(p.m, p.modulus)
        self.partials: dict[int, np.ndarray] = {}
        self.openings: dict[int, Opening] = {}
        self.k_drop: list[int] = []
        self.acks: dict[int, bytes] = {}
        self.released: dict[int, dict[int, Share]] = defaultdict(dict)
        self.recovered_keys: dict[int, int] = {}
        self.flags: list[dict] = []
        self.output: np.ndarray | None = None
        self.result: PublishedResult | None = None
        self.abort: ProtocolAbort | None = None

    def _flag(self, what: str, **info) -> None:
        self.flags.append({"flag": what, **info})

    # round 2 messages in, round 3 messages out
    def round3(self, inbox: list[Message]) -> list[Message]:
        s, p = self.session, self.session.params
        for msg in inbox:
            try:
                if msg.kind is Kind.KEY_SHARES and msg.sender in s.committee_set:
                    self.key_shares[msg.sender] = {e.neighbor: e.ciphertext for e in M.parse_key_shares(msg)}
                elif msg.kind is Kind.MASKED_INPUT:
                    self.inputs[msg.sender] = M.parse_vector(msg, p)
                elif msg.kind is Kind.INTEGRITY:
                    self.integrity[msg.sender] = M.parse_integrity(msg, p)
            except MalformedMessage as exc:
                self._flag("malformed", sender=msg.sender, kind=msg.kind.name, error=str(exc))
        u2 = sorted(self.inputs)
        if p.mode is Mode.LISA_PLUS:
            u2 = [i for i in u2 if i in self.integrity]
        self.u2 = u2
        self.c_agg = modvec.total((self.inputs[i] for i in u2), p.m, p.modulus)

        out: list[Message] = []
        forward: dict[int, list[tuple[int, bytes]]] = defaultdict(list)
        for j in sorted(self.key_shares):
            members = s.neighbor_position[j]
            for i, ct in self.key_shares[j].items():
                if i in members:
                    forward[i].append((j, ct))
        for i in sorted(forward):
            out.append(M.share_forward(i, forward[i]))
        u2_set = set(u2)
        for j in sorted(s.committee_set & u2_set):
            out.append(M.survivors(j, u2))
            if p.mode is Mode.LISA_PLUS:
                out.append(M.commitments(j, [(i, self.integrity[i][0], self.integrity[i][1]) for i in u2]))
                out.append(M.rand_shares(j, [(i, self.integrity[i][2].get(j, b"")) for i in u2]))
        return out

    # round 3 messages in, round 4 messages out
    def round4(self, inbox: list[Message]) -> list[Message]:
        s, p = self.session, self.session.params
        for msg in inbox:
            if msg.sender not in s.committee_set:
                continue
            try:
                if msg.kind is Kind.PARTIAL_BLINDING:
                    self.partials[msg.sender] = M.parse_vector(msg, p)
                elif msg.kind is Kind.OPENING:
                    self.openings[msg.sender] = M.decode_opening(msg.sender, msg.payload, p)
            except MalformedMessage as exc:
                self._flag("malformed", sender=msg.sender, kind=msg.kind.name, error=str(exc))
        alive = set(self.partials)
        if p.mode is Mode.LISA_PLUS:
            alive &= set(self.openings)
        self.k_drop = [j for j in s.committee if j not in alive]
        if not self.k_drop:
            return []
        return [M.dropped(i, self.k_drop) for i in sorted(s.backups)]

    # round 4 messages in, round 5 messages out
    def round5(self, inbox: list[Message]) -> list[Message]:
        for msg in inbox:
            if msg.kind is Kind.ACK and msg.sender in self.session.backups:
                self.acks[msg.sender] = msg.payload
        if not self.session.params.mode.malicious or not self.acks:
            return []
        return [M.ack_set(i, self.acks) for i in sorted(self.acks)]

    # round 5 messages in, round 6 messages out (published result in lisa-plus)
    def round6(self, inbox: list[Message]) -> list[Message]:
        s, p = self.session, self.session.params
        for msg in inbox:
            if msg.kind is not Kind.SHARE_RELEASE:
                continue
            try:
                entries = M.parse_share_release(msg)
            except MalformedMessage as exc:
                self._flag("malformed", sender=msg.sender, kind=msg.kind.name, error=str(exc))
                continue
            for j, share in entries:
                pos = s.neighbor_position.get(j, {}).get(msg.sender)
                if pos is None or share.index != pos:
                    self._flag("misindexed-share", sender=msg.sender, member=j)
                    continue
                self.released[j][msg.sender] = share
        try:
            total = modvec.sub(self.c_agg, modvec.total(self.partials.values(), p.m, p.modulus), p.modulus)
            recovered_rho = {}
            for j in self.k_drop:
                shares = [self.released[j][i] for i in sorted(self.released[j])]
                if len(shares) < p.t:
                    raise ProtocolAbort("insufficient-shares", 6, SERVER)
                scalar = reconstruct_committee_key(shares, p.t, self.pki[j].committee)
                if scalar is None:
                    self._flag("reconstruction-mismatch", member=j)
                    raise ProtocolAbort("bad-reconstruction", 6, SERVER)
                bad = inconsistent_shares(shares, p.t)
                if bad:
                    self._flag("inconsistent-shares", member=j, indices=[b.index for b in bad])
                self.recovered_keys[j] = scalar
                total = modvec.sub(total, partial_blinding(s, scalar, self.u2, self.pki), p.modulus)
                if p.mode is Mode.LISA_PLUS:
                    recovered_rho[j] = recover_rho(s, scalar, self.u2, self.pki, {i: self.integrity[i][2][j] for i in self.u2})
        except ProtocolAbort as exc:
            self.abort = exc
            return []
        self.output = total
        if p.mode is not Mode.LISA_PLUS:
            return []
        self.result = PublishedResult(
            y=tuple(int(v) for v in total),
            u2=tuple(self.u2),
            alive={j: self.openings[j] for j in s.committee if j not in self.k_drop},
            recovered=recovered_rho,
        )
        return [M.result(i, self.result, p) for i in range(1, p.n + 1)]
