"""A user's state machine across rounds 2 to 6, covering every role it holds."""

from __future__ import annotations

import numpy as np

from ..crypto.commit import vcomm_bytes
from ..params import Mode
from . import messages as M
from .roles import (
    Directory,
    PartyKeys,
    ProtocolAbort,
    Session,
    backup_round4,
    backup_round5,
    committee_round2,
    committee_round3,
    user_round2,
    user_verify_output,
)
from .wire import Kind, MalformedMessage, Message, decode_ids, decode_tagged


class Client:
    def __init__(self, session: Session, keys: PartyKeys, pki: Directory, x: np.ndarray):
        self.session = session
        self.keys = keys
        self.pki = pki
        self.x = x
        self.stored: dict[int, bytes] = {}
        self.k_drop: list[int] | None = None
        self.aborted: ProtocolAbort | None = None
        self.verdict: str | None = None

    @property
    def party(self) -> int:
        return self.keys.party

    def _guard(self, round_no: int, fn) -> list[Message]:
        if self.aborted is not None:
            return []
        try:
            return fn()
        except ProtocolAbort as exc:
            self.aborted = exc
        except MalformedMessage:
            self.aborted = ProtocolAbort("malformed-message", round_no, self.party)
        return []

    def round2_committee(self) -> list[Message]:
        if self.party not in self.session.committee_set:
            return []
        return [M.key_shares(self.party, committee_round2(self.session, self.keys, self.pki))]

    def round2_input(self) -> list[Message]:
        s = self.session
        pks = {j: self.pki[j].committee for j in s.committee}
        c, bundle = user_round2(s, self.x, self.keys, pks)
        out = [M.masked_input(self.party, c, s.params)]
        if bundle is not None:
            out.append(M.integrity(self.party, vcomm_bytes(bundle.commitment), bundle.signature, bundle.enc_rand_shares))
        return out

    def round3(self, inbox: list[Message]) -> list[Message]:
        return self._guard(3, lambda: self._round3(inbox))

    def _round3(self, inbox: list[Message]) -> list[Message]:
        s, p = self.session, self.session.params
        u2 = comms = rands = None
        for msg in inbox:
            if msg.kind is Kind.SHARE_FORWARD:
                for j, ct in decode_tagged(msg.payload):
                    if self.party in s.neighbor_position.get(j, {}):
                        self.stored.setdefault(j, ct)
            elif msg.kind is Kind.SURVIVORS and u2 is None:
                u2 = decode_ids(msg.payload)
            elif msg.kind is Kind.COMMITMENTS and comms is None:
                comms = M.parse_commitments(msg, p)
            elif msg.kind is Kind.RAND_SHARES and rands is None:
                rands = dict(decode_tagged(msg.payload))
        if u2 is None or self.party not in s.committee_set:
            return []
        d, opening = committee_round3(s, self.keys, u2, self.pki, comms, rands)
        out = [M.partial_blinding(self.party, d, p)]
        if opening is not None:
            out.append(M.opening(opening))
        return out

    def round4(self, inbox: list[Message]) -> list[Message]:
        return self._guard(4, lambda: self._round4(inbox))

    def _round4(self, inbox: list[Message]) -> list[Message]:
        for msg in inbox:
            if msg.kind is Kind.DROPPED:
                k_drop = decode_ids(msg.payload)
                sig = backup_round4(self.session, self.keys, k_drop)
                self.k_drop = k_drop
                return [M.ack(self.party, sig)] if sig is not None else []
        return []

    def round5(self, inbox: list[Message]) -> list[Message]:
        return self._guard(5, lambda: self._round5(inbox))

    def _round5(self, inbox: list[Message]) -> list[Message]:
        if self.k_drop is None:
            return []
        sigs = None
        if self.session.params.mode.malicious:
            for msg in inbox:
                if msg.kind is Kind.ACK_SET:
                    sigs = dict(decode_tagged(msg.payload))
                    break
            if sigs is None:
                return []
        released = backup_round5(self.session, self.keys, self.k_drop, sigs, self.stored, self.pki)
        return [M.share_release(self.party, released)] if released else []

    def round6(self, inbox: list[Message]) -> None:
        if self.aborted is not None or self.session.params.mode is not Mode.LISA_PLUS:
            return
        for msg in inbox:
            if msg.kind is Kind.RESULT:
                try:
                    res = M.decode_result(msg.payload, self.session.params)
                except MalformedMessage:
                    self.verdict = "malformed-result"
                    return
                self.verdict = user_verify_output(self.session, res, self.pki)
                return
        self.verdict = "no-result"
