"""Server-side adversary strategies.

A strategy sees the honest server's outgoing messages for a round and returns
the list actually sent. Honest parties' code never changes. Corrupt users are
controlled through their keys, which the strategy may use to sign statements.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping

from ..crypto import commit
from ..crypto.keys import ds_sign
from ..params import Mode, ProtocolParams
from ..protocol import messages as M
from ..protocol.roles import Directory, PartyKeys, Session, commitment_statement, kdrop_statement
from ..protocol.wire import Kind, Message, decode_ids, decode_tagged


@dataclass
class Context:
    session: Session
    pki: Directory
    corrupt_keys: Mapping[int, PartyKeys] = field(default_factory=dict)


class Strategy:
    name = "honest"

    def bind(self, ctx: Context) -> None:
        self.ctx = ctx

    def check(self, p: ProtocolParams) -> None:
        pass

    def outgoing(self, round_no: int, msgs: list[Message]) -> list[Message]:
        return msgs

    def describe(self) -> dict:
        return {"strategy": self.name}


class Honest(Strategy):
    pass


class DropMessages(Strategy):
    """Withhold every outgoing message to the targets (optionally by round/kind)."""

    name = "drop_messages"

    def __init__(self, targets, rounds=None, kinds=None):
        self.targets = frozenset(int(t) for t in targets)
        self.rounds = frozenset(int(r) for r in rounds) if rounds else None
        self.kinds = frozenset(Kind[k] if isinstance(k, str) else Kind(k) for k in kinds) if kinds else None

    def outgoing(self, round_no, msgs):
        def keep(m: Message) -> bool:
            if m.receiver not in self.targets:
                return True
            if self.rounds is not None and m.round not in self.rounds:
                return True
            if self.kinds is not None and m.kind not in self.kinds:
                return True
            return False

        return [m for m in msgs if keep(m)]

    def describe(self):
        return {"strategy": self.name, "targets": sorted(self.targets)}


class EquivocateKdrop(Strategy):
    """Announce ``kdrop_b`` to ``group_b`` and ``kdrop_a`` to every other neighbor.

    Corrupt neighbors sign both sets; when forwarding acknowledgments, each
    group receives the corrupt signatures over its own set.
    """

    name = "equivocate_kdrop"

    def __init__(self, group_b, kdrop_a, kdrop_b):
        self.group_b = frozenset(int(i) for i in group_b)
        self.kdrop_a = sorted(set(int(j) for j in kdrop_a))
        self.kdrop_b = sorted(set(int(j) for j in kdrop_b))

    def _set_for(self, i: int) -> list[int]:
        return self.kdrop_b if i in self.group_b else self.kdrop_a

    def outgoing(self, round_no, msgs):
        s = self.ctx.session
        if round_no == 4:
            rest = [m for m in msgs if m.kind is not Kind.DROPPED]
            return rest + [M.dropped(i, self._set_for(i)) for i in sorted(s.backups)]
        if round_no == 5:
            out = []
            for m in msgs:
                if m.kind is not Kind.ACK_SET:
                    out.append(m)
                    continue
                sigs = dict(decode_tagged(m.payload))
                stmt = kdrop_statement(s, self._set_for(m.receiver))
                for c, keys in self.ctx.corrupt_keys.items():
                    if c in s.backups:
                        sigs[c] = ds_sign(keys.signing.secret, stmt)
                out.append(M.ack_set(m.receiver, sigs))
            return out
        return msgs

    def describe(self):
        return {
            "strategy": self.name,
            "group_b": sorted(self.group_b),
            "kdrop_a": self.kdrop_a,
            "kdrop_b": self.kdrop_b,
        }


class InflateU2(Strategy):
    """Add ids to the survivor set.

    ``stage="survivors"`` edits the set sent to committee members in round 3;
    ``stage="result"`` edits the set in the published result (lisa-plus).
    """

    name = "inflate_u2"

    def __init__(self, extra, recipients=None, stage="survivors"):
        if stage not in ("survivors", "result"):
            raise ValueError("stage must be 'survivors' or 'result'")
        self.extra = frozenset(int(i) for i in extra)
        self.recipients = frozenset(int(r) for r in recipients) if recipients else None
        self.stage = stage

    def check(self, p):
        if self.stage == "result" and p.mode is not Mode.LISA_PLUS:
            raise ValueError("inflating the published result applies to lisa-plus only")

    def outgoing(self, round_no, msgs):
        p = self.ctx.session.params
        out = []
        for m in msgs:
            if self.recipients is None or m.receiver in self.recipients:
                if self.stage == "survivors" and m.kind is Kind.SURVIVORS:
                    m = M.survivors(m.receiver, set(decode_ids(m.payload)) | self.extra)
                elif self.stage == "result" and m.kind is Kind.RESULT:
                    res = M.decode_result(m.payload, p)
                    u2 = tuple(sorted(set(res.u2) | self.extra))
                    m = M.result(m.receiver, type(res)(res.y, u2, res.alive, res.recovered), p)
            out.append(m)
        return out

    def describe(self):
        return {"strategy": self.name, "extra": sorted(self.extra), "stage": self.stage}


class ShrinkU2(Strategy):
    """Cut the survivor set down to ``size`` ids (default: one below ceil(αn)).

    With ``recipients`` only those committee members see the smaller set,
    which splits the committee's view of the survivors.
    """

    name = "shrink_u2"

    def __init__(self, size=None, recipients=None):
        self.size = None if size is None else int(size)
        self.recipients = frozenset(int(r) for r in recipients) if recipients else None

    def outgoing(self, round_no, msgs):
        target = self.size if self.size is not None else self.ctx.session.params.min_inputs - 1
        out = []
        for m in msgs:
            if m.kind is Kind.SURVIVORS and (self.recipients is None or m.receiver in self.recipients):
                m = M.survivors(m.receiver, decode_ids(m.payload)[: max(0, target)])
            out.append(m)
        return out

    def describe(self):
        return {"strategy": self.name, "size": self.size}


class TamperOutput(Strategy):
    """Add ``delta`` to one component of the published aggregate."""

    name = "tamper_output"

    def __init__(self, delta=1, component=0):
        self.delta = int(delta)
        self.component = int(component)

    def check(self, p):
        if p.mode is not Mode.LISA_PLUS:
            raise ValueError("tamper_output applies to lisa-plus only")
        if not 0 <= self.component < p.m:
            raise ValueError("component out of range")

    def outgoing(self, round_no, msgs):
        p = self.ctx.session.params
        out = []
        for m in msgs:
            if m.kind is Kind.RESULT:
                res = M.decode_result(m.payload, p)
                y = list(res.y)
                y[self.component] = (y[self.component] + self.delta) % p.modulus
                m = M.result(m.receiver, type(res)(tuple(y), res.u2, res.alive, res.recovered), p)
            out.append(m)
        return out

    def describe(self):
        return {"strategy": self.name, "delta": self.delta, "component": self.component}


class SubstituteCommitment(Strategy):
    """Replace one user's commitment before the committee aggregates it.

    If the target is corrupt, its key signs the replacement, so the committee
    accepts it and only the final check can notice. Otherwise the original
    signature is kept.
    """

    name = "substitute_commitment"

    def __init__(self, target, recipients=None, value=1):
        self.target = int(target)
        self.recipients = frozenset(int(r) for r in recipients) if recipients else None
        self.value = int(value)

    def check(self, p):
        if p.mode is not Mode.LISA_PLUS:
            raise ValueError("substitute_commitment applies to lisa-plus only")

    def outgoing(self, round_no, msgs):
        s = self.ctx.session
        p = s.params
        out = []
        for m in msgs:
            if m.kind is Kind.COMMITMENTS and (self.recipients is None or m.receiver in self.recipients):
                entries = M.parse_commitments(m, p)
                if self.target in entries:
                    _, sig = entries[self.target]
                    fake = commit.vcomm_bytes(commit.vcomm_gen([self.value] * p.m, [2] * p.m))
                    keys = self.ctx.corrupt_keys.get(self.target)
                    if keys is not None:
                        sig = ds_sign(keys.signing.secret, commitment_statement(s, self.target, fake))
                    entries[self.target] = (fake, sig)
                m = M.commitments(m.receiver, [(i, c, g) for i, (c, g) in sorted(entries.items())])
            out.append(m)
        return out

    def describe(self):
        return {"strategy": self.name, "target": self.target}


class TamperKeyShare(Strategy):
    """Flip one bit in every key-share ciphertext forwarded to ``neighbor``."""

    name = "tamper_key_share"

    def __init__(self, neighbor):
        self.neighbor = int(neighbor)

    def outgoing(self, round_no, msgs):
        out = []
        for m in msgs:
            if m.kind is Kind.SHARE_FORWARD and m.receiver == self.neighbor:
                entries = [(j, bytes([ct[0] ^ 1]) + ct[1:]) for j, ct in decode_tagged(m.payload)]
                m = M.share_forward(m.receiver, entries)
            out.append(m)
        return out

    def describe(self):
        return {"strategy": self.name, "neighbor": self.neighbor}


STRATEGIES = {
    cls.name: cls
    for cls in (Honest, DropMessages, EquivocateKdrop, InflateU2, ShrinkU2, TamperOutput, SubstituteCommitment, TamperKeyShare)
}


def make_strategy(spec: Mapping | str | None) -> Strategy:
    if spec is None:
        return Honest()
    if isinstance(spec, str):
        spec = {"strategy": spec}
    spec = dict(spec)
    name = spec.pop("strategy", "honest")
    if name not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}")
    return STRATEGIES[name](**spec)


def equivocation_against(session: Session, victim: int, corrupt: frozenset[int], dropped=()) -> EquivocateKdrop:
    """Equivocation aimed at an alive committee member ``victim``.

    Group B receives the true drop set and is made just large enough to give
    ``victim`` t acknowledgments together with the corrupt neighbors. Every
    other neighbor is told that ``victim`` dropped and would release its share.
    """
    p = session.params
    lj = session.neighborhoods[victim]
    honest = [i for i in lj if i not in corrupt]
    c_j = len(lj) - len(honest)
    need = max(0, p.t - c_j)
    order = sorted(honest, key=lambda i: hashlib.sha256(session.tag + i.to_bytes(8, "big")).digest())
    group_b = order[:need]
    dropped = sorted(set(dropped))
    return EquivocateKdrop(group_b=group_b, kdrop_a=sorted(set(dropped) | {victim}), kdrop_b=dropped)
